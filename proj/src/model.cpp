#include "noisylab/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "noisylab/rng.hpp"

namespace noisylab {

namespace {

constexpr double kProbLo = 1e-7;
constexpr double kProbHi = 1.0 - 1e-7;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// d(per-cell loss)/d(logit); pc is the clamped probability, p the raw one.
double asl_dloss_dz(double p, std::uint8_t y, const AslConfig& cfg) {
  if (p <= kProbLo || p >= kProbHi) return 0.0;  // clamped region is flat
  double dldp;
  if (y) {
    const double q = 1.0 - p;
    dldp = -std::pow(q, cfg.gamma_pos) / p;
    if (cfg.gamma_pos > 0.0) dldp += cfg.gamma_pos * std::pow(q, cfg.gamma_pos - 1.0) * std::log(p);
  } else {
    const double pm = p - cfg.margin;
    if (pm <= 0.0) return 0.0;
    if (cfg.gamma_neg > 0.0) {
      dldp = cfg.gamma_neg * std::pow(pm, cfg.gamma_neg - 1.0) * (-std::log(1.0 - pm)) +
             std::pow(pm, cfg.gamma_neg) / (1.0 - pm);
    } else {
      dldp = 1.0 / (1.0 - pm);
    }
  }
  return dldp * p * (1.0 - p);  // chain through the sigmoid
}

}  // namespace

MlpParams MlpParams::zeros(std::size_t d, std::size_t h, std::size_t c) {
  MlpParams p;
  p.w1 = Matrix(d, h);
  p.b1.assign(h, 0.0);
  p.w2 = Matrix(h, c);
  p.b2.assign(c, 0.0);
  return p;
}

bool MlpParams::all_finite() const {
  for (std::size_t i = 0; i < w1.size(); ++i)
    if (!std::isfinite(w1.data()[i])) return false;
  for (double v : b1)
    if (!std::isfinite(v)) return false;
  for (std::size_t i = 0; i < w2.size(); ++i)
    if (!std::isfinite(w2.data()[i])) return false;
  for (double v : b2)
    if (!std::isfinite(v)) return false;
  return true;
}

MlpParams init_params(std::size_t d, std::size_t h, std::size_t c, std::uint64_t seed) {
  if (d < 1 || h < 1 || c < 1) throw std::invalid_argument("init_params: d, h, C must be >= 1");
  MlpParams p = MlpParams::zeros(d, h, c);
  Rng rng(derive_seed(seed, 0xD44));
  const double s1 = 1.0 / std::sqrt(double(d));
  for (std::size_t i = 0; i < p.w1.size(); ++i) p.w1.data()[i] = (2.0 * rng.uniform01() - 1.0) * s1;
  const double s2 = 1.0 / std::sqrt(double(h));
  for (std::size_t i = 0; i < p.w2.size(); ++i) p.w2.data()[i] = (2.0 * rng.uniform01() - 1.0) * s2;
  return p;
}

Matrix forward(const MlpParams& params, const Matrix& x) {
  if (x.cols() != params.input_dim())
    throw std::invalid_argument("forward: input has " + std::to_string(x.cols()) +
                                " features, model expects " + std::to_string(params.input_dim()));
  const std::size_t n = x.rows(), d = x.cols(), h = params.hidden(), c = params.classes();
  Matrix probs(n, c);
#pragma omp parallel for if (n * h * d > 65536)
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> hidden(h);
    for (std::size_t a = 0; a < h; ++a) {
      double z = params.b1[a];
      for (std::size_t j = 0; j < d; ++j) z += x(i, j) * params.w1(j, a);
      hidden[a] = std::tanh(z);
    }
    for (std::size_t k = 0; k < c; ++k) {
      double z = params.b2[k];
      for (std::size_t a = 0; a < h; ++a) z += hidden[a] * params.w2(a, k);
      probs(i, k) = sigmoid(z);
    }
  }
  return probs;
}

Matrix asl_loss(const Matrix& probs, const BinaryMatrix& labels, const AslConfig& cfg) {
  if (probs.rows() != labels.rows() || probs.cols() != labels.cols())
    throw std::invalid_argument("asl_loss: shape mismatch");
  if (cfg.gamma_pos < 0.0 || cfg.gamma_neg < 0.0)
    throw std::invalid_argument("asl_loss: focusing exponents must be >= 0");
  if (cfg.margin < 0.0 || cfg.margin >= 1.0)
    throw std::invalid_argument("asl_loss: margin must be in [0,1)");

  const std::size_t n = probs.rows(), c = probs.cols();
  Matrix loss(n, c);
#pragma omp parallel for if (n * c > 16384)
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < c; ++k) {
      const double p = std::clamp(probs(i, k), kProbLo, kProbHi);
      double l;
      if (labels(i, k)) {
        l = std::pow(1.0 - p, cfg.gamma_pos) * (-std::log(p));
      } else {
        const double pm = std::max(p - cfg.margin, 0.0);
        l = (pm == 0.0) ? 0.0 : std::pow(pm, cfg.gamma_neg) * (-std::log(1.0 - pm));
      }
      loss(i, k) = l;
    }
  }
  return loss;
}

MlpParams backward(const MlpParams& params, const Matrix& x, const BinaryMatrix& labels,
                   const AslConfig& cfg, const Matrix& cell_weights) {
  const std::size_t n = x.rows(), d = x.cols(), h = params.hidden(), c = params.classes();
  if (labels.rows() != n || labels.cols() != c || cell_weights.rows() != n ||
      cell_weights.cols() != c)
    throw std::invalid_argument("backward: shape mismatch");

  double weight_sum = 0.0;
  for (std::size_t i = 0; i < cell_weights.size(); ++i) {
    const double w = cell_weights.data()[i];
    if (w < 0.0) throw std::invalid_argument("backward: cell weights must be >= 0");
    weight_sum += w;
  }
  MlpParams grads = MlpParams::zeros(d, h, c);
  if (weight_sum == 0.0) return grads;

  // recompute activations so the call is self-contained
  Matrix hidden(n, h);
  Matrix dz2(n, c);
#pragma omp parallel for if (n * h * d > 65536)
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < h; ++a) {
      double z = params.b1[a];
      for (std::size_t j = 0; j < d; ++j) z += x(i, j) * params.w1(j, a);
      hidden(i, a) = std::tanh(z);
    }
    for (std::size_t k = 0; k < c; ++k) {
      double z = params.b2[k];
      for (std::size_t a = 0; a < h; ++a) z += hidden(i, a) * params.w2(a, k);
      const double p = sigmoid(z);
      dz2(i, k) = cell_weights(i, k) * asl_dloss_dz(p, labels(i, k), cfg) / weight_sum;
    }
  }

#pragma omp parallel for if (h * c * n > 65536)
  for (std::size_t a = 0; a < h; ++a)
    for (std::size_t k = 0; k < c; ++k) {
      double g = 0.0;
      for (std::size_t i = 0; i < n; ++i) g += hidden(i, a) * dz2(i, k);
      grads.w2(a, k) = g;
    }
  for (std::size_t k = 0; k < c; ++k) {
    double g = 0.0;
    for (std::size_t i = 0; i < n; ++i) g += dz2(i, k);
    grads.b2[k] = g;
  }

  Matrix dz1(n, h);
#pragma omp parallel for if (n * h * c > 65536)
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < h; ++a) {
      double g = 0.0;
      for (std::size_t k = 0; k < c; ++k) g += dz2(i, k) * params.w2(a, k);
      const double t = hidden(i, a);
      dz1(i, a) = g * (1.0 - t * t);  // tanh'
    }

#pragma omp parallel for if (d * h * n > 65536)
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t a = 0; a < h; ++a) {
      double g = 0.0;
      for (std::size_t i = 0; i < n; ++i) g += x(i, j) * dz1(i, a);
      grads.w1(j, a) = g;
    }
  for (std::size_t a = 0; a < h; ++a) {
    double g = 0.0;
    for (std::size_t i = 0; i < n; ++i) g += dz1(i, a);
    grads.b1[a] = g;
  }
  return grads;
}

AdamState AdamState::init(const MlpParams& like) {
  AdamState s;
  s.m = MlpParams::zeros(like.input_dim(), like.hidden(), like.classes());
  s.v = MlpParams::zeros(like.input_dim(), like.hidden(), like.classes());
  return s;
}

namespace {

void adam_update_span(double* p, double* m, double* v, const double* g, std::size_t n,
                      const AdamState& s, double lr) {
  const double bc1 = 1.0 - std::pow(s.beta1, double(s.t));
  const double bc2 = 1.0 - std::pow(s.beta2, double(s.t));
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(g[i])) throw std::runtime_error("adam_step: non-finite gradient");
    m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * g[i];
    v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * g[i] * g[i];
    p[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + s.eps_hat);
  }
}

}  // namespace

void adam_step(AdamState& state, MlpParams& params, const MlpParams& grads, double lr) {
  state.t += 1;
  adam_update_span(params.w1.data(), state.m.w1.data(), state.v.w1.data(), grads.w1.data(),
                   params.w1.size(), state, lr);
  adam_update_span(params.b1.data(), state.m.b1.data(), state.v.b1.data(), grads.b1.data(),
                   params.b1.size(), state, lr);
  adam_update_span(params.w2.data(), state.m.w2.data(), state.v.w2.data(), grads.w2.data(),
                   params.w2.size(), state, lr);
  adam_update_span(params.b2.data(), state.m.b2.data(), state.v.b2.data(), grads.b2.data(),
                   params.b2.size(), state, lr);
}

double one_cycle_lr(const OneCycleSchedule& sched, std::size_t step) {
  if (!(sched.max_lr > 0.0)) throw std::invalid_argument("one_cycle_lr: max_lr must be > 0");
  if (!(sched.warmup_fraction > 0.0 && sched.warmup_fraction < 1.0))
    throw std::invalid_argument("one_cycle_lr: warmup_fraction must be in (0,1)");
  if (step >= sched.total_steps)
    throw std::out_of_range("one_cycle_lr: step " + std::to_string(step) + " outside schedule of " +
                            std::to_string(sched.total_steps) + " steps");
  const double lo = sched.max_lr / 25.0;
  const double fin = sched.max_lr / 1e4;
  if (sched.total_steps == 1) return lo;

  const std::size_t last = sched.total_steps - 1;
  std::size_t peak = static_cast<std::size_t>(std::llround(sched.warmup_fraction * double(last)));
  peak = std::clamp<std::size_t>(peak, 1, last);

  const double pi = 3.14159265358979323846;
  if (step <= peak) {
    const double progress = double(step) / double(peak);
    return lo + (sched.max_lr - lo) * (1.0 - std::cos(pi * progress)) / 2.0;
  }
  const double progress = double(step - peak) / double(last - peak);
  return fin + (sched.max_lr - fin) * (1.0 + std::cos(pi * progress)) / 2.0;
}

namespace {

void write_doubles(std::ofstream& out, const double* p, std::size_t n) {
  out.write(reinterpret_cast<const char*>(p), std::streamsize(n * sizeof(double)));
}

void read_doubles(std::ifstream& in, double* p, std::size_t n) {
  in.read(reinterpret_cast<char*>(p), std::streamsize(n * sizeof(double)));
  if (!in) throw std::runtime_error("load_checkpoint: truncated file");
}

}  // namespace

void save_checkpoint(const MlpParams& params, std::uint64_t seed,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_checkpoint: cannot write '" + path.string() + "'");
  const std::uint64_t header[4] = {params.input_dim(), params.hidden(), params.classes(), seed};
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  write_doubles(out, params.w1.data(), params.w1.size());
  write_doubles(out, params.b1.data(), params.b1.size());
  write_doubles(out, params.w2.data(), params.w2.size());
  write_doubles(out, params.b2.data(), params.b2.size());
  if (!out) throw std::runtime_error("save_checkpoint: write failed for '" + path.string() + "'");
}

MlpParams load_checkpoint(const std::filesystem::path& path, std::uint64_t* seed_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open '" + path.string() + "'");
  std::uint64_t header[4];
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  if (!in) throw std::runtime_error("load_checkpoint: truncated header");
  MlpParams p = MlpParams::zeros(header[0], header[1], header[2]);
  read_doubles(in, p.w1.data(), p.w1.size());
  read_doubles(in, p.b1.data(), p.b1.size());
  read_doubles(in, p.w2.data(), p.w2.size());
  read_doubles(in, p.b2.data(), p.b2.size());
  if (seed_out) *seed_out = header[3];
  return p;
}

}  // namespace noisylab
