#include "noisylab/reference.hpp"

#include <cmath>

namespace noisylab::ref {

namespace {

double logistic(double z) {
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double clamp_prob(double p) {
  const double lo = 1e-7, hi = 1.0 - 1e-7;
  if (p < lo) return lo;
  if (p > hi) return hi;
  return p;
}

double cell_loss(double p, bool positive, const AslConfig& cfg) {
  const double pc = clamp_prob(p);
  if (positive) return std::pow(1.0 - pc, cfg.gamma_pos) * (-std::log(pc));
  const double shifted = pc - cfg.margin;
  if (shifted <= 0.0) return 0.0;
  return std::pow(shifted, cfg.gamma_neg) * (-std::log(1.0 - shifted));
}

// derivative of cell_loss with respect to the raw probability
double cell_loss_dp(double p, bool positive, const AslConfig& cfg) {
  const double lo = 1e-7, hi = 1.0 - 1e-7;
  if (p <= lo || p >= hi) return 0.0;
  if (positive) {
    double out = -std::pow(1.0 - p, cfg.gamma_pos) / p;
    if (cfg.gamma_pos > 0.0)
      out += cfg.gamma_pos * std::pow(1.0 - p, cfg.gamma_pos - 1.0) * std::log(p);
    return out;
  }
  const double shifted = p - cfg.margin;
  if (shifted <= 0.0) return 0.0;
  if (cfg.gamma_neg == 0.0) return 1.0 / (1.0 - shifted);
  return cfg.gamma_neg * std::pow(shifted, cfg.gamma_neg - 1.0) * (-std::log(1.0 - shifted)) +
         std::pow(shifted, cfg.gamma_neg) / (1.0 - shifted);
}

}  // namespace

Matrix forward(const MlpParams& params, const Matrix& x) {
  const std::size_t n = x.rows(), d = x.cols(), h = params.hidden(), c = params.classes();
  Matrix out(n, c);
  std::vector<double> hidden(h);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < h; ++a) {
      double acc = params.b1[a];
      for (std::size_t j = 0; j < d; ++j) acc += x(i, j) * params.w1(j, a);
      hidden[a] = std::tanh(acc);
    }
    for (std::size_t k = 0; k < c; ++k) {
      double acc = params.b2[k];
      for (std::size_t a = 0; a < h; ++a) acc += hidden[a] * params.w2(a, k);
      out(i, k) = logistic(acc);
    }
  }
  return out;
}

Matrix asl_loss(const Matrix& probs, const BinaryMatrix& labels, const AslConfig& cfg) {
  Matrix out(probs.rows(), probs.cols());
  for (std::size_t i = 0; i < probs.rows(); ++i)
    for (std::size_t k = 0; k < probs.cols(); ++k)
      out(i, k) = cell_loss(probs(i, k), labels(i, k) != 0, cfg);
  return out;
}

MlpParams backward(const MlpParams& params, const Matrix& x, const BinaryMatrix& labels,
                   const AslConfig& cfg, const Matrix& cell_weights) {
  const std::size_t n = x.rows(), d = x.cols(), h = params.hidden(), c = params.classes();
  MlpParams grads = MlpParams::zeros(d, h, c);

  double wsum = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < c; ++k) wsum += cell_weights(i, k);
  if (wsum == 0.0) return grads;

  std::vector<double> hidden(h), pre(h);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < h; ++a) {
      double acc = params.b1[a];
      for (std::size_t j = 0; j < d; ++j) acc += x(i, j) * params.w1(j, a);
      pre[a] = acc;
      hidden[a] = std::tanh(acc);
    }
    // one cell at a time: rank-1 contribution of each output unit
    std::vector<double> dhidden(h, 0.0);
    for (std::size_t k = 0; k < c; ++k) {
      double acc = params.b2[k];
      for (std::size_t a = 0; a < h; ++a) acc += hidden[a] * params.w2(a, k);
      const double p = logistic(acc);
      const double dz = cell_weights(i, k) * cell_loss_dp(p, labels(i, k) != 0, cfg) * p *
                        (1.0 - p) / wsum;
      grads.b2[k] += dz;
      for (std::size_t a = 0; a < h; ++a) {
        grads.w2(a, k) += hidden[a] * dz;
        dhidden[a] += params.w2(a, k) * dz;
      }
    }
    for (std::size_t a = 0; a < h; ++a) {
      const double th = std::tanh(pre[a]);
      const double dz = dhidden[a] * (1.0 - th * th);
      grads.b1[a] += dz;
      for (std::size_t j = 0; j < d; ++j) grads.w1(j, a) += x(i, j) * dz;
    }
  }
  return grads;
}

}  // namespace noisylab::ref
