#include "noisylab/noise.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "noisylab/rng.hpp"

namespace noisylab {

void NoiseLedger::refresh_rates() {
  const std::size_t n = flip_mask.rows(), c = flip_mask.cols();
  epsilon_per_class.assign(c, 0.0);
  std::size_t total = 0;
  for (std::size_t k = 0; k < c; ++k) {
    std::size_t flips = flip_mask.count_col(k);
    epsilon_per_class[k] = n ? double(flips) / double(n) : 0.0;
    total += flips;
  }
  epsilon = (n * c) ? double(total) / double(n * c) : 0.0;
}

TransitionMatrix::TransitionMatrix(Matrix probs) : probs_(std::move(probs)) {
  if (probs_.rows() != probs_.cols())
    throw std::invalid_argument("TransitionMatrix: must be square");
  for (std::size_t i = 0; i < probs_.rows(); ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < probs_.cols(); ++j) {
      double p = probs_(i, j);
      if (p < 0.0 || p > 1.0)
        throw std::invalid_argument("TransitionMatrix: entry out of [0,1] at row " +
                                    std::to_string(i));
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw std::invalid_argument("TransitionMatrix: row " + std::to_string(i) +
                                  " sums to " + std::to_string(sum) + ", expected 1");
  }
}

TransitionMatrix TransitionMatrix::identity(std::size_t classes) {
  Matrix m(classes, classes, 0.0);
  for (std::size_t i = 0; i < classes; ++i) m(i, i) = 1.0;
  return TransitionMatrix(std::move(m));
}

NoisyLabels inject_uniform(const BinaryMatrix& labels, double epsilon_req, std::uint64_t seed) {
  if (epsilon_req < 0.0 || epsilon_req > 1.0)
    throw std::invalid_argument("inject_uniform: epsilon must be in [0,1]");
  const std::size_t cells = labels.size();
  const std::size_t flips =
      static_cast<std::size_t>(std::llround(epsilon_req * double(cells)));

  NoisyLabels out;
  out.labels = labels;
  out.ledger.flip_mask = BinaryMatrix(labels.rows(), labels.cols());
  out.ledger.strategy = "uniform";
  out.ledger.seed = seed;

  Rng rng(derive_seed(seed, 0xA11));
  for (std::size_t idx : rng.sample_without_replacement(cells, flips)) {
    out.labels.data()[idx] ^= 1;
    out.ledger.flip_mask.data()[idx] = 1;
  }
  out.ledger.refresh_rates();
  return out;
}

NoisyLabels inject_mixed(const BinaryMatrix& labels, double positive_rate, std::uint64_t seed) {
  if (positive_rate < 0.0 || positive_rate > 1.0)
    throw std::invalid_argument("inject_mixed: rate must be in [0,1]");

  NoisyLabels out;
  out.labels = labels;
  out.ledger.flip_mask = BinaryMatrix(labels.rows(), labels.cols());
  out.ledger.strategy = "mixed";
  out.ledger.seed = seed;

  const std::size_t n = labels.rows(), c = labels.cols();
  Rng rng(derive_seed(seed, 0xB22));
  for (std::size_t k = 0; k < c; ++k) {
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < n; ++i) (labels(i, k) ? pos : neg).push_back(i);
    const std::size_t flips = static_cast<std::size_t>(std::floor(positive_rate * double(pos.size())));
    if (flips > neg.size())
      throw std::invalid_argument("inject_mixed: class " + std::to_string(k) + " has only " +
                                  std::to_string(neg.size()) + " negatives, need " +
                                  std::to_string(flips));
    rng.shuffle(pos);
    rng.shuffle(neg);
    for (std::size_t t = 0; t < flips; ++t) {
      out.labels.set(pos[t], k, false);
      out.ledger.flip_mask.set(pos[t], k, true);
      out.labels.set(neg[t], k, true);
      out.ledger.flip_mask.set(neg[t], k, true);
    }
  }
  out.ledger.refresh_rates();
  return out;
}

NoisyLabels inject_transition(const BinaryMatrix& labels, const TransitionMatrix& t,
                              std::uint64_t seed) {
  if (t.classes() != labels.cols())
    throw std::invalid_argument("inject_transition: matrix size does not match class count");

  NoisyLabels out;
  out.labels = labels;
  out.ledger.strategy = "transition";
  out.ledger.seed = seed;

  const std::size_t n = labels.rows(), c = labels.cols();
  Rng rng(derive_seed(seed, 0xC33));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t from = 0; from < c; ++from) {
      // one categorical draw from row `from`; ascending class order is fixed
      double u = rng.uniform01();
      double acc = 0.0;
      std::size_t to = c - 1;
      for (std::size_t j = 0; j < c; ++j) {
        acc += t(from, j);
        if (u < acc) {
          to = j;
          break;
        }
      }
      if (to != from) {
        bool a = out.labels(i, from), b = out.labels(i, to);
        out.labels.set(i, from, b);
        out.labels.set(i, to, a);
      }
    }
  }
  // the ledger marks cells whose final value differs from the clean labels;
  // a cell swapped twice back to its original value is not an inversion
  out.ledger.flip_mask = xor_cells(out.labels, labels);
  out.ledger.refresh_rates();
  return out;
}

double mixed_rate_for_target(double epsilon_target, double prevalence) {
  if (!(prevalence > 0.0 && prevalence <= 0.5))
    throw std::invalid_argument("mixed_rate_for_target: prevalence must be in (0, 0.5]");
  if (epsilon_target < 0.0)
    throw std::invalid_argument("mixed_rate_for_target: epsilon must be >= 0");
  double r = epsilon_target / (2.0 * prevalence);
  if (r > 1.0)
    throw std::invalid_argument("mixed_rate_for_target: target epsilon " +
                                std::to_string(epsilon_target) + " infeasible at prevalence " +
                                std::to_string(prevalence));
  return r;
}

void save_ledger(const NoiseLedger& ledger, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_ledger: cannot write '" + path.string() + "'");
  out << "strategy=" << ledger.strategy << "\n";
  out << "seed=" << ledger.seed << "\n";
  out << "rows=" << ledger.flip_mask.rows() << "\n";
  out << "cols=" << ledger.flip_mask.cols() << "\n";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", ledger.epsilon);
  out << "epsilon=" << buf << "\n";
  out << "epsilon_per_class=";
  for (std::size_t k = 0; k < ledger.epsilon_per_class.size(); ++k) {
    std::snprintf(buf, sizeof(buf), "%.17g", ledger.epsilon_per_class[k]);
    out << (k ? "," : "") << buf;
  }
  out << "\nmask\n";
  for (std::size_t i = 0; i < ledger.flip_mask.rows(); ++i) {
    for (std::size_t j = 0; j < ledger.flip_mask.cols(); ++j)
      out << char('0' + ledger.flip_mask(i, j));
    out << "\n";
  }
  if (!out) throw std::runtime_error("save_ledger: write failed for '" + path.string() + "'");
}

NoiseLedger load_ledger(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_ledger: cannot open '" + path.string() + "'");
  NoiseLedger ledger;
  std::size_t rows = 0, cols = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line == "mask") break;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("load_ledger: malformed header line '" + line + "'");
    std::string key = line.substr(0, eq), value = line.substr(eq + 1);
    if (key == "strategy")
      ledger.strategy = value;
    else if (key == "seed")
      ledger.seed = std::stoull(value);
    else if (key == "rows")
      rows = std::stoull(value);
    else if (key == "cols")
      cols = std::stoull(value);
    // epsilon lines are informative; rates are recomputed from the mask below
  }
  if (rows == 0 || cols == 0) throw std::runtime_error("load_ledger: missing rows/cols header");
  ledger.flip_mask = BinaryMatrix(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!std::getline(in, line) || line.size() < cols)
      throw std::runtime_error("load_ledger: truncated mask at row " + std::to_string(i));
    for (std::size_t j = 0; j < cols; ++j) {
      char ch = line[j];
      if (ch != '0' && ch != '1')
        throw std::runtime_error("load_ledger: invalid mask cell at row " + std::to_string(i) +
                                 ", col " + std::to_string(j));
      ledger.flip_mask.set(i, j, ch == '1');
    }
  }
  ledger.refresh_rates();
  return ledger;
}

std::filesystem::path ledger_path_for(const std::filesystem::path& dataset_path) {
  std::filesystem::path p = dataset_path;
  p.replace_extension(".ledger");
  return p;
}

}  // namespace noisylab
