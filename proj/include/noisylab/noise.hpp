#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "noisylab/matrix.hpp"

namespace noisylab {

/// Oracle record of an injection: which cells were genuinely inverted.
/// epsilon and epsilon_per_class are always recomputed from flip_mask, never
/// taken from the request, so reported noise levels follow one convention.
struct NoiseLedger {
  BinaryMatrix flip_mask;                // 1 = cell differs from the clean labels
  double epsilon = 0.0;                  // sum(flip_mask) / (N*C)
  std::vector<double> epsilon_per_class; // column sums / N
  std::string strategy;
  std::uint64_t seed = 0;

  /// Recomputes epsilon and epsilon_per_class from flip_mask.
  void refresh_rates();
};

struct NoisyLabels {
  BinaryMatrix labels;
  NoiseLedger ledger;
};

/// C x C row-stochastic matrix of per-class swap probabilities.
class TransitionMatrix {
 public:
  explicit TransitionMatrix(Matrix probs);
  static TransitionMatrix identity(std::size_t classes);

  std::size_t classes() const { return probs_.rows(); }
  double operator()(std::size_t from, std::size_t to) const { return probs_(from, to); }
  const Matrix& probs() const { return probs_; }

 private:
  Matrix probs_;
};

/// Inverts exactly round(epsilon_req * N * C) distinct cells chosen uniformly
/// without replacement.
NoisyLabels inject_uniform(const BinaryMatrix& labels, double epsilon_req, std::uint64_t seed);

/// Per class: flips floor(r * positives) positives down and the same count of
/// negatives up, preserving the per-class positive count.
NoisyLabels inject_mixed(const BinaryMatrix& labels, double positive_rate, std::uint64_t seed);

/// Per (instance, class) in ascending class order: one categorical draw from
/// row c of T decides a within-instance swap partner. Per-instance label sums
/// are preserved.
NoisyLabels inject_transition(const BinaryMatrix& labels, const TransitionMatrix& t,
                              std::uint64_t seed);

/// Converts a genuinely-inverted-cells target into the mixed-noise rate
/// parameter: r = epsilon_target / (2 * prevalence).
double mixed_rate_for_target(double epsilon_target, double prevalence);

/// Sidecar serialization: key=value header, then flip_mask as 0/1 rows.
void save_ledger(const NoiseLedger& ledger, const std::filesystem::path& path);
NoiseLedger load_ledger(const std::filesystem::path& path);

/// Sidecar path convention: same basename with a .ledger suffix.
std::filesystem::path ledger_path_for(const std::filesystem::path& dataset_path);

}  // namespace noisylab
