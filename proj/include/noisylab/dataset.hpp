#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "noisylab/matrix.hpp"

namespace noisylab {

/// A multi-label dataset: N instances with d real-valued features and C binary labels.
/// Immutable by convention once built; everything downstream treats it as shared state.
struct MultiLabelDataset {
  Matrix features;                       // N x d
  BinaryMatrix labels;                   // N x C
  std::vector<std::string> ids;          // unique, |ids| = N
  std::vector<std::string> class_names;  // C names

  std::size_t size() const { return features.rows(); }
  std::size_t feature_dim() const { return features.cols(); }
  std::size_t num_classes() const { return labels.cols(); }

  /// Throws std::invalid_argument when any structural invariant is violated.
  void validate() const;
};

/// Recipe for a synthetic dataset drawn from a linear latent model.
struct SynthSpec {
  std::size_t instances = 0;
  std::size_t feature_dim = 0;
  std::size_t classes = 0;
  double target_prevalence = 0.2;  // in (0,1)
  double class_correlation = 0.0;  // in [0,1); shared-direction weight between class scores
  std::uint64_t seed = 0;
};

struct SplitRatios {
  double train = 0.7;
  double val = 0.1;
  double test = 0.2;
};

struct DatasetSplit {
  MultiLabelDataset train;
  MultiLabelDataset val;
  MultiLabelDataset test;
};

struct PrevalenceStats {
  std::vector<double> per_class;  // positives_c / N
  double overall = 0.0;           // total positives / (N*C)
};

/// Loads the self-describing CSV format (header: id,f:0..f:{d-1},y:<name>..).
/// Errors name the offending row and column.
MultiLabelDataset load_csv(const std::filesystem::path& path);

/// Writes the same format back; floats are printed with round-trip precision
/// so save(load(f)) is stable byte-for-byte.
void save_csv(const MultiLabelDataset& ds, const std::filesystem::path& path);

/// Deterministic synthetic generator. Labels come from per-class linear scores
/// of the features; per-class thresholds are calibrated by bisection so realized
/// prevalence lands within two percentage points of the target.
MultiLabelDataset synth_generate(const SynthSpec& spec);

/// Exact, leakage-free partition. Sizes follow the largest-remainder rule;
/// an empty part is an error.
DatasetSplit split(const MultiLabelDataset& ds, const SplitRatios& ratios, std::uint64_t seed);

PrevalenceStats prevalence(const BinaryMatrix& labels);

}  // namespace noisylab
