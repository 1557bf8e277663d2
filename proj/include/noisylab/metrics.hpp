#pragma once

#include <optional>
#include <span>
#include <vector>

#include "noisylab/matrix.hpp"
#include "noisylab/noise.hpp"

namespace noisylab {

/// Average precision of one class ranking: mean of precision@k over the ranks
/// of the positives, scores sorted descending with ties broken by original
/// index ascending. Empty when the class has no positives (excluded from mAP
/// rather than scored 0).
std::optional<double> average_precision(std::span<const double> scores,
                                        std::span<const std::uint8_t> labels);

struct MapResult {
  double value = 0.0;
  std::size_t classes_used = 0;
  std::vector<std::size_t> excluded_classes;  // classes without positives
};

/// Unweighted mean of per-class AP over classes with at least one positive.
/// Throws when no class has positives.
MapResult mean_average_precision(const Matrix& scores, const BinaryMatrix& labels);

struct LabelPrResult {
  std::optional<double> precision;  // empty when nothing was kept
  double recall = 0.0;
};

/// Label precision = |kept and clean| / |kept|, label recall = |kept and clean|
/// / |clean|, where clean cells are the ledger's unflipped ones.
LabelPrResult label_pr(const BinaryMatrix& kept, const NoiseLedger& ledger);

/// Mean of the final k entries of a series.
double last_k_mean(std::span<const double> series, std::size_t k);

}  // namespace noisylab
