#include "noisylab/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace noisylab {

std::optional<double> average_precision(std::span<const double> scores,
                                        std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size())
    throw std::invalid_argument("average_precision: scores and labels differ in length");
  const std::size_t n = scores.size();
  std::size_t positives = 0;
  for (std::uint8_t y : labels) positives += y;
  if (positives == 0) return std::nullopt;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t rank = 0; rank < n; ++rank) {
    if (labels[order[rank]]) {
      ++hits;
      sum += double(hits) / double(rank + 1);
    }
  }
  return sum / double(positives);
}

MapResult mean_average_precision(const Matrix& scores, const BinaryMatrix& labels) {
  if (scores.rows() != labels.rows() || scores.cols() != labels.cols())
    throw std::invalid_argument("mean_average_precision: shape mismatch");
  const std::size_t n = scores.rows(), c = scores.cols();

  MapResult out;
  double sum = 0.0;
  std::vector<double> col_scores(n);
  std::vector<std::uint8_t> col_labels(n);
  for (std::size_t k = 0; k < c; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      col_scores[i] = scores(i, k);
      col_labels[i] = labels(i, k);
    }
    if (auto ap = average_precision(col_scores, col_labels)) {
      sum += *ap;
      ++out.classes_used;
    } else {
      out.excluded_classes.push_back(k);
    }
  }
  if (out.classes_used == 0)
    throw std::runtime_error("mean_average_precision: no class has a positive label");
  out.value = sum / double(out.classes_used);
  return out;
}

LabelPrResult label_pr(const BinaryMatrix& kept, const NoiseLedger& ledger) {
  if (kept.rows() != ledger.flip_mask.rows() || kept.cols() != ledger.flip_mask.cols())
    throw std::invalid_argument("label_pr: mask and ledger cover different cells");
  std::size_t n_kept = 0, n_clean = 0, n_kept_clean = 0;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const bool is_kept = kept.data()[i] != 0;
    const bool is_clean = ledger.flip_mask.data()[i] == 0;
    n_kept += is_kept;
    n_clean += is_clean;
    n_kept_clean += is_kept && is_clean;
  }
  LabelPrResult out;
  if (n_kept > 0) out.precision = double(n_kept_clean) / double(n_kept);
  out.recall = n_clean > 0 ? double(n_kept_clean) / double(n_clean) : 0.0;
  return out;
}

double last_k_mean(std::span<const double> series, std::size_t k) {
  if (k == 0) throw std::invalid_argument("last_k_mean: k must be >= 1");
  if (series.size() < k)
    throw std::invalid_argument("last_k_mean: series has " + std::to_string(series.size()) +
                                " entries, need " + std::to_string(k));
  double sum = 0.0;
  for (std::size_t i = series.size() - k; i < series.size(); ++i) sum += series[i];
  return sum / double(k);
}

}  // namespace noisylab
