#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "noisylab/matrix.hpp"
#include "noisylab/selection.hpp"

namespace noisylab {

/// Per-(instance, class) ring buffer of the last Q thresholded predictions.
class PredictionHistory {
 public:
  PredictionHistory(std::size_t instances, std::size_t classes, std::size_t window);

  /// Thresholds probabilities at 0.5 (ties count as positive) and appends one
  /// epoch of predictions, evicting the oldest when the window is full.
  void record_epoch(const Matrix& probs);

  bool ready() const { return fill_ >= window_; }
  std::size_t window() const { return window_; }
  std::size_t fill() const { return fill_; }
  std::size_t instances() const { return instances_; }
  std::size_t classes() const { return classes_; }

  /// Count of positive predictions currently stored for a cell.
  std::size_t ones(std::size_t i, std::size_t c) const;

  /// Stored predictions oldest-to-newest (shorter than the window until full).
  std::vector<std::uint8_t> cell_contents(std::size_t i, std::size_t c) const;

 private:
  std::size_t instances_ = 0;
  std::size_t classes_ = 0;
  std::size_t window_ = 0;
  std::size_t fill_ = 0;  // epochs recorded so far (not capped)
  std::vector<std::uint8_t> ring_;  // [i][c][slot]
};

/// Scaled entropy of a binary prediction window:
///   H = (p0 log p0 + p1 log p1) / log(1/2), with 0 log 0 = 0.
/// 0 for a unanimous window, 1 for a balanced one.
double scaled_entropy_from_fraction(double ones_fraction);

/// Entropy of one history cell; empty until the buffer has a full window.
std::optional<double> scaled_entropy(const PredictionHistory& history, std::size_t i,
                                     std::size_t c);

/// Per-cell refurbishment verdicts for a whole label matrix.
struct RefurbishDecisions {
  bool ready = false;          // false until histories hold a full window
  BinaryMatrix refurbishable;  // H <= theta and an untied majority
  BinaryMatrix corrected;      // majority label; meaningful only where refurbishable
  Matrix entropy;              // H per cell; meaningful only when ready
  std::size_t refurbishable_count = 0;

  static RefurbishDecisions none(std::size_t instances, std::size_t classes);
};

/// Refurbishable iff the window is full, H <= theta, and the majority is
/// untied. A tied window has H = 1, so the tie rule only matters at theta = 1.
RefurbishDecisions decide(const PredictionHistory& history, double theta);

/// Where each effective-batch label came from.
enum class LabelSource : std::uint8_t {
  excluded = 0,
  observed = 1,        // kept by the peer's selection
  peer_corrected = 2,  // refurbishable by the peer (or by both, under JCC)
  joint_corrected = 3, // refurbishable by exactly one network, applied to both (JCC)
};

/// One network's training view of a batch after merging decisions.
struct EffectiveBatch {
  BinaryMatrix labels;  // B x C
  Matrix weights;       // B x C, 1 = train on the cell, 0 = exclude
  std::vector<LabelSource> sources;  // row-major B*C
  std::size_t included = 0;
  std::size_t corrected = 0;

  LabelSource source(std::size_t i, std::size_t c) const {
    return sources[i * labels.cols() + c];
  }
};

struct MergeResult {
  EffectiveBatch for_a;
  EffectiveBatch for_b;
};

/// Joint correction criterion. Per cell: refurbishable by both networks means
/// each trains on its peer's corrected label; refurbishable by exactly one
/// means that network's correction is applied to both; refurbishable by
/// neither falls back to Co-teaching cross-feeding of the observed label.
/// Refurbishability takes precedence over selection.
/// `rows` maps batch rows to decision-matrix rows.
MergeResult merge_jcc(const RefurbishDecisions& dec_a, const RefurbishDecisions& dec_b,
                      const SelectionMask& sel_a, const SelectionMask& sel_b,
                      const BinaryMatrix& observed, std::span<const std::size_t> rows);

/// Plain CoSELFIE merge (no JCC): each network's batch is governed entirely by
/// its peer's decisions — peer-refurbishable cells are corrected, peer-selected
/// cells keep the observed label, the rest are excluded.
MergeResult merge_coselfie(const RefurbishDecisions& dec_a, const RefurbishDecisions& dec_b,
                           const SelectionMask& sel_a, const SelectionMask& sel_b,
                           const BinaryMatrix& observed, std::span<const std::size_t> rows);

}  // namespace noisylab
