#include "noisylab/refurbish.hpp"

#include <cmath>
#include <stdexcept>

namespace noisylab {

PredictionHistory::PredictionHistory(std::size_t instances, std::size_t classes,
                                     std::size_t window)
    : instances_(instances), classes_(classes), window_(window) {
  if (window == 0) throw std::invalid_argument("PredictionHistory: window must be >= 1");
  ring_.assign(instances * classes * window, 0);
}

void PredictionHistory::record_epoch(const Matrix& probs) {
  if (probs.rows() != instances_ || probs.cols() != classes_)
    throw std::invalid_argument("record_epoch: shape mismatch");
  const std::size_t slot = fill_ % window_;
  for (std::size_t i = 0; i < instances_; ++i)
    for (std::size_t c = 0; c < classes_; ++c)
      ring_[(i * classes_ + c) * window_ + slot] = probs(i, c) >= 0.5 ? 1 : 0;
  ++fill_;
}

std::size_t PredictionHistory::ones(std::size_t i, std::size_t c) const {
  const std::size_t have = std::min(fill_, window_);
  const std::uint8_t* cell = ring_.data() + (i * classes_ + c) * window_;
  std::size_t n = 0;
  for (std::size_t q = 0; q < have; ++q) n += cell[q];
  return n;
}

std::vector<std::uint8_t> PredictionHistory::cell_contents(std::size_t i, std::size_t c) const {
  const std::size_t have = std::min(fill_, window_);
  const std::uint8_t* cell = ring_.data() + (i * classes_ + c) * window_;
  std::vector<std::uint8_t> out(have);
  for (std::size_t q = 0; q < have; ++q) {
    // oldest entry sits at fill_ % window_ once the ring has wrapped
    const std::size_t slot = (fill_ >= window_) ? (fill_ + q) % window_ : q;
    out[q] = cell[slot];
  }
  return out;
}

double scaled_entropy_from_fraction(double ones_fraction) {
  const double p1 = ones_fraction, p0 = 1.0 - ones_fraction;
  auto plogp = [](double p) { return p > 0.0 ? p * std::log(p) : 0.0; };
  return (plogp(p0) + plogp(p1)) / std::log(0.5);
}

std::optional<double> scaled_entropy(const PredictionHistory& history, std::size_t i,
                                     std::size_t c) {
  if (!history.ready()) return std::nullopt;
  return scaled_entropy_from_fraction(double(history.ones(i, c)) / double(history.window()));
}

RefurbishDecisions RefurbishDecisions::none(std::size_t instances, std::size_t classes) {
  RefurbishDecisions d;
  d.refurbishable = BinaryMatrix(instances, classes);
  d.corrected = BinaryMatrix(instances, classes);
  d.entropy = Matrix(instances, classes);
  return d;
}

RefurbishDecisions decide(const PredictionHistory& history, double theta) {
  if (theta < 0.0 || theta > 1.0) throw std::invalid_argument("decide: theta must be in [0,1]");
  RefurbishDecisions out = RefurbishDecisions::none(history.instances(), history.classes());
  if (!history.ready()) return out;  // every cell non-refurbishable until the window fills
  out.ready = true;
  const std::size_t q = history.window();
  for (std::size_t i = 0; i < history.instances(); ++i)
    for (std::size_t c = 0; c < history.classes(); ++c) {
      const std::size_t ones = history.ones(i, c);
      const double h = scaled_entropy_from_fraction(double(ones) / double(q));
      out.entropy(i, c) = h;
      const bool tied = 2 * ones == q;
      if (!tied && h <= theta) {
        out.refurbishable.set(i, c, true);
        out.corrected.set(i, c, 2 * ones > q);
        ++out.refurbishable_count;
      }
    }
  return out;
}

namespace {

EffectiveBatch make_batch(std::size_t rows, std::size_t cols) {
  EffectiveBatch b;
  b.labels = BinaryMatrix(rows, cols);
  b.weights = Matrix(rows, cols, 0.0);
  b.sources.assign(rows * cols, LabelSource::excluded);
  return b;
}

void put(EffectiveBatch& b, std::size_t i, std::size_t c, bool label, LabelSource source) {
  b.labels.set(i, c, label);
  b.weights(i, c) = 1.0;
  b.sources[i * b.labels.cols() + c] = source;
  ++b.included;
  if (source == LabelSource::peer_corrected || source == LabelSource::joint_corrected)
    ++b.corrected;
}

void check_coverage(const RefurbishDecisions& dec_a, const RefurbishDecisions& dec_b,
                    const SelectionMask& sel_a, const SelectionMask& sel_b,
                    const BinaryMatrix& observed, std::span<const std::size_t> rows) {
  const std::size_t b = observed.rows(), c = observed.cols();
  if (rows.size() != b) throw std::invalid_argument("merge: row map does not cover the batch");
  if (sel_a.keep.rows() != b || sel_a.keep.cols() != c || sel_b.keep.rows() != b ||
      sel_b.keep.cols() != c)
    throw std::invalid_argument("merge: selection masks do not cover the batch");
  if (dec_a.refurbishable.cols() != c || dec_b.refurbishable.cols() != c)
    throw std::invalid_argument("merge: decision class count mismatch");
  for (std::size_t i : rows)
    if (i >= dec_a.refurbishable.rows() || i >= dec_b.refurbishable.rows())
      throw std::invalid_argument("merge: batch row outside decision coverage");
}

}  // namespace

MergeResult merge_jcc(const RefurbishDecisions& dec_a, const RefurbishDecisions& dec_b,
                      const SelectionMask& sel_a, const SelectionMask& sel_b,
                      const BinaryMatrix& observed, std::span<const std::size_t> rows) {
  check_coverage(dec_a, dec_b, sel_a, sel_b, observed, rows);
  const std::size_t b = observed.rows(), c = observed.cols();
  MergeResult out{make_batch(b, c), make_batch(b, c)};

  for (std::size_t i = 0; i < b; ++i) {
    const std::size_t r = rows[i];
    for (std::size_t k = 0; k < c; ++k) {
      const bool ra = dec_a.refurbishable(r, k), rb = dec_b.refurbishable(r, k);
      if (ra && rb) {
        // each network corrects the cell for its peer
        put(out.for_a, i, k, dec_b.corrected(r, k), LabelSource::peer_corrected);
        put(out.for_b, i, k, dec_a.corrected(r, k), LabelSource::peer_corrected);
      } else if (ra || rb) {
        // the single correction is applied for both networks
        const bool label = ra ? dec_a.corrected(r, k) : dec_b.corrected(r, k);
        put(out.for_a, i, k, label, LabelSource::joint_corrected);
        put(out.for_b, i, k, label, LabelSource::joint_corrected);
      } else {
        if (sel_b.keep(i, k)) put(out.for_a, i, k, observed(i, k), LabelSource::observed);
        if (sel_a.keep(i, k)) put(out.for_b, i, k, observed(i, k), LabelSource::observed);
      }
    }
  }
  return out;
}

MergeResult merge_coselfie(const RefurbishDecisions& dec_a, const RefurbishDecisions& dec_b,
                           const SelectionMask& sel_a, const SelectionMask& sel_b,
                           const BinaryMatrix& observed, std::span<const std::size_t> rows) {
  check_coverage(dec_a, dec_b, sel_a, sel_b, observed, rows);
  const std::size_t b = observed.rows(), c = observed.cols();
  MergeResult out{make_batch(b, c), make_batch(b, c)};

  // each network's batch is governed by its peer's decisions and selection
  auto fill = [&](EffectiveBatch& batch, const RefurbishDecisions& peer_dec,
                  const SelectionMask& peer_sel) {
    for (std::size_t i = 0; i < b; ++i) {
      const std::size_t r = rows[i];
      for (std::size_t k = 0; k < c; ++k) {
        if (peer_dec.refurbishable(r, k))
          put(batch, i, k, peer_dec.corrected(r, k), LabelSource::peer_corrected);
        else if (peer_sel.keep(i, k))
          put(batch, i, k, observed(i, k), LabelSource::observed);
      }
    }
  };
  fill(out.for_a, dec_b, sel_b);
  fill(out.for_b, dec_a, sel_a);
  return out;
}

}  // namespace noisylab
