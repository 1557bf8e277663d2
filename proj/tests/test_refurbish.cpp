#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "noisylab/refurbish.hpp"
#include "noisylab/rng.hpp"

using namespace noisylab;

namespace {

// records one epoch where cell (i,c) predicts bits[i][c]
void record_bits(PredictionHistory& h, const std::vector<std::vector<int>>& bits) {
  Matrix probs(h.instances(), h.classes());
  for (std::size_t i = 0; i < h.instances(); ++i)
    for (std::size_t c = 0; c < h.classes(); ++c) probs(i, c) = bits[i][c] ? 0.9 : 0.1;
  h.record_epoch(probs);
}

PredictionHistory single_cell_history(const std::vector<int>& bits, std::size_t window) {
  PredictionHistory h(1, 1, window);
  for (int b : bits) record_bits(h, {{b}});
  return h;
}

}  // namespace

TEST_CASE("record_epoch thresholds at 0.5 with ties counting as positive") {
  PredictionHistory h(1, 2, 3);
  Matrix probs(1, 2);
  probs(0, 0) = 0.5;       // boundary: recorded as 1
  probs(0, 1) = 0.499999;  // below: recorded as 0
  h.record_epoch(probs);
  CHECK(h.ones(0, 0) == 1);
  CHECK(h.ones(0, 1) == 0);
}

TEST_CASE("ring keeps exactly the last Q predictions") {
  const std::size_t q = 5;
  PredictionHistory h = single_cell_history({1, 1, 1, 0, 0, 0, 1, 0}, q);  // Q+3 epochs
  CHECK(h.ready());
  const auto contents = h.cell_contents(0, 0);
  CHECK(contents == std::vector<std::uint8_t>{0, 0, 0, 1, 0});  // the final five
}

TEST_CASE("history contents match a naive list-slice reference over 50 epochs") {
  const std::size_t q = 7, n = 3, c = 2;
  PredictionHistory h(n, c, q);
  std::vector<std::vector<std::vector<int>>> naive(n, std::vector<std::vector<int>>(c));
  Rng rng(42);
  for (int epoch = 0; epoch < 50; ++epoch) {
    std::vector<std::vector<int>> bits(n, std::vector<int>(c));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < c; ++k) {
        bits[i][k] = rng.uniform01() < 0.5 ? 1 : 0;
        naive[i][k].push_back(bits[i][k]);
      }
    record_bits(h, bits);

    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < c; ++k) {
        const auto& all = naive[i][k];
        const std::size_t have = std::min(all.size(), q);
        std::vector<std::uint8_t> expect(all.end() - std::ptrdiff_t(have), all.end());
        CHECK(h.cell_contents(i, k) == expect);
      }
  }
}

TEST_CASE("scaled entropy values") {
  SUBCASE("unanimous window has zero entropy") {
    PredictionHistory h = single_cell_history({1, 1, 1, 1}, 4);
    CHECK(*scaled_entropy(h, 0, 0) == 0.0);
    PredictionHistory h0 = single_cell_history({0, 0, 0, 0}, 4);
    CHECK(*scaled_entropy(h0, 0, 0) == 0.0);
  }
  SUBCASE("balanced window is maximal") {
    PredictionHistory h = single_cell_history({1, 0, 1, 0}, 4);
    CHECK(*scaled_entropy(h, 0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("hand-evaluated 3-of-4 window") {
    PredictionHistory h = single_cell_history({1, 1, 1, 0}, 4);
    // (0.75 ln 0.75 + 0.25 ln 0.25) / ln 0.5
    CHECK(*scaled_entropy(h, 0, 0) == doctest::Approx(0.8113).epsilon(1e-4));
  }
  SUBCASE("not ready until the window fills") {
    PredictionHistory h = single_cell_history({1, 1}, 4);
    CHECK(!scaled_entropy(h, 0, 0).has_value());
  }
  SUBCASE("symmetric in the two outcomes, maximal only at balance") {
    const std::size_t q = 10;
    for (std::size_t ones = 0; ones <= q; ++ones) {
      const double h1 = scaled_entropy_from_fraction(double(ones) / double(q));
      const double h2 = scaled_entropy_from_fraction(double(q - ones) / double(q));
      CHECK(h1 == doctest::Approx(h2).epsilon(1e-12));
      CHECK(h1 >= 0.0);
      CHECK(h1 <= 1.0 + 1e-15);
      if (2 * ones != q) CHECK(h1 < 1.0);
    }
    CHECK(scaled_entropy_from_fraction(0.5) == doctest::Approx(1.0));
  }
}

TEST_CASE("decide marks consistent cells refurbishable") {
  SUBCASE("unanimous zeros are refurbishable with corrected label 0") {
    PredictionHistory h = single_cell_history({0, 0, 0, 0}, 4);
    const RefurbishDecisions d = decide(h, 0.05);
    CHECK(d.ready);
    CHECK(d.refurbishable(0, 0) == 1);
    CHECK(d.corrected(0, 0) == 0);
    CHECK(d.refurbishable_count == 1);
  }
  SUBCASE("a 3-of-4 window is not refurbishable at theta 0.05") {
    PredictionHistory h = single_cell_history({1, 1, 1, 0}, 4);
    const RefurbishDecisions d = decide(h, 0.05);
    CHECK(d.refurbishable(0, 0) == 0);
  }
  SUBCASE("theta 1 accepts every ready untied cell") {
    PredictionHistory h = single_cell_history({1, 1, 1, 0, 0}, 5);  // odd window: no ties
    const RefurbishDecisions d = decide(h, 1.0);
    CHECK(d.refurbishable(0, 0) == 1);
    CHECK(d.corrected(0, 0) == 1);  // majority 3 of 5
  }
  SUBCASE("a tied window is never refurbishable") {
    PredictionHistory h = single_cell_history({1, 0, 1, 0}, 4);
    CHECK(decide(h, 1.0).refurbishable(0, 0) == 0);
  }
  SUBCASE("nothing is refurbishable before the window fills") {
    PredictionHistory h = single_cell_history({0, 0}, 4);
    const RefurbishDecisions d = decide(h, 1.0);
    CHECK(!d.ready);
    CHECK(d.refurbishable_count == 0);
  }
}

TEST_CASE("raising theta never shrinks the refurbishable set") {
  Rng rng(7);
  const std::size_t n = 30, c = 4, q = 10;
  PredictionHistory h(n, c, q);
  for (std::size_t epoch = 0; epoch < q; ++epoch) {
    std::vector<std::vector<int>> bits(n, std::vector<int>(c));
    for (auto& row : bits)
      for (auto& b : row) b = rng.uniform01() < 0.5 ? 1 : 0;
    record_bits(h, bits);
  }
  std::size_t prev = 0;
  for (double theta : {0.0, 0.1, 0.3, 0.5, 0.8, 1.0}) {
    const RefurbishDecisions d = decide(h, theta);
    CHECK(d.refurbishable_count >= prev);
    prev = d.refurbishable_count;
  }
}

namespace {

struct MergeFixture {
  RefurbishDecisions dec_a, dec_b;
  SelectionMask sel_a, sel_b;
  BinaryMatrix observed;
  std::vector<std::size_t> rows;

  MergeFixture(std::size_t cells)
      : dec_a(RefurbishDecisions::none(cells, 1)), dec_b(RefurbishDecisions::none(cells, 1)) {
    dec_a.ready = dec_b.ready = true;
    sel_a.keep = BinaryMatrix(cells, 1);
    sel_a.losses = Matrix(cells, 1);
    sel_b.keep = BinaryMatrix(cells, 1);
    sel_b.losses = Matrix(cells, 1);
    observed = BinaryMatrix(cells, 1);
    for (std::size_t i = 0; i < cells; ++i) rows.push_back(i);
  }
};

}  // namespace

TEST_CASE("jcc_merge case analysis") {
  SUBCASE("both refurbishable: each network trains on its peer's correction") {
    MergeFixture f(1);
    f.dec_a.refurbishable.set(0, 0, true);
    f.dec_a.corrected.set(0, 0, false);
    f.dec_b.refurbishable.set(0, 0, true);
    f.dec_b.corrected.set(0, 0, true);
    const MergeResult m = merge_jcc(f.dec_a, f.dec_b, f.sel_a, f.sel_b, f.observed, f.rows);
    CHECK(m.for_a.labels(0, 0) == 1);  // B's correction
    CHECK(m.for_b.labels(0, 0) == 0);  // A's correction
    CHECK(m.for_a.weights(0, 0) == 1.0);
    CHECK(m.for_b.weights(0, 0) == 1.0);
    CHECK(m.for_a.source(0, 0) == LabelSource::peer_corrected);
  }
  SUBCASE("agreeing corrections land on both networks") {
    MergeFixture f(1);
    f.dec_a.refurbishable.set(0, 0, true);
    f.dec_a.corrected.set(0, 0, true);
    f.dec_b.refurbishable.set(0, 0, true);
    f.dec_b.corrected.set(0, 0, true);
    const MergeResult m = merge_jcc(f.dec_a, f.dec_b, f.sel_a, f.sel_b, f.observed, f.rows);
    CHECK(m.for_a.labels(0, 0) == 1);
    CHECK(m.for_b.labels(0, 0) == 1);
  }
  SUBCASE("one-sided correction is applied for both networks") {
    MergeFixture f(1);
    f.dec_a.refurbishable.set(0, 0, true);
    f.dec_a.corrected.set(0, 0, true);  // A corrects to 1, observed is 0
    const MergeResult m = merge_jcc(f.dec_a, f.dec_b, f.sel_a, f.sel_b, f.observed, f.rows);
    CHECK(m.for_a.labels(0, 0) == 1);
    CHECK(m.for_b.labels(0, 0) == 1);
    CHECK(m.for_a.weights(0, 0) == 1.0);
    CHECK(m.for_b.weights(0, 0) == 1.0);
    CHECK(m.for_a.source(0, 0) == LabelSource::joint_corrected);
    CHECK(m.for_b.source(0, 0) == LabelSource::joint_corrected);
  }
  SUBCASE("refurbishability beats selection") {
    MergeFixture f(1);
    f.dec_b.refurbishable.set(0, 0, true);
    f.dec_b.corrected.set(0, 0, true);
    // neither selection kept the cell; the correction still lands
    const MergeResult m = merge_jcc(f.dec_a, f.dec_b, f.sel_a, f.sel_b, f.observed, f.rows);
    CHECK(m.for_a.weights(0, 0) == 1.0);
    CHECK(m.for_b.weights(0, 0) == 1.0);
  }
  SUBCASE("non-refurbishable cells cross-feed through the 2x2 selection cases") {
    // cells: (kept by A, kept by B) = (0,0), (0,1), (1,0), (1,1)
    MergeFixture f(4);
    f.sel_a.keep.set(2, 0, true);
    f.sel_a.keep.set(3, 0, true);
    f.sel_b.keep.set(1, 0, true);
    f.sel_b.keep.set(3, 0, true);
    for (std::size_t i = 0; i < 4; ++i) f.observed.set(i, 0, true);
    const MergeResult m = merge_jcc(f.dec_a, f.dec_b, f.sel_a, f.sel_b, f.observed, f.rows);
    // A trains on what B kept, B on what A kept
    CHECK(m.for_a.weights(0, 0) == 0.0);
    CHECK(m.for_b.weights(0, 0) == 0.0);
    CHECK(m.for_a.weights(1, 0) == 1.0);  // B kept it, feeds A
    CHECK(m.for_b.weights(1, 0) == 0.0);
    CHECK(m.for_a.weights(2, 0) == 0.0);
    CHECK(m.for_b.weights(2, 0) == 1.0);  // A kept it, feeds B
    CHECK(m.for_a.weights(3, 0) == 1.0);
    CHECK(m.for_b.weights(3, 0) == 1.0);
    for (std::size_t i = 1; i < 4; ++i) {
      if (m.for_a.weights(i, 0) > 0) {
        CHECK(m.for_a.labels(i, 0) == 1);  // observed label
        CHECK(m.for_a.source(i, 0) == LabelSource::observed);
      }
    }
  }
  SUBCASE("coverage mismatch is rejected") {
    MergeFixture f(2);
    const std::vector<std::size_t> short_rows = {0};
    CHECK_THROWS_AS(merge_jcc(f.dec_a, f.dec_b, f.sel_a, f.sel_b, f.observed, short_rows),
                    std::invalid_argument);
  }
}

TEST_CASE("coselfie merge follows the peer's decisions only") {
  MergeFixture f(3);
  // cell 0: refurbishable by B only; cell 1: kept by B only; cell 2: nothing
  f.dec_b.refurbishable.set(0, 0, true);
  f.dec_b.corrected.set(0, 0, true);
  f.sel_b.keep.set(1, 0, true);
  const MergeResult m = merge_coselfie(f.dec_a, f.dec_b, f.sel_a, f.sel_b, f.observed, f.rows);

  // network A is driven by B's verdicts
  CHECK(m.for_a.weights(0, 0) == 1.0);
  CHECK(m.for_a.labels(0, 0) == 1);
  CHECK(m.for_a.source(0, 0) == LabelSource::peer_corrected);
  CHECK(m.for_a.weights(1, 0) == 1.0);
  CHECK(m.for_a.source(1, 0) == LabelSource::observed);
  CHECK(m.for_a.weights(2, 0) == 0.0);
  // network B saw nothing from A: everything excluded
  CHECK(m.for_b.included == 0);
  // without JCC, B's refurbishable set does not reach network B itself
  CHECK(m.for_b.weights(0, 0) == 0.0);
}

TEST_CASE("jcc refurbishable coverage is the union of the per-network sets") {
  Rng rng(11);
  const std::size_t n = 40;
  MergeFixture f(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rng.uniform01() < 0.3) {
      f.dec_a.refurbishable.set(i, 0, true);
      f.dec_a.corrected.set(i, 0, rng.uniform01() < 0.5);
    }
    if (rng.uniform01() < 0.3) {
      f.dec_b.refurbishable.set(i, 0, true);
      f.dec_b.corrected.set(i, 0, rng.uniform01() < 0.5);
    }
  }
  const MergeResult jcc = merge_jcc(f.dec_a, f.dec_b, f.sel_a, f.sel_b, f.observed, f.rows);
  const MergeResult cos = merge_coselfie(f.dec_a, f.dec_b, f.sel_a, f.sel_b, f.observed, f.rows);

  for (std::size_t i = 0; i < n; ++i) {
    const bool ra = f.dec_a.refurbishable(i, 0), rb = f.dec_b.refurbishable(i, 0);
    // JCC corrects exactly the union, for both networks
    const bool jcc_corrected_a = jcc.for_a.source(i, 0) == LabelSource::peer_corrected ||
                                 jcc.for_a.source(i, 0) == LabelSource::joint_corrected;
    CHECK(jcc_corrected_a == (ra || rb));
    // plain CoSELFIE corrects per network: A sees only B's set
    const bool cos_corrected_a = cos.for_a.source(i, 0) == LabelSource::peer_corrected;
    CHECK(cos_corrected_a == rb);
    const bool cos_corrected_b = cos.for_b.source(i, 0) == LabelSource::peer_corrected;
    CHECK(cos_corrected_b == ra);
  }
}

TEST_CASE("every included cell carries exactly one label source") {
  Rng rng(13);
  const std::size_t n = 60;
  MergeFixture f(n);
  for (std::size_t i = 0; i < n; ++i) {
    f.observed.set(i, 0, rng.uniform01() < 0.3);
    if (rng.uniform01() < 0.25) {
      f.dec_a.refurbishable.set(i, 0, true);
      f.dec_a.corrected.set(i, 0, rng.uniform01() < 0.5);
    }
    if (rng.uniform01() < 0.25) {
      f.dec_b.refurbishable.set(i, 0, true);
      f.dec_b.corrected.set(i, 0, rng.uniform01() < 0.5);
    }
    f.sel_a.keep.set(i, 0, rng.uniform01() < 0.7);
    f.sel_b.keep.set(i, 0, rng.uniform01() < 0.7);
  }
  for (const MergeResult& m :
       {merge_jcc(f.dec_a, f.dec_b, f.sel_a, f.sel_b, f.observed, f.rows),
        merge_coselfie(f.dec_a, f.dec_b, f.sel_a, f.sel_b, f.observed, f.rows)}) {
    for (const EffectiveBatch* batch : {&m.for_a, &m.for_b}) {
      std::size_t included = 0, corrected = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const LabelSource src = batch->source(i, 0);
        const bool in = batch->weights(i, 0) > 0.0;
        CHECK(in == (src != LabelSource::excluded));
        included += in;
        corrected += src == LabelSource::peer_corrected || src == LabelSource::joint_corrected;
      }
      CHECK(batch->included == included);
      CHECK(batch->corrected == corrected);
    }
  }
}
