#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <set>
#include <unistd.h>

#include "noisylab/noise.hpp"
#include "noisylab/rng.hpp"

using namespace noisylab;

namespace {

BinaryMatrix random_labels(std::size_t n, std::size_t c, double prevalence, std::uint64_t seed) {
  Rng rng(seed);
  BinaryMatrix labels(n, c);
  for (std::size_t i = 0; i < labels.size(); ++i)
    labels.data()[i] = rng.uniform01() < prevalence ? 1 : 0;
  return labels;
}

}  // namespace

TEST_CASE("inject_uniform flips exactly the requested number of cells") {
  SUBCASE("epsilon 0 is the identity") {
    const BinaryMatrix labels = random_labels(20, 5, 0.2, 1);
    const NoisyLabels out = inject_uniform(labels, 0.0, 7);
    CHECK(out.labels == labels);
    CHECK(out.ledger.flip_mask.count() == 0);
    CHECK(out.ledger.epsilon == 0.0);
  }
  SUBCASE("epsilon 1 inverts every cell") {
    const BinaryMatrix labels = random_labels(13, 4, 0.3, 2);
    const NoisyLabels out = inject_uniform(labels, 1.0, 7);
    CHECK(out.ledger.flip_mask.count() == labels.size());
    CHECK(out.ledger.epsilon == 1.0);
    for (std::size_t i = 0; i < labels.size(); ++i)
      CHECK(out.labels.data()[i] == (labels.data()[i] ^ 1));
  }
  SUBCASE("10x10 at epsilon 0.2 flips exactly 20 cells") {
    const BinaryMatrix labels = random_labels(10, 10, 0.2, 3);
    const NoisyLabels out = inject_uniform(labels, 0.2, 7);
    // popcount oracle on the mask
    std::size_t flips = 0;
    for (std::size_t i = 0; i < out.ledger.flip_mask.size(); ++i)
      flips += out.ledger.flip_mask.data()[i];
    CHECK(flips == 20);
    CHECK(out.ledger.epsilon == doctest::Approx(0.2));
  }
}

TEST_CASE("xor ledger identity reconstructs the clean labels for every injector") {
  Rng meta(42);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 5 + meta.below(40), c = 2 + meta.below(8);
    const BinaryMatrix clean = random_labels(n, c, 0.3, 100 + trial);

    // honor the mixed-noise precondition: enough negatives in every class
    bool mixed_feasible = true;
    for (std::size_t k = 0; k < c; ++k) {
      const std::size_t pos = clean.count_col(k);
      if (n - pos < std::size_t(0.4 * double(pos))) mixed_feasible = false;
    }

    std::vector<NoisyLabels> outs;
    outs.push_back(inject_uniform(clean, 0.15, trial));
    if (mixed_feasible) outs.push_back(inject_mixed(clean, 0.4, trial));
    Matrix t(c, c, 0.0);
    for (std::size_t i = 0; i < c; ++i) {
      t(i, i) = 0.7;
      t(i, (i + 1) % c) = 0.3;
    }
    outs.push_back(inject_transition(clean, TransitionMatrix(t), trial));

    for (const NoisyLabels& out : outs) {
      CHECK(xor_cells(out.labels, out.ledger.flip_mask) == clean);
      // rates always recomputed from the mask
      double per_class_sum = 0.0;
      for (double e : out.ledger.epsilon_per_class) per_class_sum += e;
      CHECK(out.ledger.epsilon == doctest::Approx(per_class_sum / double(c)).epsilon(1e-12));
    }
  }
}

TEST_CASE("mixed noise at r=0.5 lands near twice-prevalence epsilon") {
  SUBCASE("prevalence 0.20") {
    const BinaryMatrix labels = random_labels(2000, 10, 0.20, 5);
    const NoisyLabels out = inject_mixed(labels, 0.5, 9);
    CHECK(out.ledger.epsilon == doctest::Approx(0.20).epsilon(0.05));
  }
  SUBCASE("prevalence 0.125") {
    const BinaryMatrix labels = random_labels(2000, 10, 0.125, 6);
    const NoisyLabels out = inject_mixed(labels, 0.5, 9);
    CHECK(out.ledger.epsilon == doctest::Approx(0.125).epsilon(0.05));
  }
}

TEST_CASE("mixed noise on a 4x1 column picks one of the four valid outcomes") {
  const BinaryMatrix clean = BinaryMatrix::from_rows({{1}, {1}, {0}, {0}});
  std::set<std::vector<int>> seen;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const NoisyLabels out = inject_mixed(clean, 0.5, seed);
    // exactly one positive flipped down and one negative flipped up
    int down = 0, up = 0;
    for (std::size_t i = 0; i < 4; ++i) {
      if (clean(i, 0) && !out.labels(i, 0)) ++down;
      if (!clean(i, 0) && out.labels(i, 0)) ++up;
    }
    CHECK(down == 1);
    CHECK(up == 1);
    CHECK(out.labels.count_col(0) == 2);  // positive count preserved
    seen.insert({out.labels(0, 0), out.labels(1, 0), out.labels(2, 0), out.labels(3, 0)});
  }
  // all observed outcomes lie in the enumerated valid set
  const std::set<std::vector<int>> valid = {
      {0, 1, 1, 0}, {0, 1, 0, 1}, {1, 0, 1, 0}, {1, 0, 0, 1}};
  for (const auto& outcome : seen) CHECK(valid.count(outcome) == 1);
  CHECK(seen.size() >= 2);  // the draw actually varies with the seed
}

TEST_CASE("mixed noise preserves per-class positive counts exactly") {
  Rng meta(11);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 20 + meta.below(100), c = 1 + meta.below(6);
    const BinaryMatrix clean = random_labels(n, c, 0.25, 200 + trial);
    const NoisyLabels out = inject_mixed(clean, 0.5, trial);
    for (std::size_t k = 0; k < c; ++k) CHECK(out.labels.count_col(k) == clean.count_col(k));
  }
}

TEST_CASE("mixed noise reports the class lacking negatives") {
  // class 0: 3 positives, 1 negative; r=1 needs 3 negatives
  const BinaryMatrix labels = BinaryMatrix::from_rows({{1}, {1}, {1}, {0}});
  CHECK_THROWS_WITH_AS(inject_mixed(labels, 1.0, 1), doctest::Contains("class 0"),
                       std::invalid_argument);
}

TEST_CASE("transition noise") {
  SUBCASE("identity matrix is a no-op") {
    const BinaryMatrix labels = random_labels(50, 4, 0.3, 8);
    const NoisyLabels out = inject_transition(labels, TransitionMatrix::identity(4), 3);
    CHECK(out.labels == labels);
    CHECK(out.ledger.epsilon == 0.0);
  }
  SUBCASE("forced swap moves the label across classes") {
    const BinaryMatrix labels = BinaryMatrix::from_rows({{1, 0}});
    Matrix t = Matrix::from_rows({{0.0, 1.0}, {0.0, 1.0}});
    const NoisyLabels out = inject_transition(labels, TransitionMatrix(t), 3);
    CHECK(out.labels(0, 0) == 0);
    CHECK(out.labels(0, 1) == 1);
    CHECK(out.labels.count_row(0) == 1);
  }
  SUBCASE("per-instance label sums preserved on 1000 instances") {
    const std::size_t c = 6;
    const BinaryMatrix labels = random_labels(1000, c, 0.2, 9);
    Rng rng(17);
    Matrix t(c, c);
    for (std::size_t i = 0; i < c; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < c; ++j) {
        t(i, j) = rng.uniform01();
        sum += t(i, j);
      }
      for (std::size_t j = 0; j < c; ++j) t(i, j) /= sum;
    }
    const NoisyLabels out = inject_transition(labels, TransitionMatrix(t), 21);
    for (std::size_t i = 0; i < labels.rows(); ++i)
      CHECK(out.labels.count_row(i) == labels.count_row(i));
    CHECK(out.ledger.epsilon > 0.0);  // something actually moved
  }
  SUBCASE("rows must be stochastic") {
    Matrix bad = Matrix::from_rows({{0.5, 0.4}, {0.0, 1.0}});
    CHECK_THROWS_AS(TransitionMatrix(std::move(bad)), std::invalid_argument);
  }
}

TEST_CASE("mixed_rate_for_target converts the noise conventions") {
  CHECK(mixed_rate_for_target(0.2, 0.20) == doctest::Approx(0.5));
  CHECK(mixed_rate_for_target(0.125, 0.125) == doctest::Approx(0.5));
  CHECK(mixed_rate_for_target(0.0, 0.3) == 0.0);
  CHECK_THROWS_AS(mixed_rate_for_target(0.5, 0.2), std::invalid_argument);   // r would be 1.25
  CHECK_THROWS_AS(mixed_rate_for_target(0.1, 0.0), std::invalid_argument);   // no positives
  CHECK_THROWS_AS(mixed_rate_for_target(0.1, 0.7), std::invalid_argument);   // prevalence > 0.5
}

TEST_CASE("uniform noise on sparse labels is mostly additive") {
  const BinaryMatrix labels = random_labels(200, 10, 0.2, 12);
  const NoisyLabels out = inject_uniform(labels, 0.3, 99);
  std::size_t additive = 0, subtractive = 0;
  for (std::size_t i = 0; i < labels.rows(); ++i)
    for (std::size_t k = 0; k < labels.cols(); ++k)
      if (out.ledger.flip_mask(i, k)) {
        if (labels(i, k))
          ++subtractive;
        else
          ++additive;
      }
  CHECK(additive + subtractive == out.ledger.flip_mask.count());
  CHECK(additive >= subtractive);
}

TEST_CASE("ledger sidecar round-trips") {
  namespace fs = std::filesystem;
  const fs::path dir =
      fs::temp_directory_path() / ("noisylab_ledger_" + std::to_string(::getpid()));
  fs::create_directories(dir);

  const BinaryMatrix labels = random_labels(25, 7, 0.25, 31);
  const NoisyLabels out = inject_mixed(labels, 0.5, 4);
  const fs::path path = ledger_path_for(dir / "noisy.csv");
  CHECK(path.filename() == "noisy.ledger");
  save_ledger(out.ledger, path);
  const NoiseLedger back = load_ledger(path);

  CHECK(back.flip_mask == out.ledger.flip_mask);
  CHECK(back.strategy == out.ledger.strategy);
  CHECK(back.seed == out.ledger.seed);
  CHECK(back.epsilon == doctest::Approx(out.ledger.epsilon).epsilon(1e-15));
  CHECK(xor_cells(out.labels, back.flip_mask) == labels);
  fs::remove_all(dir);
}
