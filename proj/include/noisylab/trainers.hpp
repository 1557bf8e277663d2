#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "noisylab/dataset.hpp"
#include "noisylab/model.hpp"
#include "noisylab/noise.hpp"

namespace noisylab {

enum class TrainerBase { baseline, cheater, coteaching, coselfie };

/// Training policy: a base plus the two MHSS switches. mhss is
/// coselfie + cdnr + jcc; the intermediate combinations cover the ablations.
struct TrainerKind {
  TrainerBase base = TrainerBase::baseline;
  bool cdnr = false;
  bool jcc = false;

  bool dual() const { return base == TrainerBase::coteaching || base == TrainerBase::coselfie; }
  bool selecting() const { return dual(); }
  bool correcting() const { return base == TrainerBase::coselfie; }

  bool operator==(const TrainerKind&) const = default;
};

/// Accepts "baseline", "cheater", "coteaching", "coselfie", "mhss", with
/// optional "+cdnr" / "+jcc" suffixes (e.g. "coselfie+cdnr").
TrainerKind parse_trainer_kind(const std::string& token);
std::string to_string(const TrainerKind& kind);

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch = 64;
  double max_lr = 1e-3;
  double warmup_fraction = 0.3;
  std::size_t hidden = 64;
  AslConfig asl;
  double alpha = 1.0;              // forget-rate factor
  double theta = 0.05;             // refurbishment entropy threshold
  std::size_t history_window = 10; // Q
  std::size_t ramp_epochs = 10;    // T_k
  std::uint64_t seed = 1;
  // Noise rates for the schedule when no ledger is available (real noise is
  // not self-reporting); a ledger, when present, always wins.
  std::optional<double> epsilon_override;
  std::vector<double> epsilon_per_class_override;
};

struct EpochStats {
  std::size_t epoch = 0;
  std::vector<double> train_loss;  // per network, mean per-cell loss vs observed labels
  std::vector<double> val_map;     // per network
  std::optional<double> label_precision;  // mean over networks; needs a ledger
  std::optional<double> label_recall;
  std::optional<double> kept_fraction;
  std::vector<std::size_t> refurbished;  // per network, corrected cells this epoch
  double tau = 0.0;
  std::vector<double> tau_per_class;  // present under cdnr
};

struct RunReport {
  std::string kind;
  TrainConfig config;
  double epsilon = 0.0;  // schedule noise level actually used
  std::vector<double> epsilon_per_class;
  std::vector<EpochStats> epochs;
  std::vector<double> final_test_map;  // per network
  double test_map = 0.0;               // network with the higher final validation mAP
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
  std::string error;  // non-empty when a grid slot failed
};

/// Runs one full training run. data.train carries the observed (possibly
/// corrupted) labels; the ledger, when present, must cover exactly those
/// labels and provides the oracle for the cheater and for Eq.-4 diagnostics.
RunReport train(const TrainerKind& kind, const DatasetSplit& data,
                const std::optional<NoiseLedger>& ledger, const TrainConfig& config);

struct GridRun {
  TrainerKind kind;
  std::shared_ptr<const DatasetSplit> data;
  std::optional<NoiseLedger> ledger;
  TrainConfig config;
};

/// Executes runs on a bounded worker pool. on_report fires once per finished
/// run (serialized), so a crash loses at most the run in flight. A failed run
/// gets its error recorded in the report slot instead of aborting the grid.
std::vector<RunReport> run_grid(
    const std::vector<GridRun>& runs, unsigned jobs,
    const std::function<void(std::size_t, const RunReport&)>& on_report = nullptr);

}  // namespace noisylab
