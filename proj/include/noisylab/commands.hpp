#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "noisylab/config.hpp"
#include "noisylab/noise.hpp"
#include "noisylab/trainers.hpp"

namespace noisylab {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRunFailure = 1;
inline constexpr int kExitConfigError = 2;

struct SynthOptions {
  SynthSpec spec;
  std::filesystem::path output;
};

struct InjectOptions {
  std::filesystem::path input;
  std::filesystem::path output;
  std::string strategy;            // uniform | mixed | transition
  std::optional<double> epsilon;   // uniform: cell fraction; mixed: target epsilon
  std::optional<double> rate;      // mixed: r directly
  std::filesystem::path transition;
  std::uint64_t seed = 1;
};

/// C x C matrix of swap probabilities, one CSV row per class, no header.
TransitionMatrix load_transition(const std::filesystem::path& path);

/// Materializes one run from a config: dataset (file or synthetic), split,
/// and noise on the training split. The run seed drives the noise realization
/// unless noise.seed pins it.
GridRun prepare_run(const ExperimentConfig& cfg, std::uint64_t seed);

int cmd_synth(const SynthOptions& opts, std::ostream& out);
int cmd_inject(const InjectOptions& opts, std::ostream& out);
int cmd_run(const std::filesystem::path& config_path, std::ostream& out);
int cmd_grid(const std::filesystem::path& spec_path, unsigned jobs, std::ostream& out);
int cmd_report(const std::filesystem::path& report_dir, std::ostream& out);

}  // namespace noisylab
