#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "noisylab/dataset.hpp"
#include "noisylab/trainers.hpp"

namespace noisylab {

/// Configuration problems carry field/line context and map to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat key=value file. '#' starts a comment; keys are dotted.
struct KeyValues {
  struct Entry {
    std::string value;
    std::size_t line = 0;
  };
  std::map<std::string, Entry> entries;
  std::filesystem::path source;

  bool has(const std::string& key) const { return entries.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;
  std::string require(const std::string& key) const;
};

KeyValues parse_kv_file(const std::filesystem::path& path);
KeyValues parse_kv_text(const std::string& text, const std::filesystem::path& source = "<memory>");

/// Full experiment description: data source, noise, trainer, and output.
struct ExperimentConfig {
  // dataset: exactly one of path / synth
  std::string dataset_path;
  std::optional<SynthSpec> synth;
  SplitRatios ratios;
  std::uint64_t split_seed = 17;

  // noise on the training split
  std::string noise_strategy = "none";  // none | uniform | mixed | transition
  std::optional<double> noise_epsilon;  // uniform: cell fraction; mixed: target epsilon
  std::optional<double> noise_rate;     // mixed: r directly
  std::string transition_path;
  std::optional<std::uint64_t> noise_seed;  // default: derived from the run seed

  TrainerKind kind;
  TrainConfig train;  // per-run seed is filled in from `seeds`
  std::vector<std::uint64_t> seeds{1};
  std::string output_dir = "runs";
};

/// Parses and validates; throws ConfigError naming the offending field/line.
ExperimentConfig parse_experiment_config(const KeyValues& kv);

/// Grid spec: a base experiment config plus axis.<key>=v1,v2,... entries.
struct GridSpec {
  KeyValues base;                                       // non-axis keys
  std::vector<std::pair<std::string, std::vector<std::string>>> axes;  // in file order
};

GridSpec parse_grid_spec(const KeyValues& kv);

/// Cartesian product of the axes, each combination overriding the base keys.
std::vector<ExperimentConfig> expand_grid(const GridSpec& spec);

}  // namespace noisylab
