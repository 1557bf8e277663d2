#include "noisylab/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace noisylab {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t");
  auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(trim(cur));
  return out;
}

[[noreturn]] void fail(const KeyValues& kv, const std::string& key, const std::string& what) {
  std::string where = kv.source.string();
  if (auto it = kv.entries.find(key); it != kv.entries.end())
    where += ":" + std::to_string(it->second.line);
  throw ConfigError(where + ": " + key + ": " + what);
}

double get_double(const KeyValues& kv, const std::string& key, double fallback) {
  auto v = kv.get(key);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    double out = std::stod(*v, &used);
    if (used != v->size()) throw std::invalid_argument("");
    return out;
  } catch (const std::exception&) {
    fail(kv, key, "expected a number, got '" + *v + "'");
  }
}

std::uint64_t get_u64(const KeyValues& kv, const std::string& key, std::uint64_t fallback) {
  auto v = kv.get(key);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    std::uint64_t out = std::stoull(*v, &used);
    if (used != v->size()) throw std::invalid_argument("");
    return out;
  } catch (const std::exception&) {
    fail(kv, key, "expected a non-negative integer, got '" + *v + "'");
  }
}

const std::vector<std::string> kKnownKeys = {
    "dataset.path",       "dataset.synth.n",    "dataset.synth.d",
    "dataset.synth.c",    "dataset.synth.prevalence", "dataset.synth.correlation",
    "dataset.synth.seed", "split.train",        "split.val",
    "split.test",         "split.seed",         "noise.strategy",
    "noise.epsilon",      "noise.rate",         "noise.transition",
    "noise.seed",         "trainer.kind",       "select.alpha",
    "select.ramp_epochs", "select.epsilon",     "select.epsilon_per_class",
    "refurbish.theta",    "refurbish.q",        "model.hidden",
    "model.gamma_pos",    "model.gamma_neg",    "model.margin",
    "optim.epochs",       "optim.batch",        "optim.max_lr",
    "optim.warmup_fraction", "seeds",           "output.dir",
};

}  // namespace

std::optional<std::string> KeyValues::get(const std::string& key) const {
  auto it = entries.find(key);
  if (it == entries.end()) return std::nullopt;
  return it->second.value;
}

std::string KeyValues::require(const std::string& key) const {
  auto v = get(key);
  if (!v) throw ConfigError(source.string() + ": missing required key '" + key + "'");
  return *v;
}

KeyValues parse_kv_text(const std::string& text, const std::filesystem::path& source) {
  KeyValues kv;
  kv.source = source;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(source.string() + ":" + std::to_string(line_no) +
                        ": expected key=value, got '" + t + "'");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw ConfigError(source.string() + ":" + std::to_string(line_no) + ": empty key");
    if (kv.entries.count(key))
      throw ConfigError(source.string() + ":" + std::to_string(line_no) + ": duplicate key '" +
                        key + "' (first set on line " +
                        std::to_string(kv.entries[key].line) + ")");
    kv.entries[key] = {value, line_no};
  }
  return kv;
}

KeyValues parse_kv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_kv_text(buf.str(), path);
}

ExperimentConfig parse_experiment_config(const KeyValues& kv) {
  for (const auto& [key, entry] : kv.entries) {
    if (std::find(kKnownKeys.begin(), kKnownKeys.end(), key) == kKnownKeys.end())
      throw ConfigError(kv.source.string() + ":" + std::to_string(entry.line) +
                        ": unknown key '" + key + "'");
  }

  ExperimentConfig cfg;

  const bool has_path = kv.has("dataset.path");
  const bool has_synth = kv.has("dataset.synth.n");
  if (has_path == has_synth)
    throw ConfigError(kv.source.string() +
                      ": exactly one of dataset.path or dataset.synth.* must be given");
  if (has_path) {
    cfg.dataset_path = kv.require("dataset.path");
  } else {
    SynthSpec s;
    s.instances = get_u64(kv, "dataset.synth.n", 0);
    s.feature_dim = get_u64(kv, "dataset.synth.d", 16);
    s.classes = get_u64(kv, "dataset.synth.c", 8);
    s.target_prevalence = get_double(kv, "dataset.synth.prevalence", 0.2);
    s.class_correlation = get_double(kv, "dataset.synth.correlation", 0.0);
    s.seed = get_u64(kv, "dataset.synth.seed", 7);
    cfg.synth = s;
  }

  cfg.ratios.train = get_double(kv, "split.train", 0.7);
  cfg.ratios.val = get_double(kv, "split.val", 0.1);
  cfg.ratios.test = get_double(kv, "split.test", 0.2);
  cfg.split_seed = get_u64(kv, "split.seed", 17);

  cfg.noise_strategy = kv.get("noise.strategy").value_or("none");
  if (cfg.noise_strategy != "none" && cfg.noise_strategy != "uniform" &&
      cfg.noise_strategy != "mixed" && cfg.noise_strategy != "transition")
    fail(kv, "noise.strategy", "must be none, uniform, mixed or transition");
  if (kv.has("noise.epsilon")) cfg.noise_epsilon = get_double(kv, "noise.epsilon", 0.0);
  if (kv.has("noise.rate")) cfg.noise_rate = get_double(kv, "noise.rate", 0.0);
  if (kv.has("noise.transition")) cfg.transition_path = *kv.get("noise.transition");
  if (kv.has("noise.seed")) cfg.noise_seed = get_u64(kv, "noise.seed", 0);

  if (cfg.noise_strategy == "uniform" && !cfg.noise_epsilon)
    fail(kv, "noise.strategy", "uniform noise needs noise.epsilon");
  if (cfg.noise_strategy == "mixed" && !cfg.noise_epsilon && !cfg.noise_rate)
    fail(kv, "noise.strategy", "mixed noise needs noise.epsilon or noise.rate");
  if (cfg.noise_strategy == "transition" && cfg.transition_path.empty())
    fail(kv, "noise.strategy", "transition noise needs noise.transition");

  try {
    cfg.kind = parse_trainer_kind(kv.get("trainer.kind").value_or("baseline"));
  } catch (const std::invalid_argument& e) {
    fail(kv, "trainer.kind", e.what());
  }

  cfg.train.alpha = get_double(kv, "select.alpha", 1.0);
  if (cfg.train.alpha < 0.0) fail(kv, "select.alpha", "must be >= 0");
  cfg.train.ramp_epochs = get_u64(kv, "select.ramp_epochs", 10);
  if (kv.has("select.epsilon"))
    cfg.train.epsilon_override = get_double(kv, "select.epsilon", 0.0);
  if (kv.has("select.epsilon_per_class")) {
    for (const auto& tok : split_commas(kv.require("select.epsilon_per_class"))) {
      try {
        cfg.train.epsilon_per_class_override.push_back(std::stod(tok));
      } catch (const std::exception&) {
        fail(kv, "select.epsilon_per_class", "bad entry '" + tok + "'");
      }
    }
  }

  cfg.train.theta = get_double(kv, "refurbish.theta", 0.05);
  if (cfg.train.theta < 0.0 || cfg.train.theta > 1.0) fail(kv, "refurbish.theta", "must be in [0,1]");
  cfg.train.history_window = get_u64(kv, "refurbish.q", 10);
  if (cfg.train.history_window < 1) fail(kv, "refurbish.q", "must be >= 1");

  cfg.train.hidden = get_u64(kv, "model.hidden", 64);
  cfg.train.asl.gamma_pos = get_double(kv, "model.gamma_pos", 0.0);
  cfg.train.asl.gamma_neg = get_double(kv, "model.gamma_neg", 4.0);
  cfg.train.asl.margin = get_double(kv, "model.margin", 0.05);

  cfg.train.epochs = get_u64(kv, "optim.epochs", 30);
  cfg.train.batch = get_u64(kv, "optim.batch", 64);
  cfg.train.max_lr = get_double(kv, "optim.max_lr", 1e-3);
  cfg.train.warmup_fraction = get_double(kv, "optim.warmup_fraction", 0.3);

  if (kv.has("seeds")) {
    cfg.seeds.clear();
    for (const auto& tok : split_commas(kv.require("seeds"))) {
      try {
        cfg.seeds.push_back(std::stoull(tok));
      } catch (const std::exception&) {
        fail(kv, "seeds", "bad seed '" + tok + "'");
      }
    }
    if (cfg.seeds.empty()) fail(kv, "seeds", "needs at least one seed");
  }
  cfg.output_dir = kv.get("output.dir").value_or("runs");

  // trainer-level requirements that can be caught before any training
  if (cfg.kind.base == TrainerBase::cheater && cfg.noise_strategy == "none")
    throw ConfigError(kv.source.string() +
                      ": trainer.kind=cheater needs injected noise (a ledger); "
                      "noise.strategy is none");
  if (cfg.kind.selecting() && cfg.noise_strategy == "none" && !cfg.train.epsilon_override)
    throw ConfigError(kv.source.string() +
                      ": selection without injected noise needs select.epsilon");
  return cfg;
}

GridSpec parse_grid_spec(const KeyValues& kv) {
  GridSpec spec;
  spec.base.source = kv.source;
  for (const auto& [key, entry] : kv.entries) {
    if (key.rfind("axis.", 0) == 0) {
      const std::string target = key.substr(5);
      if (std::find(kKnownKeys.begin(), kKnownKeys.end(), target) == kKnownKeys.end())
        throw ConfigError(kv.source.string() + ":" + std::to_string(entry.line) +
                          ": unknown axis target '" + target + "'");
      auto values = split_commas(entry.value);
      values.erase(std::remove(values.begin(), values.end(), std::string{}), values.end());
      if (values.empty())
        throw ConfigError(kv.source.string() + ":" + std::to_string(entry.line) +
                          ": axis '" + target + "' has no values");
      spec.axes.emplace_back(target, values);
    } else {
      spec.base.entries[key] = entry;
    }
  }
  std::sort(spec.axes.begin(), spec.axes.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return spec;
}

std::vector<ExperimentConfig> expand_grid(const GridSpec& spec) {
  std::vector<KeyValues> combos{spec.base};
  for (const auto& [key, values] : spec.axes) {
    std::vector<KeyValues> next;
    next.reserve(combos.size() * values.size());
    for (const auto& kv : combos)
      for (const auto& v : values) {
        KeyValues expanded = kv;
        expanded.entries[key] = {v, 0};
        next.push_back(std::move(expanded));
      }
    combos = std::move(next);
  }
  std::vector<ExperimentConfig> out;
  out.reserve(combos.size());
  for (const auto& kv : combos) out.push_back(parse_experiment_config(kv));
  return out;
}

}  // namespace noisylab
