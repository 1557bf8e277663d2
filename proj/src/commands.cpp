#include "noisylab/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "noisylab/metrics.hpp"
#include "noisylab/report_io.hpp"
#include "noisylab/rng.hpp"

namespace noisylab {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + fmt(v[i]);
  return out;
}

}  // namespace

TransitionMatrix load_transition(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open transition matrix '" + path.string() + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        row.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw ConfigError("transition matrix '" + path.string() + "': bad entry '" + tok + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError("transition matrix '" + path.string() + "' is empty");
  Matrix m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols())
      throw ConfigError("transition matrix '" + path.string() + "': ragged row " +
                        std::to_string(i + 1));
    for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  }
  try {
    return TransitionMatrix(std::move(m));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("transition matrix '" + path.string() + "': " + e.what());
  }
}

GridRun prepare_run(const ExperimentConfig& cfg, std::uint64_t seed) {
  MultiLabelDataset ds = cfg.synth ? synth_generate(*cfg.synth) : load_csv(cfg.dataset_path);
  auto data = std::make_shared<DatasetSplit>(split(ds, cfg.ratios, cfg.split_seed));

  GridRun run;
  run.kind = cfg.kind;
  run.config = cfg.train;
  run.config.seed = seed;

  if (cfg.noise_strategy != "none") {
    const std::uint64_t noise_seed = cfg.noise_seed.value_or(derive_seed(seed, 0xF66));
    NoisyLabels noisy;
    if (cfg.noise_strategy == "uniform") {
      noisy = inject_uniform(data->train.labels, *cfg.noise_epsilon, noise_seed);
    } else if (cfg.noise_strategy == "mixed") {
      const double r = cfg.noise_rate
                           ? *cfg.noise_rate
                           : mixed_rate_for_target(*cfg.noise_epsilon,
                                                   prevalence(data->train.labels).overall);
      noisy = inject_mixed(data->train.labels, r, noise_seed);
    } else {
      noisy = inject_transition(data->train.labels, load_transition(cfg.transition_path),
                                noise_seed);
    }
    data->train.labels = std::move(noisy.labels);
    run.ledger = std::move(noisy.ledger);
  }
  run.data = std::move(data);
  return run;
}

int cmd_synth(const SynthOptions& opts, std::ostream& out) {
  MultiLabelDataset ds = synth_generate(opts.spec);
  save_csv(ds, opts.output);
  const PrevalenceStats p = prevalence(ds.labels);
  out << "wrote " << opts.output.string() << " (N=" << ds.size() << ", d=" << ds.feature_dim()
      << ", C=" << ds.num_classes() << ")\n";
  out << "realized_prevalence=" << fmt(p.overall) << "\n";
  return kExitOk;
}

int cmd_inject(const InjectOptions& opts, std::ostream& out) {
  MultiLabelDataset ds = load_csv(opts.input);

  NoisyLabels noisy;
  out << "strategy=" << opts.strategy << "\n";
  if (opts.strategy == "uniform") {
    if (!opts.epsilon) throw ConfigError("inject: uniform noise needs --epsilon");
    noisy = inject_uniform(ds.labels, *opts.epsilon, opts.seed);
  } else if (opts.strategy == "mixed") {
    double r;
    if (opts.rate) {
      r = *opts.rate;
    } else if (opts.epsilon) {
      r = mixed_rate_for_target(*opts.epsilon, prevalence(ds.labels).overall);
    } else {
      throw ConfigError("inject: mixed noise needs --epsilon or --rate");
    }
    out << "r=" << fmt(r) << "\n";
    noisy = inject_mixed(ds.labels, r, opts.seed);
  } else if (opts.strategy == "transition") {
    if (opts.transition.empty()) throw ConfigError("inject: transition noise needs --transition");
    noisy = inject_transition(ds.labels, load_transition(opts.transition), opts.seed);
  } else {
    throw ConfigError("inject: unknown strategy '" + opts.strategy + "'");
  }

  MultiLabelDataset corrupted = ds;
  corrupted.labels = noisy.labels;
  save_csv(corrupted, opts.output);
  const std::filesystem::path ledger_path = ledger_path_for(opts.output);
  save_ledger(noisy.ledger, ledger_path);

  // realized noise level is the reporting convention, not the request
  out << "realized_epsilon=" << fmt(noisy.ledger.epsilon) << "\n";
  out << "epsilon_per_class=" << join_doubles(noisy.ledger.epsilon_per_class) << "\n";
  out << "wrote " << opts.output.string() << " and " << ledger_path.string() << "\n";
  return kExitOk;
}

namespace {

std::string run_file_name(std::size_t index, const RunReport& report) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "run_%04zu_", index);
  return buf + report.kind + "_seed" + std::to_string(report.seed) + ".json";
}

std::string index_row(const RunReport& r) {
  std::ostringstream row;
  row << r.kind << ',' << fmt(r.config.alpha) << ',' << fmt(r.config.theta) << ','
      << r.config.history_window << ',' << fmt(r.epsilon) << ',' << r.seed << ','
      << (r.error.empty() ? fmt(r.test_map) : "") << ',' << r.error << "\n";
  return row.str();
}

constexpr const char* kIndexHeader = "kind,alpha,theta,q,epsilon,seed,final_test_map,error\n";

}  // namespace

int cmd_run(const std::filesystem::path& config_path, std::ostream& out) {
  const ExperimentConfig cfg = parse_experiment_config(parse_kv_file(config_path));
  std::filesystem::create_directories(cfg.output_dir);

  bool any_failed = false;
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
    GridRun run = prepare_run(cfg, cfg.seeds[i]);
    RunReport report;
    try {
      report = train(run.kind, *run.data, run.ledger, run.config);
    } catch (const std::exception& e) {
      report.kind = to_string(run.kind);
      report.config = run.config;
      report.seed = run.config.seed;
      report.error = e.what();
      any_failed = true;
    }
    const auto path = std::filesystem::path(cfg.output_dir) / run_file_name(i, report);
    write_report(report, path);
    if (report.error.empty())
      out << report.kind << " seed=" << report.seed << " epsilon=" << fmt(report.epsilon)
          << " test_map=" << fmt(report.test_map) << " -> " << path.string() << "\n";
    else
      out << report.kind << " seed=" << report.seed << " FAILED: " << report.error << "\n";
  }
  return any_failed ? kExitRunFailure : kExitOk;
}

int cmd_grid(const std::filesystem::path& spec_path, unsigned jobs, std::ostream& out) {
  const GridSpec spec = parse_grid_spec(parse_kv_file(spec_path));
  const std::vector<ExperimentConfig> configs = expand_grid(spec);

  std::vector<GridRun> runs;
  std::string output_dir = configs.empty() ? std::string("runs") : configs.front().output_dir;
  for (const ExperimentConfig& cfg : configs)
    for (std::uint64_t seed : cfg.seeds) runs.push_back(prepare_run(cfg, seed));

  std::filesystem::create_directories(output_dir);
  const auto index_path = std::filesystem::path(output_dir) / "index.csv";
  std::ofstream index(index_path);
  index << kIndexHeader;
  index.flush();

  std::vector<RunReport> reports = run_grid(
      runs, jobs, [&](std::size_t idx, const RunReport& report) {
        // incremental: one JSON and one index row per finished run
        write_report(report, std::filesystem::path(output_dir) / run_file_name(idx, report));
        index << index_row(report);
        index.flush();
        out << "[" << idx + 1 << "/" << runs.size() << "] " << report.kind
            << " seed=" << report.seed
            << (report.error.empty() ? " test_map=" + fmt(report.test_map)
                                     : " FAILED: " + report.error)
            << "\n";
      });

  // rewrite the index in run order so reruns are comparable
  index.close();
  std::ofstream sorted(index_path);
  sorted << kIndexHeader;
  for (const RunReport& r : reports) sorted << index_row(r);

  const bool any_failed =
      std::any_of(reports.begin(), reports.end(), [](const RunReport& r) { return !r.error.empty(); });
  return any_failed ? kExitRunFailure : kExitOk;
}

namespace {

struct GroupKey {
  std::string kind;
  double alpha, theta;
  std::size_t q;
  auto operator<=>(const GroupKey&) const = default;
};

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / double(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / double(v.size() - 1));
}

}  // namespace

int cmd_report(const std::filesystem::path& report_dir, std::ostream& out) {
  if (!std::filesystem::is_directory(report_dir))
    throw ConfigError("report: '" + report_dir.string() + "' is not a directory");

  std::vector<RunReport> reports;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(report_dir))
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    try {
      reports.push_back(read_report(path));
    } catch (const std::exception& e) {
      std::cerr << "warning: skipping '" << path.string() << "': " << e.what() << "\n";
    }
  }
  if (reports.empty()) throw ConfigError("report: no readable reports in '" + report_dir.string() + "'");

  // summary: mean +/- std of final test mAP over seeds per configuration
  std::map<GroupKey, std::vector<const RunReport*>> groups;
  for (const RunReport& r : reports) {
    if (!r.error.empty()) continue;
    groups[{r.kind, r.config.alpha, r.config.theta, r.config.history_window}].push_back(&r);
  }

  const auto summary_path = report_dir / "summary.csv";
  std::ofstream summary(summary_path);
  summary << "kind,alpha,theta,q,epsilon,n_runs,test_map_mean,test_map_std\n";
  out << "kind            alpha  theta  q   eps     runs  test mAP\n";
  for (const auto& [key, members] : groups) {
    std::vector<double> maps, epsilons;
    for (const RunReport* r : members) {
      maps.push_back(r->test_map);
      epsilons.push_back(r->epsilon);
    }
    summary << key.kind << ',' << fmt(key.alpha) << ',' << fmt(key.theta) << ',' << key.q << ','
            << fmt(mean_of(epsilons)) << ',' << members.size() << ',' << fmt(mean_of(maps)) << ','
            << fmt(std_of(maps)) << "\n";
    char line[160];
    std::snprintf(line, sizeof(line), "%-15s %-6g %-6g %-3zu %-7g %-5zu %.4f +/- %.4f\n",
                  key.kind.c_str(), key.alpha, key.theta, key.q, mean_of(epsilons),
                  members.size(), mean_of(maps), std_of(maps));
    out << line;
  }

  // alpha sweep: last-10-epoch mean label precision/recall, recomputed from
  // the per-epoch series
  std::map<std::pair<std::string, double>, std::pair<std::vector<double>, std::vector<double>>>
      sweeps;
  for (const RunReport& r : reports) {
    if (!r.error.empty()) continue;
    std::vector<double> precision, recall;
    for (const EpochStats& e : r.epochs) {
      if (e.label_precision) precision.push_back(*e.label_precision);
      if (e.label_recall) recall.push_back(*e.label_recall);
    }
    if (precision.empty()) continue;
    const std::size_t k = std::min<std::size_t>(10, precision.size());
    auto& slot = sweeps[{r.kind, r.config.alpha}];
    slot.first.push_back(last_k_mean(precision, k));
    slot.second.push_back(last_k_mean(recall, k));
  }
  if (!sweeps.empty()) {
    std::ofstream sweep(report_dir / "alpha_sweep.csv");
    sweep << "kind,alpha,label_precision_last10,label_recall_last10\n";
    for (const auto& [key, values] : sweeps)
      sweep << key.first << ',' << fmt(key.second) << ',' << fmt(mean_of(values.first)) << ','
            << fmt(mean_of(values.second)) << "\n";
  }

  out << "wrote " << summary_path.string();
  if (!sweeps.empty()) out << " and " << (report_dir / "alpha_sweep.csv").string();
  out << "\n";
  return kExitOk;
}

}  // namespace noisylab
