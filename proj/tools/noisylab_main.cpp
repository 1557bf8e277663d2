#include <iostream>

#include <CLI11.hpp>

#include "noisylab/commands.hpp"

using namespace noisylab;

int main(int argc, char** argv) {
  CLI::App app{"noisylab - multi-label classification under label noise, at desk scale"};
  app.require_subcommand(1);

  // synth
  SynthOptions synth_opts;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset CSV");
  synth->add_option("--n", synth_opts.spec.instances, "instances")->required();
  synth->add_option("--d", synth_opts.spec.feature_dim, "feature dimension")->required();
  synth->add_option("--c", synth_opts.spec.classes, "classes")->required();
  synth->add_option("--prevalence", synth_opts.spec.target_prevalence, "target positive prevalence");
  synth->add_option("--correlation", synth_opts.spec.class_correlation, "class score correlation");
  synth->add_option("--seed", synth_opts.spec.seed, "generator seed");
  synth->add_option("--out", synth_out, "output CSV path")->required();

  // inject
  InjectOptions inject_opts;
  std::string inject_in, inject_out, inject_transition;
  double inject_epsilon = -1.0, inject_rate = -1.0;
  auto* inject = app.add_subcommand("inject", "corrupt a dataset and write a noise ledger");
  inject->add_option("--in", inject_in, "input dataset CSV")->required();
  inject->add_option("--out", inject_out, "output dataset CSV")->required();
  inject->add_option("--strategy", inject_opts.strategy, "uniform | mixed | transition")->required();
  inject->add_option("--epsilon", inject_epsilon, "target noise level (genuinely inverted cells)");
  inject->add_option("--rate", inject_rate, "mixed-noise rate r (alternative to --epsilon)");
  inject->add_option("--transition", inject_transition, "transition matrix CSV");
  inject->add_option("--seed", inject_opts.seed, "injection seed");

  // run
  std::string run_config;
  auto* run = app.add_subcommand("run", "execute the runs described by a config file");
  run->add_option("config", run_config, "experiment config file")->required();

  // grid
  std::string grid_spec;
  unsigned grid_jobs = 1;
  auto* grid = app.add_subcommand("grid", "execute a grid spec (config plus axis.* lists)");
  grid->add_option("spec", grid_spec, "grid spec file")->required();
  grid->add_option("--jobs", grid_jobs, "worker pool size");

  // report
  std::string report_dir;
  auto* report = app.add_subcommand("report", "summarize a directory of run reports");
  report->add_option("dir", report_dir, "directory containing run_*.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (*synth) {
      synth_opts.output = synth_out;
      return cmd_synth(synth_opts, std::cout);
    }
    if (*inject) {
      inject_opts.input = inject_in;
      inject_opts.output = inject_out;
      inject_opts.transition = inject_transition;
      if (inject_epsilon >= 0.0) inject_opts.epsilon = inject_epsilon;
      if (inject_rate >= 0.0) inject_opts.rate = inject_rate;
      return cmd_inject(inject_opts, std::cout);
    }
    if (*run) return cmd_run(run_config, std::cout);
    if (*grid) return cmd_grid(grid_spec, grid_jobs, std::cout);
    if (*report) return cmd_report(report_dir.empty() ? "runs" : report_dir, std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRunFailure;
  }
  return kExitConfigError;
}
