#include "noisylab/report_io.hpp"

#include <fstream>

namespace noisylab {

using nlohmann::json;

json report_to_json(const RunReport& r) {
  json cfg{
      {"kind", r.kind},
      {"epochs", r.config.epochs},
      {"batch", r.config.batch},
      {"max_lr", r.config.max_lr},
      {"warmup_fraction", r.config.warmup_fraction},
      {"hidden", r.config.hidden},
      {"gamma_pos", r.config.asl.gamma_pos},
      {"gamma_neg", r.config.asl.gamma_neg},
      {"margin", r.config.asl.margin},
      {"alpha", r.config.alpha},
      {"theta", r.config.theta},
      {"q", r.config.history_window},
      {"ramp_epochs", r.config.ramp_epochs},
      {"seed", r.seed},
      {"epsilon", r.epsilon},
      {"epsilon_per_class", r.epsilon_per_class},
  };

  json epochs = json::array();
  for (const EpochStats& e : r.epochs) {
    json je{
        {"epoch", e.epoch},
        {"train_loss", e.train_loss},
        {"val_map", e.val_map},
        {"refurbished", e.refurbished},
        {"tau", e.tau},
    };
    if (!e.tau_per_class.empty()) je["tau_per_class"] = e.tau_per_class;
    je["label_precision"] = e.label_precision ? json(*e.label_precision) : json(nullptr);
    je["label_recall"] = e.label_recall ? json(*e.label_recall) : json(nullptr);
    je["kept_fraction"] = e.kept_fraction ? json(*e.kept_fraction) : json(nullptr);
    epochs.push_back(std::move(je));
  }

  json final{
      {"test_map_per_network", r.final_test_map},
      {"test_map", r.test_map},
      {"wall_seconds", r.wall_seconds},
      {"error", r.error},
  };
  return json{{"config", std::move(cfg)}, {"epochs", std::move(epochs)}, {"final", std::move(final)}};
}

RunReport report_from_json(const json& j) {
  RunReport r;
  const json& cfg = j.at("config");
  r.kind = cfg.at("kind").get<std::string>();
  r.config.epochs = cfg.at("epochs").get<std::size_t>();
  r.config.batch = cfg.at("batch").get<std::size_t>();
  r.config.max_lr = cfg.at("max_lr").get<double>();
  r.config.warmup_fraction = cfg.at("warmup_fraction").get<double>();
  r.config.hidden = cfg.at("hidden").get<std::size_t>();
  r.config.asl.gamma_pos = cfg.at("gamma_pos").get<double>();
  r.config.asl.gamma_neg = cfg.at("gamma_neg").get<double>();
  r.config.asl.margin = cfg.at("margin").get<double>();
  r.config.alpha = cfg.at("alpha").get<double>();
  r.config.theta = cfg.at("theta").get<double>();
  r.config.history_window = cfg.at("q").get<std::size_t>();
  r.config.ramp_epochs = cfg.at("ramp_epochs").get<std::size_t>();
  r.seed = cfg.at("seed").get<std::uint64_t>();
  r.config.seed = r.seed;
  r.epsilon = cfg.at("epsilon").get<double>();
  r.epsilon_per_class = cfg.at("epsilon_per_class").get<std::vector<double>>();

  for (const json& je : j.at("epochs")) {
    EpochStats e;
    e.epoch = je.at("epoch").get<std::size_t>();
    e.train_loss = je.at("train_loss").get<std::vector<double>>();
    e.val_map = je.at("val_map").get<std::vector<double>>();
    e.refurbished = je.at("refurbished").get<std::vector<std::size_t>>();
    e.tau = je.at("tau").get<double>();
    if (je.contains("tau_per_class"))
      e.tau_per_class = je.at("tau_per_class").get<std::vector<double>>();
    if (!je.at("label_precision").is_null())
      e.label_precision = je.at("label_precision").get<double>();
    if (!je.at("label_recall").is_null()) e.label_recall = je.at("label_recall").get<double>();
    if (!je.at("kept_fraction").is_null()) e.kept_fraction = je.at("kept_fraction").get<double>();
    r.epochs.push_back(std::move(e));
  }

  const json& fin = j.at("final");
  r.final_test_map = fin.at("test_map_per_network").get<std::vector<double>>();
  r.test_map = fin.at("test_map").get<double>();
  r.wall_seconds = fin.at("wall_seconds").get<double>();
  r.error = fin.at("error").get<std::string>();
  return r;
}

void write_report(const RunReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_report: cannot write '" + path.string() + "'");
  out << report_to_json(report).dump(2) << "\n";
  if (!out) throw std::runtime_error("write_report: write failed for '" + path.string() + "'");
}

RunReport read_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_report: cannot open '" + path.string() + "'");
  json j = json::parse(in);
  return report_from_json(j);
}

}  // namespace noisylab
