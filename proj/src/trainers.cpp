#include "noisylab/trainers.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "noisylab/metrics.hpp"
#include "noisylab/refurbish.hpp"
#include "noisylab/rng.hpp"
#include "noisylab/selection.hpp"

namespace noisylab {

TrainerKind parse_trainer_kind(const std::string& token) {
  TrainerKind kind;
  std::string rest = token;
  auto take = [&](const std::string& prefix) {
    if (rest.rfind(prefix, 0) == 0) {
      rest = rest.substr(prefix.size());
      return true;
    }
    return false;
  };
  if (take("mhss")) {
    kind.base = TrainerBase::coselfie;
    kind.cdnr = kind.jcc = true;
  } else if (take("baseline")) {
    kind.base = TrainerBase::baseline;
  } else if (take("cheater")) {
    kind.base = TrainerBase::cheater;
  } else if (take("coteaching")) {
    kind.base = TrainerBase::coteaching;
  } else if (take("coselfie")) {
    kind.base = TrainerBase::coselfie;
  } else {
    throw std::invalid_argument("unknown trainer kind '" + token + "'");
  }
  while (!rest.empty()) {
    if (take("+cdnr"))
      kind.cdnr = true;
    else if (take("+jcc"))
      kind.jcc = true;
    else
      throw std::invalid_argument("unknown trainer flag in '" + token + "'");
  }
  if (kind.cdnr && !kind.selecting())
    throw std::invalid_argument("'" + token + "': cdnr needs a selecting trainer");
  if (kind.jcc && !kind.correcting())
    throw std::invalid_argument("'" + token + "': jcc needs a correcting trainer");
  return kind;
}

std::string to_string(const TrainerKind& kind) {
  if (kind.base == TrainerBase::coselfie && kind.cdnr && kind.jcc) return "mhss";
  std::string out;
  switch (kind.base) {
    case TrainerBase::baseline: out = "baseline"; break;
    case TrainerBase::cheater: out = "cheater"; break;
    case TrainerBase::coteaching: out = "coteaching"; break;
    case TrainerBase::coselfie: out = "coselfie"; break;
  }
  if (kind.cdnr) out += "+cdnr";
  if (kind.jcc) out += "+jcc";
  return out;
}

namespace {

struct BatchView {
  Matrix x;
  BinaryMatrix y;
  std::vector<std::size_t> rows;
};

BatchView slice_batch(const MultiLabelDataset& ds, const std::vector<std::size_t>& order,
                      std::size_t begin, std::size_t end) {
  BatchView b;
  const std::size_t n = end - begin;
  b.x = Matrix(n, ds.feature_dim());
  b.y = BinaryMatrix(n, ds.num_classes());
  b.rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = order[begin + i];
    b.rows.push_back(r);
    for (std::size_t j = 0; j < ds.feature_dim(); ++j) b.x(i, j) = ds.features(r, j);
    for (std::size_t k = 0; k < ds.num_classes(); ++k) b.y.set(i, k, ds.labels(r, k));
  }
  return b;
}

double matrix_sum(const Matrix& m) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) s += m.data()[i];
  return s;
}

}  // namespace

RunReport train(const TrainerKind& kind, const DatasetSplit& data,
                const std::optional<NoiseLedger>& ledger, const TrainConfig& config) {
  const auto t_start = std::chrono::steady_clock::now();

  data.train.validate();
  data.val.validate();
  data.test.validate();
  if (config.epochs < 1 || config.batch < 1)
    throw std::invalid_argument("train: epochs and batch size must be >= 1");
  if (config.theta < 0.0 || config.theta > 1.0)
    throw std::invalid_argument("train: theta must be in [0,1]");
  if (config.alpha < 0.0) throw std::invalid_argument("train: alpha must be >= 0");

  const std::size_t n = data.train.size();
  const std::size_t d = data.train.feature_dim();
  const std::size_t c = data.train.num_classes();
  if (ledger && (ledger->flip_mask.rows() != n || ledger->flip_mask.cols() != c))
    throw std::invalid_argument("train: ledger does not cover the training labels");
  if (kind.base == TrainerBase::cheater && !ledger)
    throw std::invalid_argument("train: cheater needs a noise ledger");

  // schedule noise rates: realized ledger values win over explicit config
  ForgetSchedule sched_eps;
  sched_eps.alpha = config.alpha;
  sched_eps.ramp_epochs = config.ramp_epochs;
  if (ledger) {
    sched_eps.epsilon = ledger->epsilon;
    if (kind.cdnr) sched_eps.epsilon_per_class = ledger->epsilon_per_class;
  } else {
    if (kind.selecting() && !config.epsilon_override)
      throw std::invalid_argument("train: selection needs a ledger or an explicit epsilon");
    sched_eps.epsilon = config.epsilon_override.value_or(0.0);
    if (kind.cdnr) {
      if (config.epsilon_per_class_override.size() != c)
        throw std::invalid_argument("train: cdnr needs per-class noise rates (ledger or config)");
      sched_eps.epsilon_per_class = config.epsilon_per_class_override;
    }
  }

  const std::size_t nets = kind.dual() ? 2 : 1;
  std::vector<MlpParams> params;
  std::vector<AdamState> adam;
  for (std::size_t m = 0; m < nets; ++m) {
    params.push_back(init_params(d, config.hidden, c, config.seed + m));
    adam.push_back(AdamState::init(params.back()));
  }

  const std::size_t batches = (n + config.batch - 1) / config.batch;
  OneCycleSchedule lr_sched{config.max_lr, config.epochs * batches, config.warmup_fraction};

  std::vector<PredictionHistory> histories;
  if (kind.correcting())
    histories.assign(nets, PredictionHistory(n, c, config.history_window));

  Rng shuffle_rng(derive_seed(config.seed, 0xE55));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  std::size_t clean_total = 0;
  if (ledger) clean_total = ledger->flip_mask.size() - ledger->flip_mask.count();

  RunReport report;
  report.kind = to_string(kind);
  report.config = config;
  report.seed = config.seed;
  report.epsilon = sched_eps.epsilon;
  report.epsilon_per_class = sched_eps.epsilon_per_class;

  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    // refurbishment verdicts are fixed for the whole epoch
    std::vector<RefurbishDecisions> decisions;
    if (kind.dual()) {
      for (std::size_t m = 0; m < nets; ++m)
        decisions.push_back(kind.correcting() ? decide(histories[m], config.theta)
                                              : RefurbishDecisions::none(n, c));
    }

    const double tau_final = forget_rate(sched_eps);
    const double tau = ramped_tau(tau_final, epoch, config.ramp_epochs);
    std::vector<double> tau_per_class;
    if (kind.cdnr) {
      tau_per_class.resize(c);
      for (std::size_t k = 0; k < c; ++k)
        tau_per_class[k] = ramped_tau(forget_rate(sched_eps, k), epoch, config.ramp_epochs);
    }

    shuffle_rng.shuffle(order);

    std::vector<double> loss_sum(nets, 0.0);
    std::vector<std::size_t> kept(nets, 0), kept_clean(nets, 0), corrected(nets, 0);

    for (std::size_t b = 0; b < batches; ++b) {
      const std::size_t begin = b * config.batch;
      const std::size_t end = std::min(begin + config.batch, n);
      BatchView batch = slice_batch(data.train, order, begin, end);
      const std::size_t bn = batch.rows.size();

      std::vector<Matrix> losses(nets);
      for (std::size_t m = 0; m < nets; ++m) {
        Matrix probs = forward(params[m], batch.x);
        losses[m] = asl_loss(probs, batch.y, config.asl);
        const double s = matrix_sum(losses[m]);
        if (!std::isfinite(s))
          throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch));
        loss_sum[m] += s;
      }

      std::vector<SelectionMask> sel(nets);
      if (kind.selecting())
        for (std::size_t m = 0; m < nets; ++m)
          sel[m] = kind.cdnr ? select_small_loss_cdnr(losses[m], tau_per_class)
                             : select_small_loss(losses[m], tau);

      // effective labels/weights per network
      std::vector<BinaryMatrix> eff_labels(nets, batch.y);
      std::vector<Matrix> eff_weights(nets, Matrix(bn, c, 1.0));
      switch (kind.base) {
        case TrainerBase::baseline:
          break;
        case TrainerBase::cheater:
          for (std::size_t i = 0; i < bn; ++i)
            for (std::size_t k = 0; k < c; ++k)
              if (ledger->flip_mask(batch.rows[i], k)) eff_weights[0](i, k) = 0.0;
          break;
        case TrainerBase::coteaching:
          // pure cross-feeding: each network trains on the peer's kept cells
          for (std::size_t i = 0; i < bn; ++i)
            for (std::size_t k = 0; k < c; ++k) {
              eff_weights[0](i, k) = sel[1].keep(i, k) ? 1.0 : 0.0;
              eff_weights[1](i, k) = sel[0].keep(i, k) ? 1.0 : 0.0;
            }
          break;
        case TrainerBase::coselfie: {
          const MergeResult merged =
              kind.jcc ? merge_jcc(decisions[0], decisions[1], sel[0], sel[1], batch.y, batch.rows)
                       : merge_coselfie(decisions[0], decisions[1], sel[0], sel[1], batch.y,
                                        batch.rows);
          eff_labels[0] = merged.for_a.labels;
          eff_weights[0] = merged.for_a.weights;
          eff_labels[1] = merged.for_b.labels;
          eff_weights[1] = merged.for_b.weights;
          corrected[0] += merged.for_a.corrected;
          corrected[1] += merged.for_b.corrected;
          break;
        }
      }

      const double lr = one_cycle_lr(lr_sched, step);
      ++step;
      for (std::size_t m = 0; m < nets; ++m) {
        MlpParams grads = backward(params[m], batch.x, eff_labels[m], config.asl, eff_weights[m]);
        adam_step(adam[m], params[m], grads, lr);
      }

      // Eq.-4 bookkeeping against the ledger: the mask that feeds network m
      if (ledger) {
        for (std::size_t m = 0; m < nets; ++m) {
          for (std::size_t i = 0; i < bn; ++i)
            for (std::size_t k = 0; k < c; ++k) {
              bool cell_kept;
              if (kind.base == TrainerBase::baseline)
                cell_kept = true;
              else if (kind.base == TrainerBase::cheater)
                cell_kept = !ledger->flip_mask(batch.rows[i], k);
              else
                cell_kept = sel[1 - m].keep(i, k) != 0;
              if (cell_kept) {
                ++kept[m];
                if (!ledger->flip_mask(batch.rows[i], k)) ++kept_clean[m];
              }
            }
        }
      }
    }

    if (kind.correcting())
      for (std::size_t m = 0; m < nets; ++m)
        histories[m].record_epoch(forward(params[m], data.train.features));

    EpochStats stats;
    stats.epoch = epoch;
    stats.tau = tau;
    stats.tau_per_class = tau_per_class;
    for (std::size_t m = 0; m < nets; ++m) {
      stats.train_loss.push_back(loss_sum[m] / double(n * c));
      stats.val_map.push_back(
          mean_average_precision(forward(params[m], data.val.features), data.val.labels).value);
      stats.refurbished.push_back(corrected[m]);
    }
    if (ledger) {
      double prec = 0.0, rec = 0.0, frac = 0.0;
      for (std::size_t m = 0; m < nets; ++m) {
        prec += kept[m] ? double(kept_clean[m]) / double(kept[m]) : 0.0;
        rec += clean_total ? double(kept_clean[m]) / double(clean_total) : 0.0;
        frac += double(kept[m]) / double(n * c);
      }
      stats.label_precision = prec / double(nets);
      stats.label_recall = rec / double(nets);
      stats.kept_fraction = frac / double(nets);
    }
    report.epochs.push_back(std::move(stats));
  }

  for (std::size_t m = 0; m < nets; ++m)
    report.final_test_map.push_back(
        mean_average_precision(forward(params[m], data.test.features), data.test.labels).value);
  std::size_t best = 0;
  if (nets == 2 && report.epochs.back().val_map[1] > report.epochs.back().val_map[0]) best = 1;
  report.test_map = report.final_test_map[best];

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return report;
}

std::vector<RunReport> run_grid(
    const std::vector<GridRun>& runs, unsigned jobs,
    const std::function<void(std::size_t, const RunReport&)>& on_report) {
  std::vector<RunReport> reports(runs.size());
  if (runs.empty()) return reports;
  jobs = std::max(1u, jobs);

  std::atomic<std::size_t> next{0};
  std::mutex report_mutex;

  auto worker = [&]() {
    while (true) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= runs.size()) return;
      const GridRun& run = runs[idx];
      RunReport report;
      try {
        report = train(run.kind, *run.data, run.ledger, run.config);
      } catch (const std::exception& e) {
        report.kind = to_string(run.kind);
        report.config = run.config;
        report.seed = run.config.seed;
        report.error = e.what();
      }
      std::lock_guard<std::mutex> lock(report_mutex);
      reports[idx] = std::move(report);
      if (on_report) on_report(idx, reports[idx]);
    }
  };

  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return reports;
}

}  // namespace noisylab
