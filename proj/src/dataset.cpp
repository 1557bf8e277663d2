#include "noisylab/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "noisylab/rng.hpp"

namespace noisylab {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void MultiLabelDataset::validate() const {
  const std::size_t n = features.rows();
  if (n < 1) throw std::invalid_argument("dataset: N must be >= 1");
  if (features.cols() < 1) throw std::invalid_argument("dataset: feature dimension must be >= 1");
  if (labels.rows() != n) throw std::invalid_argument("dataset: label rows do not match feature rows");
  if (ids.size() != n) throw std::invalid_argument("dataset: |ids| must equal N");
  if (class_names.size() != labels.cols())
    throw std::invalid_argument("dataset: class name count does not match label columns");
  for (std::size_t i = 0; i < features.size(); ++i)
    if (!std::isfinite(features.data()[i]))
      throw std::invalid_argument("dataset: non-finite feature value");
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels.data()[i] > 1) throw std::invalid_argument("dataset: label cell not in {0,1}");
  std::unordered_set<std::string> seen;
  for (const auto& id : ids)
    if (!seen.insert(id).second)
      throw std::invalid_argument("dataset: duplicate instance id '" + id + "'");
}

MultiLabelDataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_csv: cannot open '" + path.string() + "'");

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("load_csv: '" + path.string() + "' is empty");

  const auto header = split_line(line);
  if (header.empty() || header[0] != "id")
    throw std::runtime_error("load_csv: header must start with 'id' (" + path.string() + ")");

  // column roles are self-describing: "f:<k>" features, then "y:<name>" labels
  std::size_t d = 0;
  while (1 + d < header.size() && header[1 + d].rfind("f:", 0) == 0) ++d;
  std::size_t c = 0;
  std::vector<std::string> class_names;
  while (1 + d + c < header.size() && header[1 + d + c].rfind("y:", 0) == 0) {
    class_names.push_back(header[1 + d + c].substr(2));
    ++c;
  }
  if (d == 0) throw std::runtime_error("load_csv: no 'f:' feature columns in header");
  if (c == 0) throw std::runtime_error("load_csv: no 'y:' label columns in header");
  if (1 + d + c != header.size())
    throw std::runtime_error("load_csv: unrecognized trailing header column '" + header[1 + d + c] + "'");

  std::vector<std::string> ids;
  std::vector<double> feat;
  std::vector<std::uint8_t> lab;
  std::size_t row = 0;  // data row number, 1-based in messages

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++row;
    const auto cells = split_line(line);
    if (cells.size() != header.size())
      throw std::runtime_error("load_csv: row " + std::to_string(row) + " has " +
                               std::to_string(cells.size()) + " cells, expected " +
                               std::to_string(header.size()));
    ids.push_back(cells[0]);
    for (std::size_t j = 0; j < d; ++j) {
      const std::string& cell = cells[1 + j];
      try {
        std::size_t used = 0;
        double v = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument("trailing garbage");
        feat.push_back(v);
      } catch (const std::exception&) {
        throw std::runtime_error("load_csv: non-numeric feature cell at row " + std::to_string(row) +
                                 ", column " + header[1 + j] + " ('" + cell + "')");
      }
    }
    for (std::size_t j = 0; j < c; ++j) {
      const std::string& cell = cells[1 + d + j];
      if (cell == "0")
        lab.push_back(0);
      else if (cell == "1")
        lab.push_back(1);
      else
        throw std::runtime_error("load_csv: non-binary label cell at row " + std::to_string(row) +
                                 ", column " + header[1 + d + j] + " ('" + cell + "')");
    }
  }
  if (row == 0) throw std::runtime_error("load_csv: '" + path.string() + "' has no data rows");

  MultiLabelDataset ds;
  ds.features = Matrix(row, d);
  std::copy(feat.begin(), feat.end(), ds.features.data());
  ds.labels = BinaryMatrix(row, c);
  std::copy(lab.begin(), lab.end(), ds.labels.data());
  ds.ids = std::move(ids);
  ds.class_names = std::move(class_names);
  ds.validate();
  return ds;
}

void save_csv(const MultiLabelDataset& ds, const std::filesystem::path& path) {
  ds.validate();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_csv: cannot write '" + path.string() + "'");
  out << "id";
  for (std::size_t j = 0; j < ds.feature_dim(); ++j) out << ",f:" << j;
  for (const auto& name : ds.class_names) out << ",y:" << name;
  out << "\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    out << ds.ids[i];
    for (std::size_t j = 0; j < ds.feature_dim(); ++j) out << ',' << format_double(ds.features(i, j));
    for (std::size_t j = 0; j < ds.num_classes(); ++j) out << ',' << int(ds.labels(i, j));
    out << "\n";
  }
  if (!out) throw std::runtime_error("save_csv: write failed for '" + path.string() + "'");
}

MultiLabelDataset synth_generate(const SynthSpec& spec) {
  if (spec.instances < 1 || spec.feature_dim < 1 || spec.classes < 1)
    throw std::invalid_argument("synth_generate: N, d, C must all be >= 1");
  if (!(spec.target_prevalence > 0.0 && spec.target_prevalence < 1.0))
    throw std::invalid_argument("synth_generate: target_prevalence must be in (0,1)");
  if (!(spec.class_correlation >= 0.0 && spec.class_correlation < 1.0))
    throw std::invalid_argument("synth_generate: class_correlation must be in [0,1)");

  const std::size_t n = spec.instances, d = spec.feature_dim, c = spec.classes;
  Rng rng(derive_seed(spec.seed, 0x5f3e));

  // shared direction plus per-class directions; correlation mixes them
  std::vector<double> shared(d);
  for (auto& v : shared) v = rng.normal();
  Matrix weights(c, d);
  const double rho = spec.class_correlation;
  const double w_shared = std::sqrt(rho), w_own = std::sqrt(1.0 - rho);
  for (std::size_t k = 0; k < c; ++k)
    for (std::size_t j = 0; j < d; ++j) weights(k, j) = w_shared * shared[j] + w_own * rng.normal();

  MultiLabelDataset ds;
  ds.features = Matrix(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) ds.features(i, j) = rng.normal();

  Matrix scores(n, c);
#pragma omp parallel for if (n * c > 4096)
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < c; ++k) {
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) s += ds.features(i, j) * weights(k, j);
      scores(i, k) = s;
    }

  ds.labels = BinaryMatrix(n, c);
  const double tol = 0.02;  // +/- 2 percentage points
  for (std::size_t k = 0; k < c; ++k) {
    double lo = scores(0, k), hi = scores(0, k);
    for (std::size_t i = 1; i < n; ++i) {
      lo = std::min(lo, scores(i, k));
      hi = std::max(hi, scores(i, k));
    }
    // realized prevalence is a step function of the threshold, monotone
    // decreasing; bisect for at most 50 iterations
    double best_t = hi, best_err = 1.0;
    double a = lo - 1e-9, b = hi + 1e-9;
    for (int iter = 0; iter < 50; ++iter) {
      double t = 0.5 * (a + b);
      std::size_t pos = 0;
      for (std::size_t i = 0; i < n; ++i) pos += scores(i, k) > t ? 1 : 0;
      double realized = double(pos) / double(n);
      double err = std::abs(realized - spec.target_prevalence);
      if (err < best_err) {
        best_err = err;
        best_t = t;
      }
      if (realized > spec.target_prevalence)
        a = t;
      else
        b = t;
    }
    if (best_err > tol)
      throw std::runtime_error("synth_generate: prevalence calibration infeasible for class " +
                               std::to_string(k) + " (off by " + std::to_string(best_err) + ")");
    for (std::size_t i = 0; i < n; ++i) ds.labels.set(i, k, scores(i, k) > best_t);
  }

  ds.ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) ds.ids.push_back(std::to_string(i));
  ds.class_names.reserve(c);
  for (std::size_t k = 0; k < c; ++k) ds.class_names.push_back("c" + std::to_string(k));
  ds.validate();
  return ds;
}

namespace {

MultiLabelDataset take_rows(const MultiLabelDataset& ds, const std::vector<std::size_t>& rows) {
  MultiLabelDataset out;
  out.features = Matrix(rows.size(), ds.feature_dim());
  out.labels = BinaryMatrix(rows.size(), ds.num_classes());
  out.ids.reserve(rows.size());
  out.class_names = ds.class_names;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t r = rows[i];
    for (std::size_t j = 0; j < ds.feature_dim(); ++j) out.features(i, j) = ds.features(r, j);
    for (std::size_t j = 0; j < ds.num_classes(); ++j) out.labels.set(i, j, ds.labels(r, j));
    out.ids.push_back(ds.ids[r]);
  }
  return out;
}

}  // namespace

DatasetSplit split(const MultiLabelDataset& ds, const SplitRatios& ratios, std::uint64_t seed) {
  const double parts[3] = {ratios.train, ratios.val, ratios.test};
  for (double p : parts)
    if (!(p > 0.0)) throw std::invalid_argument("split: all ratios must be positive");
  if (std::abs(parts[0] + parts[1] + parts[2] - 1.0) > 1e-9)
    throw std::invalid_argument("split: ratios must sum to 1");

  const std::size_t n = ds.size();
  // largest-remainder apportionment, ties broken by part index
  std::size_t sizes[3];
  double frac[3];
  std::size_t assigned = 0;
  for (int p = 0; p < 3; ++p) {
    double exact = parts[p] * double(n);
    sizes[p] = static_cast<std::size_t>(std::floor(exact));
    frac[p] = exact - double(sizes[p]);
    assigned += sizes[p];
  }
  while (assigned < n) {
    int best = 0;
    for (int p = 1; p < 3; ++p)
      if (frac[p] > frac[best]) best = p;
    ++sizes[best];
    frac[best] = -1.0;
    ++assigned;
  }
  for (int p = 0; p < 3; ++p)
    if (sizes[p] == 0)
      throw std::invalid_argument("split: degenerate ratios leave part " + std::to_string(p) + " empty");

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(derive_seed(seed, 0x517));
  rng.shuffle(order);

  DatasetSplit out;
  std::vector<std::size_t> part(order.begin(), order.begin() + sizes[0]);
  out.train = take_rows(ds, part);
  part.assign(order.begin() + sizes[0], order.begin() + sizes[0] + sizes[1]);
  out.val = take_rows(ds, part);
  part.assign(order.begin() + sizes[0] + sizes[1], order.end());
  out.test = take_rows(ds, part);
  return out;
}

PrevalenceStats prevalence(const BinaryMatrix& labels) {
  PrevalenceStats out;
  const std::size_t n = labels.rows(), c = labels.cols();
  out.per_class.resize(c, 0.0);
  std::size_t total = 0;
  for (std::size_t k = 0; k < c; ++k) {
    std::size_t pos = labels.count_col(k);
    out.per_class[k] = n ? double(pos) / double(n) : 0.0;
    total += pos;
  }
  out.overall = (n * c) ? double(total) / double(n * c) : 0.0;
  return out;
}

}  // namespace noisylab
