#include "noisylab/selection.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace noisylab {

namespace {

double clip01(double v) { return std::clamp(v, 0.0, 1.0); }

std::size_t keep_count(double tau, std::size_t m) {
  // ceil biases toward keeping data when batches are small
  return static_cast<std::size_t>(std::ceil((1.0 - tau) * double(m)));
}

}  // namespace

double forget_rate(const ForgetSchedule& sched) {
  if (sched.alpha < 0.0) throw std::invalid_argument("forget_rate: alpha must be >= 0");
  return clip01(sched.alpha * sched.epsilon);
}

double forget_rate(const ForgetSchedule& sched, std::size_t class_index) {
  if (sched.alpha < 0.0) throw std::invalid_argument("forget_rate: alpha must be >= 0");
  if (!sched.class_dependent()) return forget_rate(sched);
  if (class_index >= sched.epsilon_per_class.size())
    throw std::out_of_range("forget_rate: class index out of range");
  return clip01(sched.alpha * sched.epsilon_per_class[class_index]);
}

double ramped_tau(double tau_final, std::size_t epoch, std::size_t ramp_epochs) {
  if (ramp_epochs == 0) return tau_final;
  const double frac = std::min(double(epoch) / double(ramp_epochs), 1.0);
  return tau_final * frac;
}

SelectionMask select_small_loss(const Matrix& losses, double tau) {
  const std::size_t m = losses.size();
  if (m == 0) throw std::invalid_argument("select_small_loss: empty batch");
  for (std::size_t i = 0; i < m; ++i)
    if (!std::isfinite(losses.data()[i]))
      throw std::invalid_argument("select_small_loss: non-finite loss");

  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  // flat index ascending == (instance, class) ascending, giving the fixed tie-break
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return losses.data()[a] < losses.data()[b];
  });

  SelectionMask mask;
  mask.losses = losses;
  mask.keep = BinaryMatrix(losses.rows(), losses.cols());
  mask.kept = std::min(keep_count(tau, m), m);
  for (std::size_t r = 0; r < mask.kept; ++r) mask.keep.data()[order[r]] = 1;
  return mask;
}

SelectionMask select_small_loss_cdnr(const Matrix& losses, std::span<const double> tau_per_class) {
  const std::size_t n = losses.rows(), c = losses.cols();
  if (n * c == 0) throw std::invalid_argument("select_small_loss_cdnr: empty batch");
  if (tau_per_class.size() != c)
    throw std::invalid_argument("select_small_loss_cdnr: need one tau per class");

  SelectionMask mask;
  mask.losses = losses;
  mask.keep = BinaryMatrix(n, c);
  std::vector<std::size_t> order(n);
  for (std::size_t k = 0; k < c; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(losses(i, k)))
        throw std::invalid_argument("select_small_loss_cdnr: non-finite loss");
      order[i] = i;
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return losses(a, k) < losses(b, k); });
    const std::size_t keep = std::min(keep_count(tau_per_class[k], n), n);
    for (std::size_t r = 0; r < keep; ++r) mask.keep.set(order[r], k, true);
    mask.kept += keep;
  }
  return mask;
}

}  // namespace noisylab
