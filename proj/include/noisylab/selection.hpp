#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "noisylab/matrix.hpp"

namespace noisylab {

/// Forget-rate schedule: tau = clip(alpha * epsilon, 0, 1), optionally
/// class-dependent via per-class noise rates, linearly ramped over the first
/// ramp_epochs epochs.
struct ForgetSchedule {
  double alpha = 1.0;
  double epsilon = 0.0;
  std::vector<double> epsilon_per_class;  // empty disables class-dependent rates
  std::size_t ramp_epochs = 10;

  bool class_dependent() const { return !epsilon_per_class.empty(); }
};

/// Global forget rate tau = clip(alpha * epsilon, 0, 1).
double forget_rate(const ForgetSchedule& sched);

/// Class-dependent forget rate tau_c = clip(alpha * epsilon_c, 0, 1).
double forget_rate(const ForgetSchedule& sched, std::size_t class_index);

/// Linear ramp: tau(t) = tau_final * min(t / ramp_epochs, 1).
/// ramp_epochs = 0 means tau(t) = tau_final from the start.
double ramped_tau(double tau_final, std::size_t epoch, std::size_t ramp_epochs);

/// Per-batch keep decisions plus the losses they were based on.
struct SelectionMask {
  BinaryMatrix keep;  // aligned with the batch's loss matrix
  Matrix losses;
  std::size_t kept = 0;
};

/// Pooled small-loss selection: keeps the ceil((1 - tau) * M) smallest-loss
/// cells of the M cells in the batch. Ties break by (instance, class) ascending.
SelectionMask select_small_loss(const Matrix& losses, double tau);

/// Class-dependent variant: within each class column, keeps the
/// ceil((1 - tau_c) * M_c) smallest-loss cells.
SelectionMask select_small_loss_cdnr(const Matrix& losses, std::span<const double> tau_per_class);

}  // namespace noisylab
