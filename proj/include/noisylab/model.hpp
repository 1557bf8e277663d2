#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "noisylab/matrix.hpp"

namespace noisylab {

/// One-hidden-layer perceptron: tanh hidden units, sigmoid outputs.
/// Also reused as the container for gradients and Adam moments.
struct MlpParams {
  Matrix w1;               // d x h
  std::vector<double> b1;  // h
  Matrix w2;               // h x C
  std::vector<double> b2;  // C

  std::size_t input_dim() const { return w1.rows(); }
  std::size_t hidden() const { return w1.cols(); }
  std::size_t classes() const { return w2.cols(); }

  static MlpParams zeros(std::size_t d, std::size_t h, std::size_t c);
  bool all_finite() const;
};

/// Weights from a symmetric uniform scaled by fan-in, biases zero.
MlpParams init_params(std::size_t d, std::size_t h, std::size_t c, std::uint64_t seed);

/// Asymmetric loss configuration. Defaults are the usual ASL settings.
struct AslConfig {
  double gamma_pos = 0.0;  // focusing exponent on positives
  double gamma_neg = 4.0;  // focusing exponent on negatives
  double margin = 0.05;    // probability shift for negatives, in [0,1)
};

/// probabilities = sigmoid(tanh(X w1 + b1) w2 + b2), N x C, all in (0,1).
Matrix forward(const MlpParams& params, const Matrix& x);

/// Per-cell asymmetric loss. Probabilities are clamped to [1e-7, 1 - 1e-7]
/// before any log.
Matrix asl_loss(const Matrix& probs, const BinaryMatrix& labels, const AslConfig& cfg);

/// Exact gradient of the weighted mean of per-cell losses,
///   sum(w .* L) / sum(w),
/// with all-zero weights giving zero gradients. cell_weights implement
/// label-level selection: dropped cells carry weight 0.
MlpParams backward(const MlpParams& params, const Matrix& x, const BinaryMatrix& labels,
                   const AslConfig& cfg, const Matrix& cell_weights);

struct AdamState {
  MlpParams m;
  MlpParams v;
  long t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_hat = 1e-8;

  static AdamState init(const MlpParams& like);
};

/// Standard bias-corrected Adam update. Throws on non-finite gradients
/// (surfaces training divergence instead of propagating NaNs).
void adam_step(AdamState& state, MlpParams& params, const MlpParams& grads, double lr);

/// 1-cycle policy: cosine rise from max_lr/25 to max_lr over the warmup span,
/// cosine fall to max_lr/1e4 at the last step.
struct OneCycleSchedule {
  double max_lr = 1e-3;
  std::size_t total_steps = 1;
  double warmup_fraction = 0.3;
};

double one_cycle_lr(const OneCycleSchedule& sched, std::size_t step);

/// Flat binary checkpoint: header (d, h, C, seed) as u64, then row-major
/// doubles for w1, b1, w2, b2 in declaration order.
void save_checkpoint(const MlpParams& params, std::uint64_t seed,
                     const std::filesystem::path& path);
MlpParams load_checkpoint(const std::filesystem::path& path, std::uint64_t* seed_out = nullptr);

}  // namespace noisylab
