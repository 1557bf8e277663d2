// Compares the OpenMP model kernels against the serial reference on a
// training-sized problem: wall time per kernel and the largest deviation.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "noisylab/model.hpp"
#include "noisylab/reference.hpp"
#include "noisylab/rng.hpp"

using namespace noisylab;

namespace {

double now_ms() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

double max_abs_diff(const MlpParams& a, const MlpParams& b) {
  double m = max_abs_diff(a.w1, b.w1);
  m = std::max(m, max_abs_diff(a.w2, b.w2));
  for (std::size_t i = 0; i < a.b1.size(); ++i) m = std::max(m, std::abs(a.b1[i] - b.b1[i]));
  for (std::size_t i = 0; i < a.b2.size(); ++i) m = std::max(m, std::abs(a.b2[i] - b.b2[i]));
  return m;
}

template <typename F>
double time_best_of(int reps, F&& f) {
  double best = 1e30;
  for (int r = 0; r < reps; ++r) {
    const double t0 = now_ms();
    f();
    best = std::min(best, now_ms() - t0);
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t n = 8192, d = 128, h = 256, c = 20;
  int reps = 3;
  if (argc > 1) n = std::strtoull(argv[1], nullptr, 10);
  if (argc > 2) d = std::strtoull(argv[2], nullptr, 10);
  if (argc > 3) h = std::strtoull(argv[3], nullptr, 10);
  if (argc > 4) c = std::strtoull(argv[4], nullptr, 10);

#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (OpenMP off)\n");
#endif
  std::printf("problem: N=%zu d=%zu h=%zu C=%zu\n", n, d, h, c);

  Rng rng(42);
  Matrix x(n, d);
  for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  BinaryMatrix y(n, c);
  for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] = rng.uniform01() < 0.2 ? 1 : 0;
  Matrix weights(n, c, 1.0);
  MlpParams params = init_params(d, h, c, 7);
  AslConfig cfg;

  Matrix probs_par, probs_ref, loss_par, loss_ref;
  MlpParams grads_par, grads_ref;

  const double t_fwd = time_best_of(reps, [&] { probs_par = forward(params, x); });
  const double t_fwd_ref = time_best_of(reps, [&] { probs_ref = ref::forward(params, x); });
  const double t_loss = time_best_of(reps, [&] { loss_par = asl_loss(probs_par, y, cfg); });
  const double t_loss_ref = time_best_of(reps, [&] { loss_ref = ref::asl_loss(probs_ref, y, cfg); });
  const double t_bwd = time_best_of(reps, [&] { grads_par = backward(params, x, y, cfg, weights); });
  const double t_bwd_ref =
      time_best_of(reps, [&] { grads_ref = ref::backward(params, x, y, cfg, weights); });

  std::printf("%-10s %12s %12s %9s %12s\n", "kernel", "omp (ms)", "serial (ms)", "speedup",
              "max |diff|");
  std::printf("%-10s %12.2f %12.2f %8.2fx %12.3e\n", "forward", t_fwd, t_fwd_ref,
              t_fwd_ref / t_fwd, max_abs_diff(probs_par, probs_ref));
  std::printf("%-10s %12.2f %12.2f %8.2fx %12.3e\n", "asl_loss", t_loss, t_loss_ref,
              t_loss_ref / t_loss, max_abs_diff(loss_par, loss_ref));
  std::printf("%-10s %12.2f %12.2f %8.2fx %12.3e\n", "backward", t_bwd, t_bwd_ref,
              t_bwd_ref / t_bwd, max_abs_diff(grads_par, grads_ref));

  const bool ok = max_abs_diff(probs_par, probs_ref) < 1e-9 &&
                  max_abs_diff(loss_par, loss_ref) < 1e-9 &&
                  max_abs_diff(grads_par, grads_ref) < 1e-9;
  if (!ok) {
    std::printf("FAIL: kernels disagree with the serial reference\n");
    return 1;
  }
  return 0;
}
