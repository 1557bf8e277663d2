#pragma once

#include "noisylab/matrix.hpp"
#include "noisylab/model.hpp"

namespace noisylab::ref {

// Serial reference implementations of the model kernels, written independently
// of the OpenMP versions. They are the comparison side of the kernel tests and
// of the bench_kernels tool; keep them naive and do not share code with
// src/model.cpp.

Matrix forward(const MlpParams& params, const Matrix& x);
Matrix asl_loss(const Matrix& probs, const BinaryMatrix& labels, const AslConfig& cfg);
MlpParams backward(const MlpParams& params, const Matrix& x, const BinaryMatrix& labels,
                   const AslConfig& cfg, const Matrix& cell_weights);

}  // namespace noisylab::ref
