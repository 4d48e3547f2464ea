#pragma once

#include <functional>

#include <Eigen/Core>

#include "attn/tensor.hpp"

namespace attn {

using Vector = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;
/// y = A x for a Hermitian A.
using LinearMap = std::function<void(const Vector& x, Vector& y)>;

struct LanczosOptions {
  int max_iter = 100;    ///< cap on matrix-vector products
  double tol = 1e-9;     ///< residual norm ||A v - e v|| for convergence
  int krylov_dim = 32;   ///< restart length
};

struct LanczosResult {
  double eigenvalue = 0.0;
  Vector vector;  ///< normalized
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Lowest eigenpair of a Hermitian map by restarted Lanczos with full
/// reorthogonalization. The returned eigenvalue never exceeds the Rayleigh
/// quotient of `start`.
LanczosResult lanczos_lowest(const LinearMap& apply, Vector start, const LanczosOptions& options);

}  // namespace attn
