#pragma once

#include <vector>

#include "attn/effective.hpp"
#include "attn/ttn.hpp"

namespace attn {

struct LocalSolverOptions {
  int max_iter = 100;  ///< Lanczos matrix-vector products per tensor
  double tol = 1e-9;
};

struct LocalSolveResult {
  Tensor tensor;  ///< normalized
  double energy = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Lowest eigenvector of the local effective Hamiltonian, warm-started from `start`.
LocalSolveResult lanczos_ground(const Tensor& start, const LocalHamiltonian& h, const LocalSolverOptions& options);

struct SweepResult {
  double energy = 0.0;                ///< energy after the last local update
  std::vector<double> local_energies;  ///< one per tensor, in sweep order
  int unconverged = 0;                 ///< local solves that missed the tolerance
};

/// One post-order sweep of single-tensor updates. The isometry center is
/// moved to each tensor before it is optimized and ends on the top tensor.
SweepResult dmrg_sweep(TtnState& state, EffectiveOperators& eff, const LocalSolverOptions& options);

}  // namespace attn
