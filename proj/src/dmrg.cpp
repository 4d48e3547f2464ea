#include "attn/dmrg.hpp"

#include "attn/error.hpp"

namespace attn {

LocalSolveResult lanczos_ground(const Tensor& start, const LocalHamiltonian& h, const LocalSolverOptions& options) {
  const Shape shape = start.shape();
  const auto n = static_cast<Eigen::Index>(start.size());
  auto to_tensor = [&](const Vector& v) {
    Tensor t(shape);
    for (Eigen::Index i = 0; i < n; ++i) t[static_cast<std::size_t>(i)] = v(i);
    return t;
  };
  const LinearMap apply = [&](const Vector& x, Vector& y) {
    const Tensor r = h.apply(to_tensor(x));
    y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = r[static_cast<std::size_t>(i)];
  };
  Vector v0(n);
  for (Eigen::Index i = 0; i < n; ++i) v0(i) = start[static_cast<std::size_t>(i)];
  LanczosOptions lo;
  lo.max_iter = options.max_iter;
  lo.tol = options.tol;
  const auto res = lanczos_lowest(apply, v0, lo);
  return {to_tensor(res.vector), res.eigenvalue, res.iterations, res.converged};
}

SweepResult dmrg_sweep(TtnState& state, EffectiveOperators& eff, const LocalSolverOptions& options) {
  SweepResult out;
  for (const NodeId v : state.shape().sweep_order()) {
    state.isometrize_towards(v);
    const LocalHamiltonian h = eff.local_hamiltonian(state, v);
    auto solved = lanczos_ground(state.tensor(v), h, options);
    if (!solved.converged) ++out.unconverged;
    state.set_center_tensor(std::move(solved.tensor));
    out.local_energies.push_back(solved.energy);
    out.energy = solved.energy;
  }
  return out;
}

}  // namespace attn
