#include <gtest/gtest.h>

#include "attn/dense.hpp"
#include "attn/dmrg.hpp"
#include "attn/lattice.hpp"

using namespace attn;

namespace {

double run_sweeps(TtnState& state, const TpoOperator& op, int sweeps, std::vector<double>* trace = nullptr) {
  EffectiveOperators eff(op, state.shape());
  double e = 0.0;
  for (int s = 0; s < sweeps; ++s) {
    e = dmrg_sweep(state, eff, {}).energy;
    if (trace) trace->push_back(e);
  }
  return e;
}

}  // namespace

TEST(Dmrg, IsingTwoByTwoIsExactAtFullBond) {
  const auto op = build_ising_tpo({2, Geometry::kSquare}, {1.0, 3.0}, hilbert_map(2));
  auto state = init_random_ttn(4, 2, 4, 1);
  const double e = run_sweeps(state, op, 4);
  const double ed = exact_diagonalize(op).energy;
  EXPECT_NEAR(e, ed, 1e-8 * std::abs(ed));
  EXPECT_NEAR(expectation(op, to_state_vector(state)), e, 1e-9);
}

TEST(Dmrg, SweepEnergiesDoNotIncrease) {
  const auto op = build_ising_tpo({4, Geometry::kSquare}, {1.0, 3.0}, hilbert_map(4));
  auto state = init_random_ttn(16, 2, 4, 3);
  std::vector<double> trace;
  run_sweeps(state, op, 5, &trace);
  for (std::size_t k = 1; k < trace.size(); ++k) EXPECT_LE(trace[k], trace[k - 1] + 1e-10);
  EXPECT_GE(trace.back(), exact_diagonalize(op).energy - 1e-9);
  EXPECT_LT(max_isometry_deviation(state), 1e-10);
}

TEST(Dmrg, LocalSolveLowersEnergy) {
  const auto op = build_ising_tpo({2, Geometry::kSquare}, {1.0, 1.0}, hilbert_map(2));
  auto state = init_random_ttn(4, 2, 2, 5);
  EffectiveOperators eff(op, state.shape());
  const auto h = eff.local_hamiltonian(state, state.shape().top());
  const double before = h.energy(state.tensor(state.shape().top()));
  const auto r = lanczos_ground(state.tensor(state.shape().top()), h, {});
  EXPECT_LE(r.energy, before + 1e-12);
  EXPECT_NEAR(tensor_norm(r.tensor), 1.0, 1e-12);
}
