#include <gtest/gtest.h>

#include "attn/dense.hpp"
#include "attn/effective.hpp"
#include "attn/error.hpp"
#include "attn/lattice.hpp"

using namespace attn;

namespace {

// Random term over the given sites with horizontal bonds of dimension 2.
TpoTerm random_chain_term(std::vector<int> sites, std::uint64_t seed) {
  TpoTerm t;
  t.sites = std::move(sites);
  const std::size_t n = t.sites.size();
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t hl = j == 0 ? 1 : 2, hr = j + 1 == n ? 1 : 2;
    t.site_tensors.push_back(random_tensor({hl, 2, 2, hr}, seed * 31 + j));
  }
  t.prefactor = Complex(0.3, 0.0);
  return t;
}

// Hermitian operator: every random term is added together with its adjoint.
TpoOperator random_hermitian_operator(int n, std::uint64_t seed) {
  TpoOperator op(n, 2);
  auto add = [&](TpoTerm t) {
    TpoTerm adj = t;
    for (auto& w : adj.site_tensors) w = w.conj().permute({0, 2, 1, 3});
    adj.prefactor = std::conj(t.prefactor);
    op.add_term(std::move(t));
    op.add_term(std::move(adj));
  };
  add(random_chain_term({0, 3}, seed + 1));
  add(random_chain_term({1, 2, 6}, seed + 2));
  add(random_chain_term({2, 5, 6, 7}, seed + 3));
  add(random_chain_term({4, 7}, seed + 4));
  op.add_local(5, pauli::z(), 0.4);
  op.add_local(0, pauli::x(), -0.2);
  return op;
}

}  // namespace

TEST(Effective, EnergyMatchesDenseOracleAtEveryCenter) {
  const TpoOperator op = random_hermitian_operator(8, 5);
  auto state = init_random_ttn(8, 2, 3, 9);
  const Vector psi = to_state_vector(state);
  const double exact = expectation(op, psi);
  EffectiveOperators eff(op, state.shape());
  for (int f = 0; f < state.shape().num_nodes(); ++f) {
    const NodeId v = state.shape().node(f);
    state.isometrize_towards(v);
    EXPECT_NEAR(eff.energy(state), exact, 1e-11) << "center (" << v.level << "," << v.index << ")";
  }
}

TEST(Effective, IsingAndHeisenbergOnSixteenSites) {
  const auto map = hilbert_map(4);
  for (const auto& op : {build_ising_tpo({4, Geometry::kSquare}, {1.0, 3.0}, map),
                         build_heisenberg_triangular_tpo({4, Geometry::kTriangular}, {1.0, 0.0}, map)}) {
    auto state = init_random_ttn(16, 2, 5, 2);
    const double exact = expectation(op, to_state_vector(state));
    const auto eff = build_effective_operators(state, op);
    EffectiveOperators lazy(op, state.shape());
    EXPECT_NEAR(lazy.energy(state), exact, 1e-11);
    state.isometrize_towards({0, 6});
    EXPECT_NEAR(lazy.energy(state), exact, 1e-11);
    EXPECT_EQ(eff.terms().size(), op.all_terms().size());
  }
}

TEST(Effective, LocalHamiltonianIsHermitian) {
  const TpoOperator op = random_hermitian_operator(8, 1);
  auto state = init_random_ttn(8, 2, 4, 4);
  state.isometrize_towards({1, 1});
  EffectiveOperators eff(op, state.shape());
  const auto h = eff.local_hamiltonian(state, {1, 1});
  const Tensor a = random_tensor(state.tensor({1, 1}).shape(), 1);
  const Tensor b = random_tensor(state.tensor({1, 1}).shape(), 2);
  EXPECT_NEAR(std::abs(inner(a, h.apply(b)) - std::conj(inner(b, h.apply(a)))), 0.0, 1e-12);
}

TEST(Effective, RejectsNonCenterTensor) {
  const TpoOperator op = random_hermitian_operator(8, 1);
  auto state = init_random_ttn(8, 2, 4, 4);
  EffectiveOperators eff(op, state.shape());
  EXPECT_THROW(eff.local_hamiltonian(state, {0, 0}), StructureError);
}
