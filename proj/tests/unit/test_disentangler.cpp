#include <gtest/gtest.h>

#include "attn/dense.hpp"
#include "attn/disentangler.hpp"
#include "attn/error.hpp"
#include "attn/lattice.hpp"

using namespace attn;

namespace {

Tensor gate(std::uint64_t seed) { return random_unitary(4, seed).reshape({2, 2, 2, 2}); }

// Dense D H D^dagger built column by column from the dense H.
RowMatrix conjugated_dense(const TpoOperator& op, const DisentanglerLayer& layer) {
  const RowMatrix h = dense_export(op).as_matrix(std::size_t{1} << op.num_sites());
  const Eigen::Index n = h.rows();
  RowMatrix out(n, n);
  // (D H D^dagger) e_j = D H (D^dagger e_j)
  for (Eigen::Index j = 0; j < n; ++j) {
    Vector e = Vector::Zero(n);
    e(j) = 1.0;
    const Vector x = apply_layer_dense(layer, e, true);
    out.col(j) = apply_layer_dense(layer, h * x, false);
  }
  return out;
}

TpoOperator ising(int L, double h) { return build_ising_tpo({L, Geometry::kSquare}, {1.0, h}, hilbert_map(L)); }

}  // namespace

TEST(Disentangler, AbsorbedOperatorMatchesDenseConjugation) {
  const TpoOperator op = build_heisenberg_triangular_tpo({2, Geometry::kTriangular}, {1.0, 0.0}, hilbert_map(2));
  DisentanglerLayer layer{4, 2, {{1, 2, gate(3)}}};
  const TpoOperator hp = contract_de_layer(op, layer);
  const RowMatrix ref = conjugated_dense(op, layer);
  EXPECT_LT((dense_export(hp).as_matrix(16) - ref).cwiseAbs().maxCoeff(), 1e-12);
  AbsorbOptions svd;
  svd.use_svd = true;
  EXPECT_LT((dense_export(contract_de_layer(op, layer, svd)).as_matrix(16) - ref).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Disentangler, AbsorbIntoNonAdjacentTerm) {
  const auto term = TpoTerm::product({0, 5}, {pauli::x(), pauli::y()}, 0.7);
  const Tensor u = gate(8);
  const TpoTerm out = conjugate_term(term, u, 2, 5);
  EXPECT_EQ(out.sites, (std::vector<int>{0, 2, 5}));
  TpoOperator op(8, 2), hp(8, 2);
  op.add_term(term);
  hp.add_term(out);
  DisentanglerLayer layer{8, 2, {{2, 5, u}}};
  EXPECT_LT((dense_export(hp).as_matrix(256) - conjugated_dense(op, layer)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Disentangler, IdentityGateKeepsTheTerm) {
  const auto term = TpoTerm::product({1, 6}, {pauli::z(), pauli::z()}, -1.0);
  const Tensor id = Tensor::identity(4).reshape({2, 2, 2, 2});
  const TpoTerm out = conjugate_term(term, id, 3, 6);
  EXPECT_EQ(out.sites, term.sites);
  EXPECT_EQ(out.max_bond(), 1u);
  EXPECT_LT(max_abs_diff(out.dense(), term.dense()), 1e-13);
}

TEST(Disentangler, RecompressedBondStaysSmall) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    TpoTerm t;
    t.sites = {1, 4};
    t.site_tensors = {random_tensor({1, 2, 2, 1}, seed), random_tensor({1, 2, 2, 1}, seed + 100)};
    EXPECT_LE(conjugate_term(t, gate(seed + 7), 1, 4).max_bond(), 4u);
    EXPECT_LE(conjugate_term(t, gate(seed + 9), 4, 6).max_bond(), 4u);
  }
}

TEST(Disentangler, TermOnTwoGatesIsRejected) {
  TpoOperator op(8, 2);
  op.add_term(TpoTerm::product({1, 4}, {pauli::x(), pauli::x()}));
  DisentanglerLayer layer{8, 2, {{0, 1, gate(1)}, {4, 7, gate(2)}}};
  try {
    contract_de_layer(op, layer);
    FAIL() << "expected PlacementError";
  } catch (const PlacementError& e) {
    EXPECT_EQ(e.rule(), PlacementRule::kSharedTerm);
    EXPECT_EQ(e.error_class(), ErrorClass::kPlacement);
  }
}

TEST(Disentangler, EnvironmentReproducesDenseEnergy) {
  const TpoOperator op = ising(4, 3.0);
  auto state = init_random_ttn(16, 2, 4, 11);
  const Vector psi = to_state_vector(state);
  for (auto [a, b] : std::vector<std::pair<int, int>>{{1, 14}, {3, 4}, {5, 10}}) {
    TpoOperator touching(16, 2);
    for (const auto& t : op.all_terms())
      if (t.contains(a) || t.contains(b)) touching.add_term(t);
    const auto env = build_global_environment(state, op, a, b);
    for (std::uint64_t s = 0; s < 3; ++s) {
      const Tensor u = gate(100 * a + s);
      DisentanglerLayer layer{16, 2, {{a, b, u}}};
      const Vector phi = apply_layer_dense(layer, psi, true);
      const double dense = phi.dot(apply_operator(touching, phi)).real();
      EXPECT_NEAR(environment_energy(env, u), dense, 1e-11) << a << "," << b;
    }
  }
}

TEST(Disentangler, SvdUpdateBeatsRandomGates) {
  const Tensor gamma = random_tensor({4, 4}, 5);
  const Tensor best = svd_update(gamma);
  auto value = [&](const Tensor& u) { return (u.reshape({4, 4}).as_matrix(4) * gamma.as_matrix(4)).trace().real(); };
  EXPECT_LT(check_isometry(best, {0, 1}).max_deviation, 1e-13);
  for (std::uint64_t s = 0; s < 200; ++s) EXPECT_LE(value(best), value(gate(s)) + 1e-12);
}

TEST(Disentangler, OptimizationNeverRaisesTheEnergy) {
  const TpoOperator op = ising(4, 3.0);
  auto state = init_random_ttn(16, 2, 8, 2);
  auto layer = place_disentanglers(op, state.shape(), 8);
  ASSERT_FALSE(layer.empty());
  const auto report = optimize_layer(state, op, layer);
  EXPECT_LE(report.energy_after, report.energy_before + 1e-12);
  EXPECT_LT(layer.max_unitarity_deviation(), 1e-12);
  for (const auto& g : report.per_gate) EXPECT_LE(g.energy, g.initial_energy + 1e-12);
  // Energy of H' on the TTN equals the dense aTTN energy.
  const Vector phi = apply_layer_dense(layer, to_state_vector(state), true);
  EXPECT_NEAR(report.energy_after, expectation(op, phi), 1e-10);
}

TEST(Placement, GreedyLayerIsValid) {
  const TpoOperator op = ising(4, 1.0);
  const TreeShape shape(16);
  const auto layer = place_disentanglers(op, shape, 8);
  EXPECT_NO_THROW(validate_layer(layer, op, shape, 8));
  for (const auto& e : layer.entries) EXPECT_FALSE(path_untruncated(shape, 2, 8, e.site_a, e.site_b));
  EXPECT_TRUE(place_disentanglers(op, shape, 256).empty());
  PlacementOptions one;
  one.budget = 1;
  EXPECT_EQ(place_disentanglers(op, shape, 8, one).size(), 1u);
}

TEST(Placement, ViolationsAreClassified) {
  const TpoOperator op = ising(4, 1.0);
  const TreeShape shape(16);
  const auto base = place_disentanglers(op, shape, 8);
  ASSERT_FALSE(base.empty());
  auto expect_rule = [&](DisentanglerLayer layer, PlacementRule rule) {
    try {
      validate_layer(layer, op, shape, 8);
      ADD_FAILURE() << "no error for " << placement_rule_name(rule);
    } catch (const PlacementError& e) {
      EXPECT_EQ(e.rule(), rule) << e.what();
    }
  };
  const Tensor id = Tensor::identity(4).reshape({2, 2, 2, 2});
  expect_rule({16, 2, {{2, 3, id}}}, PlacementRule::kSameTensor);
  expect_rule({16, 2, {{0, 15, id}}}, PlacementRule::kNotOnTerm);
  expect_rule({16, 2, {{5, 3, id}}}, PlacementRule::kSiteRange);
  expect_rule({16, 2, {{4, 16, id}}}, PlacementRule::kSiteRange);
  expect_rule({16, 2, {{1, 2, id}}}, PlacementRule::kUntruncated);
  auto overlap = base;
  overlap.entries.push_back(base.entries.front());
  expect_rule(overlap, PlacementRule::kSiteOverlap);
  auto shaped = base;
  shaped.entries.front().u = Tensor::identity(4);
  expect_rule(shaped, PlacementRule::kShape);
}

TEST(Disentangler, ModelEnergyDoesNotIncrease) {
  const TpoOperator op = ising(4, 3.0);
  auto state = init_random_ttn(16, 2, 8, 4);
  const auto layer = place_disentanglers(op, state.shape(), 8);
  DisentanglerOptOptions options;
  options.max_iter = 25;
  options.rel_deviation = 1e-14;
  for (const auto& e : layer.entries) {
    const auto env = build_global_environment(state, op, e.site_a, e.site_b);
    for (const Tensor& u0 : {e.u, gate(static_cast<std::uint64_t>(e.site_a))}) {
      const auto res = optimize_disentangler(env, u0, options);
      for (std::size_t k = 1; k < res.model_trace.size(); ++k)
        EXPECT_LE(res.model_trace[k], res.model_trace[k - 1] + 1e-10) << e.site_a << "," << e.site_b << " step " << k;
      EXPECT_EQ(res.rejected, res.energy >= res.initial_energy);
    }
  }
}
