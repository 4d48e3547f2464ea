#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "attn/dense.hpp"
#include "attn/error.hpp"
#include "attn/lattice.hpp"

using namespace attn;

namespace {

// Kronecker-product oracle written independently of the library's indexing.
RowMatrix embed(const Tensor& op, int site, int n) {
  RowMatrix m = RowMatrix::Identity(1, 1);
  for (int s = 0; s < n; ++s) {
    RowMatrix f = s == site ? op.as_matrix(2) : RowMatrix::Identity(2, 2);
    RowMatrix k(m.rows() * 2, m.cols() * 2);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) k.block(2 * i, 2 * j, 2, 2) = m(i, j) * f;
    m = k;
  }
  return m;
}

RowMatrix ising_oracle(int L, double J, double h) {
  const SiteMap map = hilbert_map(L);
  const int n = L * L;
  RowMatrix H = RowMatrix::Zero(1 << n, 1 << n);
  for (auto [a, b] : lattice_edges({L, Geometry::kSquare}, map))
    H -= J * embed(pauli::x(), a, n) * embed(pauli::x(), b, n);
  for (int s = 0; s < n; ++s) H += J * h * embed(pauli::z(), s, n);
  return H;
}

}  // namespace

TEST(Dense, ExportMatchesKroneckerOracle) {
  const auto op = build_ising_tpo({2, Geometry::kSquare}, {1.0, 0.7}, hilbert_map(2));
  const Tensor h = dense_export(op);
  EXPECT_LT((h.as_matrix(16) - ising_oracle(2, 1.0, 0.7)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Dense, GuardRejectsLargeSpaces) {
  const auto op = build_ising_tpo({4, Geometry::kSquare}, {1.0, 1.0}, hilbert_map(4));
  EXPECT_THROW(dense_export(op), ConfigError);
}

TEST(Dense, ZeroFieldIsingGroundEnergies) {
  EXPECT_NEAR(exact_diagonalize(build_ising_tpo({2, Geometry::kSquare}, {1.0, 0.0}, hilbert_map(2))).energy, -4.0,
              1e-12);
  EXPECT_NEAR(exact_diagonalize(build_ising_tpo({4, Geometry::kSquare}, {1.0, 0.0}, hilbert_map(4))).energy,
              -24.0, 1e-9);
}

TEST(Dense, LanczosPathAgreesWithDensePath) {
  const auto op = build_ising_tpo({2, Geometry::kSquare}, {1.0, 3.0}, hilbert_map(2));
  EdOptions lanczos_only;
  lanczos_only.dense_limit = 1;
  const auto a = exact_diagonalize(op);
  const auto b = exact_diagonalize(op, lanczos_only);
  EXPECT_NEAR(a.energy, b.energy, 1e-10);
  Eigen::SelfAdjointEigenSolver<RowMatrix> es(ising_oracle(2, 1.0, 3.0));
  EXPECT_NEAR(a.energy, es.eigenvalues()(0), 1e-12);
  EXPECT_NEAR(expectation(op, b.ground_state), b.energy, 1e-10);
}

TEST(Dense, TwoSiteGateOnNonAdjacentSites) {
  const Tensor u = random_unitary(4, 3).reshape({2, 2, 2, 2});
  Vector psi = Vector::Random(16);
  const Vector out = apply_two_site_gate(u, 0, 2, psi, 4);
  EXPECT_NEAR(out.norm(), psi.norm(), 1e-12);
  // Same action via the Kronecker oracle on sites (0, 2) after a swap of sites 1 and 2.
  RowMatrix swap12 = RowMatrix::Zero(16, 16);
  for (int x = 0; x < 16; ++x) {
    const int b1 = (x >> 2) & 1, b2 = (x >> 1) & 1;
    const int y = (x & ~0b0110) | (b2 << 2) | (b1 << 1);
    swap12(y, x) = 1.0;
  }
  const RowMatrix um = u.reshape({4, 4}).as_matrix(4);
  RowMatrix g = RowMatrix::Zero(16, 16);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) g.block(4 * i, 4 * j, 4, 4) = um(i, j) * RowMatrix::Identity(4, 4);
  const Vector ref = swap12 * g * swap12 * psi;
  EXPECT_LT((out - ref).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Dense, HeisenbergGroundEnergyAgreesWithPowerIteration) {
  const auto op = build_heisenberg_triangular_tpo({2, Geometry::kTriangular}, {1.0, 0.0}, hilbert_map(2));
  const RowMatrix h = dense_export(op).as_matrix(16);
  // Power iteration on c - H converges to c - E0 for c above the spectrum.
  const double c = h.cwiseAbs().rowwise().sum().maxCoeff();
  const RowMatrix shifted = c * RowMatrix::Identity(16, 16) - h;
  Vector v = random_tensor({16}, 5).as_matrix(16).col(0);
  for (int it = 0; it < 20000; ++it) v = (shifted * v).normalized();
  const double power = c - v.dot(shifted * v).real();
  EXPECT_NEAR(exact_diagonalize(op).energy, power, 1e-9);
}
