#include <gtest/gtest.h>

#include <array>

#include "attn/error.hpp"
#include "attn/tensor.hpp"

using namespace attn;

TEST(Tensor, MatrixProductMatchesHandValues) {
  Tensor a({2, 2}, {1, 2, 3, 4});
  Tensor b({2, 2}, {5, 6, 7, 8});
  Tensor c = contract(a, b, {{1, 0}});
  const std::array<double, 4> expect{19, 22, 43, 50};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(c[i].real(), expect[i]);
}

TEST(Tensor, ContractOrdersFreeLinks) {
  const Tensor a = random_tensor({2, 3, 4}, 1);
  const Tensor b = random_tensor({4, 5, 3}, 2);
  const Tensor c = contract(a, b, {{1, 2}, {2, 0}});
  ASSERT_EQ(c.shape(), (Shape{2, 5}));
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 5; ++j) {
      Complex s = 0.0;
      for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t l = 0; l < 4; ++l) s += a.at({i, k, l}) * b.at({l, j, k});
      EXPECT_NEAR(std::abs(c.at({i, j}) - s), 0.0, 1e-12);
    }
}

TEST(Tensor, ContractRejectsMismatchedLinks) {
  const Tensor a = random_tensor({2, 3}, 1);
  const Tensor b = random_tensor({4, 2}, 2);
  EXPECT_THROW(contract(a, b, {{1, 0}}), StructureError);
}

TEST(Tensor, PermuteMovesEntries) {
  const Tensor a = random_tensor({2, 3, 4}, 3);
  const Tensor p = a.permute({2, 0, 1});
  ASSERT_EQ(p.shape(), (Shape{4, 2, 3}));
  EXPECT_EQ(p.at({3, 1, 2}), a.at({1, 2, 3}));
}

TEST(Tensor, TraceOfIdentity) {
  const Tensor t = outer(Tensor::identity(3), Tensor::identity(2));
  const Tensor r = trace(t, 0, 1);
  ASSERT_EQ(r.shape(), (Shape{2, 2}));
  EXPECT_DOUBLE_EQ(r.at({0, 0}).real(), 3.0);
  EXPECT_DOUBLE_EQ(r.at({0, 1}).real(), 0.0);
}

TEST(Tensor, QrReconstructsAndIsIsometric) {
  const Tensor t = random_tensor({3, 4, 5}, 4);
  const auto qr = qr_split(t, {0, 2});
  EXPECT_LT(check_isometry(qr.q, {2}).max_deviation, 1e-12);
  const Tensor back = contract(qr.q, qr.r, {{2, 0}}).permute({0, 2, 1});
  EXPECT_LT(max_abs_diff(back, t), 1e-12);
}

TEST(Tensor, RankRevealingQrFindsRank) {
  const Tensor a = random_tensor({6, 2}, 5);
  const Tensor b = random_tensor({2, 6}, 6);
  const Tensor low = contract(a, b, {{1, 0}});
  const auto qr = qr_split_rank_revealing(low, std::array<std::size_t, 1>{0}, 1e-12);
  EXPECT_EQ(qr.q.dim(1), 2u);
  EXPECT_LT(max_abs_diff(contract(qr.q, qr.r, {{1, 0}}), low), 1e-12);
}

TEST(Tensor, SvdReconstructsAndTruncates) {
  const Tensor t = random_tensor({4, 6}, 7);
  const auto full = svd_split(t, {0}, 100, 0.0);
  ASSERT_EQ(full.singular_values.size(), 4u);
  Tensor us = full.u;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t k = 0; k < 4; ++k) us.at({i, k}) *= full.singular_values[k];
  EXPECT_LT(max_abs_diff(contract(us, full.vh, {{1, 0}}), t), 1e-12);
  const auto cut = svd_split(t, {0}, 2, 0.0);
  EXPECT_EQ(cut.singular_values.size(), 2u);
  const double err2 = full.singular_values[2] * full.singular_values[2] + full.singular_values[3] * full.singular_values[3];
  EXPECT_NEAR(cut.truncation_error, std::sqrt(err2), 1e-12);
}

TEST(Tensor, RandomUnitaryIsUnitaryAndSeeded) {
  const Tensor u = random_unitary(4, 11);
  EXPECT_LT(check_isometry(u, {0}).max_deviation, 1e-13);
  EXPECT_LT(check_isometry(u, {1}).max_deviation, 1e-13);
  EXPECT_EQ(max_abs_diff(u, random_unitary(4, 11)), 0.0);
  EXPECT_GT(max_abs_diff(u, random_unitary(4, 12)), 1e-3);
}

TEST(Tensor, InnerIsConjugateLinear) {
  const Tensor a = random_tensor({3}, 1);
  const Complex i1{0.0, 1.0};
  EXPECT_NEAR(std::abs(inner(a * i1, a) + i1 * inner(a, a)), 0.0, 1e-12);
  EXPECT_NEAR(inner(a, a).real(), tensor_norm(a) * tensor_norm(a), 1e-12);
}
