#include "attn/lanczos.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "attn/error.hpp"

namespace attn {

namespace {

bool all_finite(const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (!std::isfinite(v(i).real()) || !std::isfinite(v(i).imag())) return false;
  return true;
}

}  // namespace

LanczosResult lanczos_lowest(const LinearMap& apply, Vector start, const LanczosOptions& options) {
  const Eigen::Index n = start.size();
  if (n == 0) throw StructureError("lanczos: empty start vector");
  double nrm = start.norm();
  if (!all_finite(start)) throw NumericalError("lanczos: non-finite start vector");
  if (nrm == 0.0) {
    start.setZero();
    start(0) = 1.0;
    nrm = 1.0;
  }
  start /= nrm;

  LanczosResult res;
  Vector w(n);
  apply(start, w);
  res.iterations = 1;
  if (!all_finite(w)) throw NumericalError("lanczos: non-finite matrix-vector product");
  res.eigenvalue = start.dot(w).real();
  res.vector = start;
  res.residual = (w - res.eigenvalue * start).norm();
  if (res.residual < options.tol || n == 1) {
    res.converged = true;
    return res;
  }

  const int kmax = static_cast<int>(std::min<Eigen::Index>(options.krylov_dim, n));
  Vector v0 = start;
  Vector av0 = w;
  while (res.iterations < options.max_iter) {
    std::vector<Vector> basis{v0};
    std::vector<double> alpha, beta;
    Vector aw = av0;
    bool breakdown = false;
    for (int j = 0; j < kmax; ++j) {
      if (j > 0) {
        apply(basis[static_cast<std::size_t>(j)], aw);
        ++res.iterations;
        if (!all_finite(aw)) throw NumericalError("lanczos: non-finite matrix-vector product");
      }
      const double a = basis[static_cast<std::size_t>(j)].dot(aw).real();
      alpha.push_back(a);
      Vector r = aw;
      // Full reorthogonalization, applied twice for stability.
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& b : basis) r -= b * b.dot(r);
      const double bnext = r.norm();
      if (j + 1 == kmax || res.iterations >= options.max_iter) {
        beta.push_back(bnext);
        break;
      }
      if (bnext < 1e-14 * std::max(1.0, std::abs(a))) {
        breakdown = true;
        beta.push_back(0.0);
        break;
      }
      beta.push_back(bnext);
      basis.push_back(r / bnext);
    }

    const auto k = static_cast<Eigen::Index>(alpha.size());
    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
      tri(i, i) = alpha[static_cast<std::size_t>(i)];
      if (i + 1 < k) tri(i, i + 1) = tri(i + 1, i) = beta[static_cast<std::size_t>(i)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
    const double theta = es.eigenvalues()(0);
    const Eigen::VectorXd y = es.eigenvectors().col(0);
    Vector ritz = Vector::Zero(n);
    for (Eigen::Index i = 0; i < k; ++i) ritz += basis[static_cast<std::size_t>(i)] * y(i);
    ritz.normalize();
    const double est_residual = breakdown ? 0.0 : std::abs(beta.back() * y(k - 1));

    if (theta <= res.eigenvalue + 1e-14 * std::max(1.0, std::abs(theta))) {
      res.eigenvalue = theta;
      res.vector = ritz;
    }
    apply(res.vector, av0);
    ++res.iterations;
    res.eigenvalue = res.vector.dot(av0).real();
    res.residual = (av0 - res.eigenvalue * res.vector).norm();
    if (res.residual < options.tol || breakdown || est_residual == 0.0) {
      res.converged = res.residual < std::max(options.tol, 1e-10);
      break;
    }
    v0 = res.vector;
  }
  res.converged = res.converged || res.residual < options.tol;
  return res;
}

}  // namespace attn
