#include "attn/dense.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include <Eigen/Eigenvalues>

#include "attn/error.hpp"

namespace attn {

namespace {

std::size_t hilbert_dim(int num_sites, std::size_t d) {
  std::size_t dim = 1;
  for (int s = 0; s < num_sites; ++s) {
    if (dim > (std::size_t{1} << 40) / d) throw ConfigError("Hilbert space too large");
    dim *= d;
  }
  return dim;
}

/// Offsets of every sub-configuration of `sites` in the full index.
std::vector<std::size_t> site_offsets(std::span<const int> sites, int num_sites, std::size_t d) {
  std::vector<std::size_t> stride(sites.size());
  for (std::size_t k = 0; k < sites.size(); ++k) {
    std::size_t s = 1;
    for (int j = sites[k] + 1; j < num_sites; ++j) s *= d;
    stride[k] = s;
  }
  std::size_t sub_dim = 1;
  for (std::size_t k = 0; k < sites.size(); ++k) sub_dim *= d;
  std::vector<std::size_t> off(sub_dim, 0);
  for (std::size_t sub = 0; sub < sub_dim; ++sub) {
    std::size_t rem = sub, acc = 0;
    for (std::size_t k = sites.size(); k-- > 0;) {
      acc += (rem % d) * stride[k];
      rem /= d;
    }
    off[sub] = acc;
  }
  return off;
}

std::vector<std::size_t> site_strides(std::span<const int> sites, int num_sites, std::size_t d) {
  std::vector<std::size_t> stride;
  for (int s : sites) {
    std::size_t st = 1;
    for (int j = s + 1; j < num_sites; ++j) st *= d;
    stride.push_back(st);
  }
  return stride;
}

inline std::size_t sub_index(std::size_t full, const std::vector<std::size_t>& strides, std::size_t d) {
  std::size_t sub = 0;
  for (auto st : strides) sub = sub * d + (full / st) % d;
  return sub;
}

}  // namespace

Vector apply_on_sites(const Tensor& m, std::span<const int> sites, const Vector& psi, int num_sites,
                      std::size_t local_dim) {
  const std::size_t dim = hilbert_dim(num_sites, local_dim);
  if (static_cast<std::size_t>(psi.size()) != dim) throw StructureError("apply_on_sites: state size mismatch");
  const auto off = site_offsets(sites, num_sites, local_dim);
  const auto strides = site_strides(sites, num_sites, local_dim);
  const std::size_t sub_dim = off.size();
  if (m.shape() != Shape{sub_dim, sub_dim}) throw StructureError("apply_on_sites: operator size mismatch");
  Vector out = Vector::Zero(psi.size());
  for (std::size_t x = 0; x < dim; ++x) {
    const Complex amp = psi(static_cast<Eigen::Index>(x));
    if (amp == Complex{0.0}) continue;
    const std::size_t sin = sub_index(x, strides, local_dim);
    const std::size_t base = x - off[sin];
    for (std::size_t sout = 0; sout < sub_dim; ++sout) {
      const Complex v = m[sout * sub_dim + sin];
      if (v != Complex{0.0}) out(static_cast<Eigen::Index>(base + off[sout])) += v * amp;
    }
  }
  return out;
}

Vector apply_term(const TpoTerm& term, const Vector& psi, int num_sites) {
  return apply_on_sites(term.dense(), term.sites, psi, num_sites, term.local_dim());
}

Vector apply_operator(const TpoOperator& op, const Vector& psi) {
  Vector out = Vector::Zero(psi.size());
  for (const auto& t : op.all_terms()) out += apply_term(t, psi, op.num_sites());
  return out;
}

double expectation(const TpoOperator& op, const Vector& psi) {
  return psi.dot(apply_operator(op, psi)).real() / psi.squaredNorm();
}

Vector apply_two_site_gate(const Tensor& gate, int site_a, int site_b, const Vector& psi, int num_sites) {
  if (gate.rank() != 4) throw StructureError("apply_two_site_gate: gate must have four links");
  const std::size_t d = gate.dim(0);
  const int sites[2] = {site_a, site_b};
  if (site_a >= site_b) throw StructureError("apply_two_site_gate: need site_a < site_b");
  return apply_on_sites(gate.reshape({d * d, d * d}), sites, psi, num_sites, d);
}

Tensor dense_export(const TpoOperator& op, DenseGuard guard) {
  const std::size_t dim = hilbert_dim(op.num_sites(), op.local_dim());
  if (dim > guard.max_dim) {
    std::ostringstream os;
    os << "dense_export: dimension " << dim << " exceeds the guard " << guard.max_dim;
    throw ConfigError(os.str());
  }
  Tensor h({dim, dim});
  const std::size_t d = op.local_dim();
  for (const auto& term : op.all_terms()) {
    const Tensor m = term.dense();
    const auto off = site_offsets(term.sites, op.num_sites(), d);
    const auto strides = site_strides(term.sites, op.num_sites(), d);
    const std::size_t sub_dim = off.size();
    for (std::size_t x = 0; x < dim; ++x) {
      const std::size_t sin = sub_index(x, strides, d);
      const std::size_t base = x - off[sin];
      for (std::size_t sout = 0; sout < sub_dim; ++sout) h[(base + off[sout]) * dim + x] += m[sout * sub_dim + sin];
    }
  }
  return h;
}

EdResult exact_diagonalize(const TpoOperator& op, EdOptions options) {
  const std::size_t dim = hilbert_dim(op.num_sites(), op.local_dim());
  if (dim > options.max_dim) {
    std::ostringstream os;
    os << "exact_diagonalize: dimension " << dim << " exceeds the guard " << options.max_dim;
    throw ConfigError(os.str());
  }
  EdResult res;
  if (dim <= options.dense_limit) {
    const Tensor h = dense_export(op, DenseGuard{dim});
    Eigen::SelfAdjointEigenSolver<RowMatrix> es(h.as_matrix(dim));
    res.energy = es.eigenvalues()(0);
    res.ground_state = es.eigenvectors().col(0);
    return res;
  }
  const LinearMap apply = [&op](const Vector& x, Vector& y) { y = apply_operator(op, x); };
  Vector start(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim; ++i)
    start(static_cast<Eigen::Index>(i)) = Complex(std::cos(0.37 * static_cast<double>(i) + 0.1),
                                                  std::sin(0.11 * static_cast<double>(i)));
  LanczosOptions lo;
  lo.tol = options.tol;
  lo.max_iter = 3000;
  lo.krylov_dim = 60;
  const auto lr = lanczos_lowest(apply, start, lo);
  if (!lr.converged) throw NumericalError("exact_diagonalize: Lanczos did not converge");
  res.energy = lr.eigenvalue;
  res.ground_state = lr.vector;
  return res;
}

}  // namespace attn
