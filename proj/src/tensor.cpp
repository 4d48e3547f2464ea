#include "attn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "attn/error.hpp"

namespace attn {

namespace {

using MatMap = Eigen::Map<const RowMatrix>;

std::vector<std::size_t> row_major_strides(const Shape& shape) {
  std::vector<std::size_t> strides(shape.size(), 1);
  for (std::size_t k = shape.size(); k-- > 1;) strides[k - 1] = strides[k] * shape[k];
  return strides;
}

bool is_identity_perm(std::span<const std::size_t> perm) {
  for (std::size_t k = 0; k < perm.size(); ++k)
    if (perm[k] != k) return false;
  return true;
}

void check_axes(const Tensor& t, std::span<const std::size_t> axes, const char* what) {
  std::vector<bool> seen(t.rank(), false);
  for (auto ax : axes) {
    if (ax >= t.rank() || seen[ax]) {
      std::ostringstream os;
      os << what << ": invalid or repeated axis " << ax << " for rank-" << t.rank() << " tensor";
      throw StructureError(os.str());
    }
    seen[ax] = true;
  }
}

/// Permutes `t` so that `left_axes` come first (requested order) and the
/// remaining links follow in ascending order.
Tensor bring_left(const Tensor& t, std::span<const std::size_t> left_axes,
                  std::vector<std::size_t>& right_axes) {
  check_axes(t, left_axes, "split");
  if (left_axes.empty() || left_axes.size() >= t.rank())
    throw StructureError("split: left axes must be a nonempty proper subset");
  std::vector<bool> is_left(t.rank(), false);
  for (auto ax : left_axes) is_left[ax] = true;
  right_axes.clear();
  for (std::size_t k = 0; k < t.rank(); ++k)
    if (!is_left[k]) right_axes.push_back(k);
  std::vector<std::size_t> perm(left_axes.begin(), left_axes.end());
  perm.insert(perm.end(), right_axes.begin(), right_axes.end());
  return t.permute(perm);
}

}  // namespace

std::size_t shape_product(std::span<const std::size_t> shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

Tensor::Tensor() : data_(1, Complex{0.0}) {}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)) {
  for (auto d : shape_)
    if (d == 0) throw StructureError("tensor dimensions must be >= 1");
  data_.assign(shape_product(shape_), Complex{0.0});
}

Tensor::Tensor(Shape shape, std::vector<Complex> data) : shape_(std::move(shape)), data_(std::move(data)) {
  for (auto d : shape_)
    if (d == 0) throw StructureError("tensor dimensions must be >= 1");
  if (data_.size() != shape_product(shape_))
    throw StructureError("tensor data size does not match its shape");
}

Tensor Tensor::scalar(Complex value) { return Tensor({}, {value}); }

Tensor Tensor::identity(std::size_t n) {
  Tensor t({n, n});
  for (std::size_t i = 0; i < n; ++i) t.data_[i * n + i] = 1.0;
  return t;
}

Tensor Tensor::from_matrix(const RowMatrix& m) {
  Tensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
  std::copy(m.data(), m.data() + m.size(), t.data_.begin());
  return t;
}

std::size_t Tensor::flat_index(std::span<const std::size_t> index) const {
  if (index.size() != rank()) throw StructureError("index rank mismatch");
  std::size_t flat = 0;
  for (std::size_t k = 0; k < rank(); ++k) {
    if (index[k] >= shape_[k]) throw StructureError("index out of range");
    flat = flat * shape_[k] + index[k];
  }
  return flat;
}

Complex& Tensor::at(std::initializer_list<std::size_t> index) {
  return data_[flat_index(std::span<const std::size_t>(index.begin(), index.size()))];
}

const Complex& Tensor::at(std::initializer_list<std::size_t> index) const {
  return data_[flat_index(std::span<const std::size_t>(index.begin(), index.size()))];
}

Tensor Tensor::permute(std::span<const std::size_t> perm) const {
  if (perm.size() != rank()) throw StructureError("permutation rank mismatch");
  check_axes(*this, perm, "permute");
  if (is_identity_perm(perm)) return *this;

  const auto in_strides = row_major_strides(shape_);
  Shape out_shape(rank());
  std::vector<std::size_t> stride(rank());
  for (std::size_t k = 0; k < rank(); ++k) {
    out_shape[k] = shape_[perm[k]];
    stride[k] = in_strides[perm[k]];
  }
  Tensor out(out_shape);
  const std::size_t r = rank();
  const std::size_t inner_dim = out_shape[r - 1];
  const std::size_t inner_stride = stride[r - 1];
  std::vector<std::size_t> counter(r, 0);
  std::size_t offset = 0;
  const std::size_t n_outer = out.size() / inner_dim;
  Complex* dst = out.data_.data();
  const Complex* src = data_.data();
  for (std::size_t outer = 0; outer < n_outer; ++outer) {
    for (std::size_t j = 0; j < inner_dim; ++j) *dst++ = src[offset + j * inner_stride];
    for (std::size_t k = r - 1; k-- > 0;) {
      offset += stride[k];
      if (++counter[k] < out_shape[k]) break;
      offset -= stride[k] * out_shape[k];
      counter[k] = 0;
    }
  }
  return out;
}

Tensor Tensor::reshape(Shape shape) const& {
  Tensor copy = *this;
  return std::move(copy).reshape(std::move(shape));
}

Tensor Tensor::reshape(Shape shape) && {
  if (shape_product(shape) != data_.size()) throw StructureError("reshape changes the element count");
  for (auto d : shape)
    if (d == 0) throw StructureError("tensor dimensions must be >= 1");
  shape_ = std::move(shape);
  return std::move(*this);
}

Tensor Tensor::conj() const {
  Tensor out = *this;
  for (auto& z : out.data_) z = std::conj(z);
  return out;
}

RowMatrix Tensor::as_matrix(std::size_t rows) const {
  if (rows == 0 || data_.size() % rows != 0) throw StructureError("as_matrix: bad row count");
  const auto cols = static_cast<Eigen::Index>(data_.size() / rows);
  return MatMap(data_.data(), static_cast<Eigen::Index>(rows), cols);
}

Tensor& Tensor::operator+=(const Tensor& other) {
  if (shape_ != other.shape_) throw StructureError("tensor addition: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Tensor& Tensor::operator-=(const Tensor& other) {
  if (shape_ != other.shape_) throw StructureError("tensor subtraction: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Tensor& Tensor::operator*=(Complex s) {
  for (auto& z : data_) z *= s;
  return *this;
}

Tensor contract(const Tensor& a, const Tensor& b, std::span<const AxisPair> axis_pairs) {
  std::vector<std::size_t> pa, pb;
  for (const auto& [ia, ib] : axis_pairs) {
    if (ia >= a.rank() || ib >= b.rank()) throw StructureError("contract: axis index out of range");
    if (a.dim(ia) != b.dim(ib)) {
      std::ostringstream os;
      os << "contract: dimension mismatch between axis " << ia << " of a (dim " << a.dim(ia)
         << ") and axis " << ib << " of b (dim " << b.dim(ib) << ")";
      throw StructureError(os.str());
    }
    pa.push_back(ia);
    pb.push_back(ib);
  }
  check_axes(a, pa, "contract");
  check_axes(b, pb, "contract");

  std::vector<bool> paired_a(a.rank(), false), paired_b(b.rank(), false);
  for (auto ax : pa) paired_a[ax] = true;
  for (auto ax : pb) paired_b[ax] = true;

  std::vector<std::size_t> perm_a, perm_b;
  Shape out_shape;
  std::size_t m = 1, n = 1, k = 1;
  for (std::size_t i = 0; i < a.rank(); ++i)
    if (!paired_a[i]) {
      perm_a.push_back(i);
      out_shape.push_back(a.dim(i));
      m *= a.dim(i);
    }
  for (auto ax : pa) {
    perm_a.push_back(ax);
    k *= a.dim(ax);
  }
  perm_b = pb;
  for (std::size_t i = 0; i < b.rank(); ++i)
    if (!paired_b[i]) {
      perm_b.push_back(i);
      out_shape.push_back(b.dim(i));
      n *= b.dim(i);
    }

  const Tensor ap = a.permute(perm_a);
  const Tensor bp = b.permute(perm_b);
  Tensor out(out_shape);
  MatMap ma(ap.data().data(), static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k));
  MatMap mb(bp.data().data(), static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n));
  Eigen::Map<RowMatrix> mc(out.data().data(), static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  mc.noalias() = ma * mb;
  return out;
}

Tensor outer(const Tensor& a, const Tensor& b) { return contract(a, b, std::span<const AxisPair>{}); }

Tensor trace(const Tensor& t, std::size_t axis_a, std::size_t axis_b) {
  if (axis_a == axis_b || axis_a >= t.rank() || axis_b >= t.rank() || t.dim(axis_a) != t.dim(axis_b))
    throw StructureError("trace: invalid axis pair");
  std::vector<std::size_t> perm;
  Shape out_shape;
  for (std::size_t k = 0; k < t.rank(); ++k)
    if (k != axis_a && k != axis_b) {
      perm.push_back(k);
      out_shape.push_back(t.dim(k));
    }
  perm.push_back(axis_a);
  perm.push_back(axis_b);
  const Tensor p = t.permute(perm);
  const std::size_t n = t.dim(axis_a);
  Tensor out(out_shape);
  for (std::size_t i = 0; i < out.size(); ++i) {
    Complex acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += p[(i * n + j) * n + j];
    out[i] = acc;
  }
  return out;
}

QrResult qr_split(const Tensor& t, std::span<const std::size_t> left_axes) {
  std::vector<std::size_t> right_axes;
  const Tensor p = bring_left(t, left_axes, right_axes);
  Shape left_shape, right_shape;
  for (auto ax : left_axes) left_shape.push_back(t.dim(ax));
  for (auto ax : right_axes) right_shape.push_back(t.dim(ax));
  const std::size_t rows = shape_product(left_shape);
  const std::size_t cols = shape_product(right_shape);
  const std::size_t keep = std::min(rows, cols);

  Eigen::HouseholderQR<RowMatrix> qr(p.as_matrix(rows));
  RowMatrix q = qr.householderQ() * RowMatrix::Identity(static_cast<Eigen::Index>(rows),
                                                         static_cast<Eigen::Index>(keep));
  RowMatrix r = qr.matrixQR().topRows(static_cast<Eigen::Index>(keep)).triangularView<Eigen::Upper>();

  left_shape.push_back(keep);
  right_shape.insert(right_shape.begin(), keep);
  return {Tensor::from_matrix(q).reshape(left_shape), Tensor::from_matrix(r).reshape(right_shape)};
}

QrResult qr_split_rank_revealing(const Tensor& t, std::span<const std::size_t> left_axes,
                                 double rel_threshold) {
  std::vector<std::size_t> right_axes;
  const Tensor p = bring_left(t, left_axes, right_axes);
  Shape left_shape, right_shape;
  for (auto ax : left_axes) left_shape.push_back(t.dim(ax));
  for (auto ax : right_axes) right_shape.push_back(t.dim(ax));
  const std::size_t rows = shape_product(left_shape);

  Eigen::ColPivHouseholderQR<RowMatrix> qr(p.as_matrix(rows));
  qr.setThreshold(rel_threshold);
  const auto rank = std::max<Eigen::Index>(qr.rank(), 1);
  RowMatrix q = qr.householderQ() * RowMatrix::Identity(static_cast<Eigen::Index>(rows), rank);
  RowMatrix r_perm = qr.matrixQR().topRows(rank).triangularView<Eigen::Upper>();
  RowMatrix r = r_perm * qr.colsPermutation().transpose();

  left_shape.push_back(static_cast<std::size_t>(rank));
  right_shape.insert(right_shape.begin(), static_cast<std::size_t>(rank));
  return {Tensor::from_matrix(q).reshape(left_shape), Tensor::from_matrix(r).reshape(right_shape)};
}

SvdResult svd_split(const Tensor& t, std::span<const std::size_t> left_axes, std::size_t max_keep,
                    double cutoff) {
  if (max_keep == 0) throw StructureError("svd_split: max_keep must be >= 1");
  for (const auto& z : t.data())
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      throw NumericalError("svd_split: non-finite input entry");
  std::vector<std::size_t> right_axes;
  const Tensor p = bring_left(t, left_axes, right_axes);
  Shape left_shape, right_shape;
  for (auto ax : left_axes) left_shape.push_back(t.dim(ax));
  for (auto ax : right_axes) right_shape.push_back(t.dim(ax));
  const std::size_t rows = shape_product(left_shape);

  Eigen::BDCSVD<RowMatrix> svd(p.as_matrix(rows), Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const auto full = static_cast<std::size_t>(s.size());
  std::size_t keep = std::min(max_keep, full);
  const double s0 = full > 0 ? s(0) : 0.0;
  std::size_t above = 0;
  for (std::size_t j = 0; j < full; ++j)
    if (s(static_cast<Eigen::Index>(j)) > cutoff * s0) ++above;
  keep = std::max<std::size_t>(1, std::min(keep, above));

  SvdResult res;
  double discarded = 0.0;
  for (std::size_t j = 0; j < full; ++j) {
    const double v = s(static_cast<Eigen::Index>(j));
    if (j < keep)
      res.singular_values.push_back(v);
    else
      discarded += v * v;
  }
  res.truncation_error = std::sqrt(discarded);
  const auto k = static_cast<Eigen::Index>(keep);
  RowMatrix u = svd.matrixU().leftCols(k);
  RowMatrix vh = svd.matrixV().leftCols(k).adjoint();
  left_shape.push_back(keep);
  right_shape.insert(right_shape.begin(), keep);
  res.u = Tensor::from_matrix(u).reshape(left_shape);
  res.vh = Tensor::from_matrix(vh).reshape(right_shape);
  return res;
}

double tensor_norm(const Tensor& t) {
  double acc = 0.0;
  for (const auto& z : t.data()) acc += std::norm(z);
  return std::sqrt(acc);
}

double max_abs(const Tensor& t) {
  double m = 0.0;
  for (const auto& z : t.data()) m = std::max(m, std::abs(z));
  return m;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) throw StructureError("max_abs_diff: shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

Complex inner(const Tensor& a, const Tensor& b) {
  if (a.size() != b.size()) throw StructureError("inner: size mismatch");
  Complex acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

IsometryReport check_isometry(const Tensor& t, std::span<const std::size_t> over_axes) {
  check_axes(t, over_axes, "check_isometry");
  std::vector<std::size_t> rest;
  const Tensor p = bring_left(t, over_axes, rest);
  std::size_t n = 1;
  for (auto ax : over_axes) n *= t.dim(ax);
  const RowMatrix m = p.as_matrix(n);
  const RowMatrix g = m.conjugate() * m.transpose();
  const RowMatrix dev = g - RowMatrix::Identity(g.rows(), g.cols());
  return {dev.cwiseAbs().maxCoeff()};
}

Tensor random_tensor(Shape shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Tensor t(std::move(shape));
  for (auto& z : t.data()) {
    const double re = normal(rng);
    const double im = normal(rng);
    z = {re, im};
  }
  return t;
}

Tensor random_unitary(std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw StructureError("random_unitary: dim must be >= 1");
  const Tensor g = random_tensor({dim, dim}, seed);
  Eigen::HouseholderQR<RowMatrix> qr(g.as_matrix(dim));
  const auto n = static_cast<Eigen::Index>(dim);
  RowMatrix q = qr.householderQ() * RowMatrix::Identity(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Complex rjj = qr.matrixQR()(j, j);
    const double a = std::abs(rjj);
    if (a > 0.0) q.col(j) *= rjj / a;
  }
  return Tensor::from_matrix(q);
}

}  // namespace attn
