#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace attn {

using Complex = std::complex<double>;
using Shape = std::vector<std::size_t>;
using AxisPair = std::pair<std::size_t, std::size_t>;
using RowMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Dense complex tensor, row-major over its links.
///
/// Link order carries the meaning; every function that produces a tensor
/// documents the order of the links it returns. A default-constructed tensor
/// is a rank-0 scalar holding zero.
class Tensor {
 public:
  Tensor();
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<Complex> data);

  static Tensor scalar(Complex value);
  /// n x n identity matrix.
  static Tensor identity(std::size_t n);
  static Tensor from_matrix(const RowMatrix& m);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<const Complex> data() const noexcept { return data_; }
  std::span<Complex> data() noexcept { return data_; }

  Complex& operator[](std::size_t flat) { return data_[flat]; }
  const Complex& operator[](std::size_t flat) const { return data_[flat]; }
  Complex& at(std::initializer_list<std::size_t> index);
  const Complex& at(std::initializer_list<std::size_t> index) const;
  std::size_t flat_index(std::span<const std::size_t> index) const;

  /// Result link k is input link perm[k].
  Tensor permute(std::span<const std::size_t> perm) const;
  Tensor permute(std::initializer_list<std::size_t> perm) const {
    return permute(std::span<const std::size_t>(perm.begin(), perm.size()));
  }
  Tensor reshape(Shape shape) const&;
  Tensor reshape(Shape shape) &&;
  Tensor conj() const;

  /// Copy of the data viewed as a (rows x size/rows) matrix.
  RowMatrix as_matrix(std::size_t rows) const;

  Tensor& operator+=(const Tensor& other);
  Tensor& operator-=(const Tensor& other);
  Tensor& operator*=(Complex s);

  friend Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
  friend Tensor operator-(Tensor a, const Tensor& b) { return a -= b; }
  friend Tensor operator*(Tensor a, Complex s) { return a *= s; }
  friend Tensor operator*(Complex s, Tensor a) { return a *= s; }

 private:
  Shape shape_;
  std::vector<Complex> data_;
};

std::size_t shape_product(std::span<const std::size_t> shape);

/// Sum over paired links. Result links: unpaired links of `a` in order, then
/// unpaired links of `b` in order.
Tensor contract(const Tensor& a, const Tensor& b, std::span<const AxisPair> axis_pairs);
inline Tensor contract(const Tensor& a, const Tensor& b, std::initializer_list<AxisPair> axis_pairs) {
  return contract(a, b, std::span<const AxisPair>(axis_pairs.begin(), axis_pairs.size()));
}

/// Outer product; links of `a` then links of `b`.
Tensor outer(const Tensor& a, const Tensor& b);

/// Sum over the diagonal of two links of equal dimension; both are removed.
Tensor trace(const Tensor& t, std::size_t axis_a, std::size_t axis_b);

struct QrResult {
  Tensor q;  ///< links: left axes (in the order requested), new link
  Tensor r;  ///< links: new link, remaining axes (ascending)
};

/// Q R factorization splitting `left_axes` from the remaining links.
QrResult qr_split(const Tensor& t, std::span<const std::size_t> left_axes);
inline QrResult qr_split(const Tensor& t, std::initializer_list<std::size_t> left_axes) {
  return qr_split(t, std::span<const std::size_t>(left_axes.begin(), left_axes.size()));
}

/// Rank-revealing variant of qr_split. Columns whose pivot falls below
/// `rel_threshold` times the largest pivot are dropped, so the new link has
/// the numerical rank of the matricized input.
QrResult qr_split_rank_revealing(const Tensor& t, std::span<const std::size_t> left_axes,
                                 double rel_threshold);

struct SvdResult {
  Tensor u;                              ///< links: left axes, new link
  std::vector<double> singular_values;  ///< kept values, descending
  Tensor vh;                             ///< links: new link, remaining axes
  double truncation_error = 0.0;         ///< sqrt of the discarded squared weights
};

/// Truncated SVD. Keeps min(max_keep, #{s_j > cutoff * s_0}, rank) values.
SvdResult svd_split(const Tensor& t, std::span<const std::size_t> left_axes, std::size_t max_keep,
                    double cutoff);
inline SvdResult svd_split(const Tensor& t, std::initializer_list<std::size_t> left_axes,
                           std::size_t max_keep, double cutoff) {
  return svd_split(t, std::span<const std::size_t>(left_axes.begin(), left_axes.size()), max_keep,
                   cutoff);
}

double tensor_norm(const Tensor& t);
double max_abs_diff(const Tensor& a, const Tensor& b);
double max_abs(const Tensor& t);
/// Frobenius inner product <a, b> = sum conj(a) b.
Complex inner(const Tensor& a, const Tensor& b);

struct IsometryReport {
  double max_deviation = 0.0;
};

/// Contracts t with its conjugate over every link not in `over_axes` and
/// measures the distance of the result from the identity on `over_axes`.
IsometryReport check_isometry(const Tensor& t, std::span<const std::size_t> over_axes);
inline IsometryReport check_isometry(const Tensor& t, std::initializer_list<std::size_t> over_axes) {
  return check_isometry(t, std::span<const std::size_t>(over_axes.begin(), over_axes.size()));
}

/// Haar-distributed dim x dim unitary, deterministic in `seed`.
Tensor random_unitary(std::size_t dim, std::uint64_t seed);

/// Tensor with i.i.d. complex Gaussian entries (unit variance per component).
Tensor random_tensor(Shape shape, std::uint64_t seed);

}  // namespace attn
