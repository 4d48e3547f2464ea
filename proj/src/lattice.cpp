#include "attn/lattice.hpp"

#include <algorithm>
#include <sstream>

#include "attn/error.hpp"

namespace attn {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

void LatticeSpec::validate() const {
  if (side_length < 2 || !is_power_of_two(side_length)) {
    std::ostringstream os;
    os << "lattice side length must be a power of two >= 2, got " << side_length;
    throw ConfigError(os.str());
  }
}

SiteMap::SiteMap(int side_length, std::vector<std::pair<int, int>> order)
    : side_length_(side_length), to_2d_(std::move(order)) {
  const int n = side_length * side_length;
  if (static_cast<int>(to_2d_.size()) != n) throw StructureError("SiteMap: wrong number of sites");
  to_1d_.assign(static_cast<std::size_t>(n), -1);
  for (int k = 0; k < n; ++k) {
    const auto [r, c] = to_2d_[static_cast<std::size_t>(k)];
    if (r < 0 || r >= side_length || c < 0 || c >= side_length)
      throw StructureError("SiteMap: coordinate out of range");
    auto& slot = to_1d_[static_cast<std::size_t>(r * side_length + c)];
    if (slot != -1) throw StructureError("SiteMap: not a bijection");
    slot = k;
  }
}

int SiteMap::to_1d(int row, int col) const {
  if (row < 0 || row >= side_length_ || col < 0 || col >= side_length_)
    throw StructureError("SiteMap: coordinate out of range");
  return to_1d_[static_cast<std::size_t>(row * side_length_ + col)];
}

std::pair<int, int> SiteMap::to_2d(int index) const { return to_2d_.at(static_cast<std::size_t>(index)); }

SiteMap hilbert_map(int side_length) {
  LatticeSpec{side_length, Geometry::kSquare}.validate();
  const int n = side_length;
  std::vector<std::pair<int, int>> order;
  order.reserve(static_cast<std::size_t>(n * n));
  for (int d = 0; d < n * n; ++d) {
    // Standard distance-to-point conversion; x is the column, y the row.
    int x = 0, y = 0, t = d;
    for (int s = 1; s < n; s *= 2) {
      const int rx = 1 & (t / 2);
      const int ry = 1 & (t ^ rx);
      if (ry == 0) {
        if (rx == 1) {
          x = s - 1 - x;
          y = s - 1 - y;
        }
        std::swap(x, y);
      }
      x += s * rx;
      y += s * ry;
      t /= 4;
    }
    order.emplace_back(y, x);
  }
  return SiteMap(n, std::move(order));
}

SiteMap row_major_map(int side_length) {
  std::vector<std::pair<int, int>> order;
  for (int r = 0; r < side_length; ++r)
    for (int c = 0; c < side_length; ++c) order.emplace_back(r, c);
  return SiteMap(side_length, std::move(order));
}

std::vector<std::pair<int, int>> lattice_edges(const LatticeSpec& lattice, const SiteMap& map) {
  lattice.validate();
  const int n = lattice.side_length;
  if (map.side_length() != n) throw StructureError("lattice_edges: map does not match the lattice");
  std::vector<std::pair<int, int>> edges;
  auto add = [&](int r0, int c0, int r1, int c1) {
    int a = map.to_1d(r0, c0), b = map.to_1d(r1, c1);
    if (a > b) std::swap(a, b);
    edges.emplace_back(a, b);
  };
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      if (c + 1 < n) add(r, c, r, c + 1);
      if (r + 1 < n) add(r, c, r + 1, c);
      if (lattice.geometry == Geometry::kTriangular && r + 1 < n && c + 1 < n) add(r, c, r + 1, c + 1);
    }
  return edges;
}

TpoOperator build_ising_tpo(const LatticeSpec& lattice, const ModelParams& params, const SiteMap& map) {
  if (lattice.geometry != Geometry::kSquare)
    throw ConfigError("the Ising model is defined on the square lattice");
  if (params.J == 0.0) throw ConfigError("J must be nonzero");
  TpoOperator op(lattice.num_sites(), 2);
  for (const auto& [a, b] : lattice_edges(lattice, map))
    op.add_term(TpoTerm::product({a, b}, {pauli::x(), pauli::x()}, -params.J));
  for (int s = 0; s < lattice.num_sites(); ++s) op.add_local(s, pauli::z(), params.J * params.h);
  return op;
}

TpoOperator build_heisenberg_triangular_tpo(const LatticeSpec& lattice, const ModelParams& params,
                                            const SiteMap& map) {
  if (lattice.geometry != Geometry::kTriangular)
    throw ConfigError("the Heisenberg model is defined on the triangular lattice");
  if (params.J == 0.0) throw ConfigError("J must be nonzero");
  TpoOperator op(lattice.num_sites(), 2);
  for (const auto& [a, b] : lattice_edges(lattice, map))
    for (const auto& p : {pauli::x(), pauli::y(), pauli::z()}) op.add_term(TpoTerm::product({a, b}, {p, p}, params.J));
  return op;
}

}  // namespace attn
