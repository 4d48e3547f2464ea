#pragma once

#include <utility>
#include <vector>

#include "attn/tpo.hpp"

namespace attn {

enum class Geometry { kSquare, kTriangular };

/// Open-boundary L x L lattice; L must be a power of two.
struct LatticeSpec {
  int side_length = 2;
  Geometry geometry = Geometry::kSquare;

  int num_sites() const { return side_length * side_length; }
  /// Throws ConfigError unless L is a power of two >= 2.
  void validate() const;
};

struct ModelParams {
  double J = 1.0;
  double h = 0.0;  ///< transverse field (Ising only)
};

/// Bijection between lattice coordinates (row, col) and 1D site indices.
class SiteMap {
 public:
  SiteMap() = default;
  SiteMap(int side_length, std::vector<std::pair<int, int>> order);

  int side_length() const { return side_length_; }
  int num_sites() const { return static_cast<int>(to_2d_.size()); }
  int to_1d(int row, int col) const;
  std::pair<int, int> to_2d(int index) const;

 private:
  int side_length_ = 0;
  std::vector<std::pair<int, int>> to_2d_;
  std::vector<int> to_1d_;
};

/// Hilbert-curve ordering. The order-1 cell is visited
/// (0,0) -> (1,0) -> (1,1) -> (0,1) in (row, col).
SiteMap hilbert_map(int side_length);

/// Row-major ordering, index = row * L + col.
SiteMap row_major_map(int side_length);

/// Nearest-neighbour bonds as ascending 1D index pairs. Square geometry uses
/// horizontal and vertical bonds; triangular adds the (+1,+1) diagonal of
/// every plaquette.
std::vector<std::pair<int, int>> lattice_edges(const LatticeSpec& lattice, const SiteMap& map);

/// H = -J sum_<ij> X_i X_j + J h sum_i Z_i on the square lattice.
TpoOperator build_ising_tpo(const LatticeSpec& lattice, const ModelParams& params, const SiteMap& map);

/// H = J sum_<ij> (X X + Y Y + Z Z) on the triangular lattice.
TpoOperator build_heisenberg_triangular_tpo(const LatticeSpec& lattice, const ModelParams& params,
                                            const SiteMap& map);

}  // namespace attn
