#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "attn/lanczos.hpp"
#include "attn/tensor.hpp"

namespace attn {

/// Tensor coordinate in a binary TTN. Level 0 holds the tensors with
/// physical links; the top tensor sits at level log2(N) - 1.
struct NodeId {
  int level = 0;
  int index = 0;
  auto operator<=>(const NodeId&) const = default;
};

/// Geometry of a binary tree over N = 2^k sites (k >= 2).
///
/// Tensor links are ordered (child 0, child 1, parent). The children of a
/// level-0 tensor at index i are the sites 2i and 2i+1; the top tensor's
/// parent link is a dummy of dimension 1.
class TreeShape {
 public:
  TreeShape() = default;
  explicit TreeShape(int num_sites);

  int num_sites() const { return num_sites_; }
  /// Layers below the top tensor, log2(N) - 1.
  int num_layers() const { return depth_ - 1; }
  int top_level() const { return depth_ - 1; }
  NodeId top() const { return {depth_ - 1, 0}; }
  int nodes_at(int level) const { return num_sites_ >> (level + 1); }
  int num_nodes() const { return num_sites_ - 1; }
  int flat(NodeId v) const;
  NodeId node(int flat) const;
  bool valid(NodeId v) const;

  std::optional<NodeId> parent(NodeId v) const;
  /// Child tensor (level > 0 only).
  NodeId child(NodeId v, int which) const;
  /// Which child of its parent `v` is (0 or 1).
  int child_slot(NodeId v) const { return v.index & 1; }

  int first_site(NodeId v) const { return v.index << (v.level + 1); }
  int end_site(NodeId v) const { return (v.index + 1) << (v.level + 1); }
  int subtree_size(NodeId v) const { return 1 << (v.level + 1); }
  NodeId lowest_node_of_site(int site) const { return {0, site >> 1}; }
  bool in_subtree(int site, NodeId v) const { return site >= first_site(v) && site < end_site(v); }
  bool is_ancestor_or_self(NodeId a, NodeId v) const;

  NodeId common_ancestor(NodeId a, NodeId b) const;
  /// Tree path from `from` to `to`, both included.
  std::vector<NodeId> path(NodeId from, NodeId to) const;
  /// Post-order traversal: children before parents, left before right.
  std::vector<NodeId> sweep_order() const;
  /// Axis of tensor `v` that points towards the adjacent tensor `u`.
  std::size_t axis_towards(NodeId v, NodeId u) const;

 private:
  int num_sites_ = 0;
  int depth_ = 0;
};

/// Binary tree tensor network with a tracked isometry center.
class TtnState {
 public:
  TtnState() = default;
  TtnState(TreeShape shape, std::size_t local_dim, std::size_t max_bond, std::vector<Tensor> tensors,
           std::optional<NodeId> center);

  const TreeShape& shape() const { return shape_; }
  int num_sites() const { return shape_.num_sites(); }
  std::size_t local_dim() const { return local_dim_; }
  std::size_t max_bond() const { return max_bond_; }

  const Tensor& tensor(NodeId v) const { return tensors_[static_cast<std::size_t>(shape_.flat(v))]; }
  /// Replaces a tensor. The caller states where the isometry center is
  /// afterwards; pass std::nullopt when the gauge is no longer known.
  void set_tensor(NodeId v, Tensor t, std::optional<NodeId> center);
  /// Changes only the tensor at the current center.
  void set_center_tensor(Tensor t);

  std::optional<NodeId> isometry_center() const { return center_; }
  /// Version stamp of a tensor; changes whenever the tensor is replaced.
  std::uint64_t version(NodeId v) const { return versions_[static_cast<std::size_t>(shape_.flat(v))]; }

  /// Dimension of the parent link of `v`.
  std::size_t parent_bond(NodeId v) const { return tensor(v).dim(2); }
  /// d^(min(subtree, N - subtree)) saturated at SIZE_MAX.
  std::size_t max_reachable_bond(NodeId v) const;
  /// min(m, max reachable) for the parent link of `v`.
  std::size_t bond_cap(NodeId v) const;

  /// Moves the isometry center with QR steps along the tree path. A state
  /// without a center is fully isometrized towards `target`.
  void isometrize_towards(NodeId target);

 private:
  void move_center_step(NodeId from, NodeId to);

  TreeShape shape_;
  std::size_t local_dim_ = 2;
  std::size_t max_bond_ = 1;
  std::vector<Tensor> tensors_;
  std::vector<std::uint64_t> versions_;
  std::optional<NodeId> center_;
};

/// Random isometric TTN with every bond at its cap, centered on the top
/// tensor and normalized.
TtnState init_random_ttn(int num_sites, std::size_t local_dim, std::size_t max_bond, std::uint64_t seed);

/// Product state |0...0> embedded in a TTN with every bond at its cap.
TtnState init_product_ttn(int num_sites, std::size_t local_dim, std::size_t max_bond);

/// Functional form of TtnState::isometrize_towards.
TtnState isometrize_towards(TtnState state, NodeId target);

/// Norm of the state, read from the isometry center. Throws if no center.
double state_norm(const TtnState& state);

/// Full state vector (site 0 slowest-varying).
Vector to_state_vector(const TtnState& state);

/// Largest isometry deviation over all tensors other than the center.
double max_isometry_deviation(const TtnState& state);

}  // namespace attn
