#include "attn/ttn.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>

#include "attn/error.hpp"

namespace attn {

namespace {

std::uint64_t next_version() {
  static std::atomic<std::uint64_t> counter{0};
  return ++counter;
}

std::size_t saturating_pow(std::size_t base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) {
    if (r > std::numeric_limits<std::size_t>::max() / base) return std::numeric_limits<std::size_t>::max();
    r *= base;
  }
  return r;
}

/// Inverse of a permutation.
std::vector<std::size_t> inverse(const std::vector<std::size_t>& p) {
  std::vector<std::size_t> inv(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) inv[p[k]] = k;
  return inv;
}

}  // namespace

TreeShape::TreeShape(int num_sites) : num_sites_(num_sites) {
  if (num_sites < 4 || (num_sites & (num_sites - 1)) != 0) {
    std::ostringstream os;
    os << "TreeShape: number of sites must be a power of two >= 4, got " << num_sites;
    throw StructureError(os.str());
  }
  while ((1 << depth_) < num_sites) ++depth_;
}

int TreeShape::flat(NodeId v) const {
  if (!valid(v)) throw StructureError("TreeShape: invalid node");
  int offset = 0;
  for (int l = 0; l < v.level; ++l) offset += nodes_at(l);
  return offset + v.index;
}

NodeId TreeShape::node(int flat) const {
  for (int l = 0; l < depth_; ++l) {
    if (flat < nodes_at(l)) return {l, flat};
    flat -= nodes_at(l);
  }
  throw StructureError("TreeShape: flat index out of range");
}

bool TreeShape::valid(NodeId v) const {
  return v.level >= 0 && v.level < depth_ && v.index >= 0 && v.index < nodes_at(v.level);
}

std::optional<NodeId> TreeShape::parent(NodeId v) const {
  if (v.level == top_level()) return std::nullopt;
  return NodeId{v.level + 1, v.index >> 1};
}

NodeId TreeShape::child(NodeId v, int which) const {
  if (v.level == 0) throw StructureError("TreeShape: level-0 tensors have sites as children");
  return {v.level - 1, 2 * v.index + which};
}

bool TreeShape::is_ancestor_or_self(NodeId a, NodeId v) const {
  if (a.level < v.level) return false;
  return (v.index >> (a.level - v.level)) == a.index;
}

NodeId TreeShape::common_ancestor(NodeId a, NodeId b) const {
  while (a.level < b.level) a = *parent(a);
  while (b.level < a.level) b = *parent(b);
  while (a != b) {
    a = *parent(a);
    b = *parent(b);
  }
  return a;
}

std::vector<NodeId> TreeShape::path(NodeId from, NodeId to) const {
  const NodeId anc = common_ancestor(from, to);
  std::vector<NodeId> up, down;
  for (NodeId v = from; v != anc; v = *parent(v)) up.push_back(v);
  for (NodeId v = to; v != anc; v = *parent(v)) down.push_back(v);
  up.push_back(anc);
  up.insert(up.end(), down.rbegin(), down.rend());
  return up;
}

std::vector<NodeId> TreeShape::sweep_order() const {
  std::vector<NodeId> order;
  order.reserve(static_cast<std::size_t>(num_nodes()));
  auto visit = [&](auto&& self, NodeId v) -> void {
    if (v.level > 0) {
      self(self, child(v, 0));
      self(self, child(v, 1));
    }
    order.push_back(v);
  };
  visit(visit, top());
  return order;
}

std::size_t TreeShape::axis_towards(NodeId v, NodeId u) const {
  if (auto p = parent(v); p && *p == u) return 2;
  if (v.level > 0) {
    if (child(v, 0) == u) return 0;
    if (child(v, 1) == u) return 1;
  }
  throw StructureError("TreeShape: tensors are not adjacent");
}

TtnState::TtnState(TreeShape shape, std::size_t local_dim, std::size_t max_bond, std::vector<Tensor> tensors,
                   std::optional<NodeId> center)
    : shape_(shape), local_dim_(local_dim), max_bond_(max_bond), tensors_(std::move(tensors)), center_(center) {
  if (local_dim < 2) throw ConfigError("TtnState: local dimension must be >= 2");
  if (max_bond < 1) throw ConfigError("TtnState: bond dimension must be >= 1");
  if (tensors_.size() != static_cast<std::size_t>(shape_.num_nodes()))
    throw StructureError("TtnState: wrong number of tensors");
  if (center_ && !shape_.valid(*center_)) throw StructureError("TtnState: invalid center");
  for (int f = 0; f < shape_.num_nodes(); ++f) {
    const NodeId v = shape_.node(f);
    const Tensor& t = tensors_[static_cast<std::size_t>(f)];
    if (t.rank() != 3) throw StructureError("TtnState: tensors must have three links");
    for (int c = 0; c < 2; ++c) {
      const std::size_t expect = v.level == 0 ? local_dim_ : tensors_[static_cast<std::size_t>(shape_.flat(shape_.child(v, c)))].dim(2);
      if (t.dim(static_cast<std::size_t>(c)) != expect) {
        std::ostringstream os;
        os << "TtnState: link " << c << " of tensor (" << v.level << "," << v.index << ") has dimension "
           << t.dim(static_cast<std::size_t>(c)) << ", expected " << expect;
        throw StructureError(os.str());
      }
    }
    if (v == shape_.top() && t.dim(2) != 1) throw StructureError("TtnState: top tensor needs a dummy parent link");
    versions_.push_back(next_version());
  }
}

void TtnState::set_tensor(NodeId v, Tensor t, std::optional<NodeId> center) {
  Tensor& slot = tensors_[static_cast<std::size_t>(shape_.flat(v))];
  if (t.shape() != slot.shape()) throw StructureError("TtnState::set_tensor: shape change");
  slot = std::move(t);
  versions_[static_cast<std::size_t>(shape_.flat(v))] = next_version();
  center_ = center;
}

void TtnState::set_center_tensor(Tensor t) {
  if (!center_) throw StructureError("TtnState: no isometry center");
  set_tensor(*center_, std::move(t), center_);
}

std::size_t TtnState::max_reachable_bond(NodeId v) const {
  const int inside = shape_.subtree_size(v);
  return saturating_pow(local_dim_, std::min(inside, num_sites() - inside));
}

std::size_t TtnState::bond_cap(NodeId v) const {
  if (v == shape_.top()) return 1;
  return std::min(max_bond_, max_reachable_bond(v));
}

void TtnState::move_center_step(NodeId from, NodeId to) {
  const std::size_t ax = shape_.axis_towards(from, to);
  const std::size_t ax_to = shape_.axis_towards(to, from);
  std::vector<std::size_t> left;
  for (std::size_t k = 0; k < 3; ++k)
    if (k != ax) left.push_back(k);
  QrResult qr = qr_split(tensor(from), left);
  if (qr.r.dim(0) != tensor(from).dim(ax)) throw StructureError("TtnState: bond larger than reachable dimension");
  std::vector<std::size_t> order = left;
  order.push_back(ax);
  Tensor q = qr.q.permute(inverse(order));
  // R acts on the `to` tensor's link towards `from`.
  Tensor moved = contract(tensor(to), qr.r, {{ax_to, 1}});
  std::vector<std::size_t> order_to;
  for (std::size_t k = 0; k < 3; ++k)
    if (k != ax_to) order_to.push_back(k);
  order_to.push_back(ax_to);
  set_tensor(from, std::move(q), to);
  set_tensor(to, moved.permute(inverse(order_to)), to);
}

void TtnState::isometrize_towards(NodeId target) {
  if (!shape_.valid(target)) throw StructureError("isometrize_towards: invalid target");
  if (center_) {
    const auto p = shape_.path(*center_, target);
    for (std::size_t k = 0; k + 1 < p.size(); ++k) move_center_step(p[k], p[k + 1]);
    center_ = target;
    return;
  }
  std::vector<std::pair<int, NodeId>> by_distance;
  for (int f = 0; f < shape_.num_nodes(); ++f) {
    const NodeId v = shape_.node(f);
    if (v == target) continue;
    by_distance.emplace_back(static_cast<int>(shape_.path(v, target).size()), v);
  }
  std::sort(by_distance.begin(), by_distance.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (const auto& [dist, v] : by_distance) move_center_step(v, shape_.path(v, target)[1]);
  center_ = target;
}

namespace {

/// Shapes with every bond at min(m, reachable dimension).
std::vector<Shape> capped_shapes(const TreeShape& shape, std::size_t d, std::size_t m) {
  if (d < 2) throw ConfigError("local dimension must be >= 2");
  if (m < 1) throw ConfigError("bond dimension must be >= 1");
  std::vector<Shape> shapes(static_cast<std::size_t>(shape.num_nodes()));
  for (int f = 0; f < shape.num_nodes(); ++f) {
    const NodeId v = shape.node(f);
    const int inside = shape.subtree_size(v);
    const std::size_t cap =
        v == shape.top() ? 1 : std::min(m, saturating_pow(d, std::min(inside, shape.num_sites() - inside)));
    std::size_t c0 = d, c1 = d;
    if (v.level > 0) {
      c0 = shapes[static_cast<std::size_t>(shape.flat(shape.child(v, 0)))][2];
      c1 = shapes[static_cast<std::size_t>(shape.flat(shape.child(v, 1)))][2];
    }
    shapes[static_cast<std::size_t>(f)] = {c0, c1, cap};
  }
  return shapes;
}

}  // namespace

TtnState init_random_ttn(int num_sites, std::size_t local_dim, std::size_t max_bond, std::uint64_t seed) {
  const TreeShape shape(num_sites);
  const auto shapes = capped_shapes(shape, local_dim, max_bond);
  std::vector<Tensor> tensors;
  for (std::size_t f = 0; f < shapes.size(); ++f) tensors.push_back(random_tensor(shapes[f], seed * 7919 + f));
  TtnState state(shape, local_dim, max_bond, std::move(tensors), std::nullopt);
  state.isometrize_towards(shape.top());
  Tensor top = state.tensor(shape.top());
  top *= 1.0 / tensor_norm(top);
  state.set_center_tensor(std::move(top));
  return state;
}

TtnState init_product_ttn(int num_sites, std::size_t local_dim, std::size_t max_bond) {
  const TreeShape shape(num_sites);
  const auto shapes = capped_shapes(shape, local_dim, max_bond);
  std::vector<Tensor> tensors;
  for (const auto& s : shapes) {
    Tensor t(s);
    // Column p is the p-th basis vector of the joint child space.
    for (std::size_t p = 0; p < s[2]; ++p) t[p * s[2] + p] = 1.0;
    tensors.push_back(std::move(t));
  }
  return TtnState(shape, local_dim, max_bond, std::move(tensors), shape.top());
}

TtnState isometrize_towards(TtnState state, NodeId target) {
  state.isometrize_towards(target);
  return state;
}

double state_norm(const TtnState& state) {
  if (!state.isometry_center()) throw StructureError("state_norm: no isometry center");
  return tensor_norm(state.tensor(*state.isometry_center()));
}

Vector to_state_vector(const TtnState& state) {
  const TreeShape& shape = state.shape();
  const std::size_t d = state.local_dim();
  if (saturating_pow(d, state.num_sites()) > (std::size_t{1} << 24))
    throw ConfigError("to_state_vector: Hilbert space too large");
  // Returns [physical sites of the subtree, parent link].
  auto build = [&](auto&& self, NodeId v) -> Tensor {
    const Tensor& t = state.tensor(v);
    if (v.level == 0) return t.reshape({d * d, t.dim(2)});
    const Tensor a = self(self, shape.child(v, 0));
    const Tensor b = self(self, shape.child(v, 1));
    const Tensor x = contract(a, t, {{1, 0}});      // [A, b, p]
    const Tensor y = contract(x, b, {{1, 1}});      // [A, p, B]
    return y.permute({0, 2, 1}).reshape({a.dim(0) * b.dim(0), t.dim(2)});
  };
  const Tensor full = build(build, shape.top());
  Vector psi(static_cast<Eigen::Index>(full.size()));
  for (std::size_t i = 0; i < full.size(); ++i) psi(static_cast<Eigen::Index>(i)) = full[i];
  return psi;
}

double max_isometry_deviation(const TtnState& state) {
  const auto center = state.isometry_center();
  if (!center) throw StructureError("max_isometry_deviation: no isometry center");
  const TreeShape& shape = state.shape();
  double worst = 0.0;
  for (int f = 0; f < shape.num_nodes(); ++f) {
    const NodeId v = shape.node(f);
    if (v == *center) continue;
    const std::size_t ax = shape.axis_towards(v, shape.path(v, *center)[1]);
    worst = std::max(worst, check_isometry(state.tensor(v), {ax}).max_deviation);
  }
  return worst;
}

}  // namespace attn
