#include "attn/effective.hpp"

#include <algorithm>
#include <set>

#include "attn/error.hpp"

namespace attn {

namespace {

using Piece = std::pair<std::size_t, const Tensor*>;

/// Applies a closed (out, in) operator on one link of a rank-3 tensor.
Tensor apply_closed(const Tensor& t, const Tensor& c, std::size_t axis) {
  const Tensor r = contract(c, t, {{1, axis}});
  std::array<std::size_t, 3> perm{};
  std::size_t rest = 1;
  for (std::size_t k = 0; k < 3; ++k) perm[k] = k == axis ? 0 : rest++;
  return r.permute(perm);
}

/// Applies open pieces in sequence. Result links: (h_start, t0, t1, t2, h_end).
Tensor ring_apply(const Tensor& t, const std::vector<Piece>& seq) {
  const auto [a, p] = seq.front();
  Tensor r = contract(*p, t, {{2, a}});  // [hl, out, hr, rest...]
  {
    std::array<std::size_t, 5> perm{};
    perm[0] = 0;
    std::size_t rest = 3;
    for (std::size_t k = 0; k < 3; ++k) perm[1 + k] = k == a ? 1 : rest++;
    perm[4] = 2;
    r = r.permute(perm);
  }
  for (std::size_t s = 1; s < seq.size(); ++s) {
    const auto [b, q] = seq[s];
    Tensor n = contract(r, *q, {{4, 0}, {1 + b, 2}});  // [hs, rest..., out, hr]
    std::array<std::size_t, 5> perm{};
    perm[0] = 0;
    std::size_t rest = 1;
    for (std::size_t k = 0; k < 3; ++k) perm[1 + k] = k == b ? 3 : rest++;
    perm[4] = 4;
    r = n.permute(perm);
  }
  return r;
}

const Tensor* find_piece(const LinkOperator& op, int k) {
  auto it = op.open.find(k);
  return it == op.open.end() ? nullptr : &it->second;
}

void accumulate(std::optional<Tensor>& into, Tensor t) {
  if (into) {
    *into += t;
  } else {
    into = std::move(t);
  }
}

}  // namespace

LocalHamiltonian::LocalHamiltonian(std::array<LinkOperator, 3> links) : links_(std::move(links)) {
  std::set<int> ids;
  for (const auto& l : links_)
    for (const auto& [k, piece] : l.open) ids.insert(k);
  open_terms_.assign(ids.begin(), ids.end());
}

Tensor LocalHamiltonian::apply(const Tensor& t) const {
  if (t.rank() != 3) throw StructureError("LocalHamiltonian: tensor must have three links");
  Tensor out(t.shape());
  for (std::size_t k = 0; k < 3; ++k)
    if (links_[k].closed) out += apply_closed(t, *links_[k].closed, k);
  std::vector<Piece> seq;
  for (int id : open_terms_) {
    seq.clear();
    for (std::size_t k = 0; k < 3; ++k)
      if (const Tensor* p = find_piece(links_[k], id)) seq.emplace_back(k, p);
    if (seq.size() < 2) throw StructureError("LocalHamiltonian: open term reaches a single link");
    out += trace(ring_apply(t, seq), 0, 4);
  }
  return out;
}

double LocalHamiltonian::energy(const Tensor& t) const {
  return inner(t, apply(t)).real() / inner(t, t).real();
}

LinkOperator combine_link_operators(const Tensor& t, std::size_t out_axis, std::size_t x_axis,
                                    const LinkOperator& x, std::size_t y_axis, const LinkOperator& y,
                                    const std::vector<bool>& open_at_output) {
  if (out_axis + x_axis + y_axis != 3 || out_axis == x_axis || x_axis == y_axis || out_axis == y_axis)
    throw StructureError("combine_link_operators: links must be a permutation of (0, 1, 2)");
  LinkOperator res;
  const Tensor tc = t.conj();
  const std::initializer_list<AxisPair> pairs{{x_axis, x_axis}, {y_axis, y_axis}};
  if (x.closed) accumulate(res.closed, contract(tc, apply_closed(t, *x.closed, x_axis), pairs));
  if (y.closed) accumulate(res.closed, contract(tc, apply_closed(t, *y.closed, y_axis), pairs));

  std::set<int> ids;
  for (const auto& [k, piece] : x.open) ids.insert(k);
  for (const auto& [k, piece] : y.open) ids.insert(k);
  std::vector<Piece> seq;
  for (int k : ids) {
    seq.clear();
    if (const Tensor* p = find_piece(x, k)) seq.emplace_back(x_axis, p);
    if (const Tensor* p = find_piece(y, k)) seq.emplace_back(y_axis, p);
    const Tensor r = ring_apply(t, seq);
    Tensor z = contract(tc, r, {{x_axis, 1 + x_axis}, {y_axis, 1 + y_axis}}).permute({1, 0, 2, 3});
    if (open_at_output.at(static_cast<std::size_t>(k))) {
      res.open.emplace(k, std::move(z));
    } else {
      if (seq.size() < 2) throw StructureError("combine_link_operators: term closes with a single piece");
      accumulate(res.closed, trace(z, 0, 3));
    }
  }
  return res;
}

EffectiveOperators::EffectiveOperators(const TpoOperator& op, const TreeShape& shape)
    : source_(op), shape_(shape) {
  if (op.num_sites() != shape.num_sites()) throw StructureError("EffectiveOperators: operator and tree sizes differ");
  terms_ = op.all_terms();
  sites_.resize(static_cast<std::size_t>(shape.num_sites()));
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    TpoTerm& term = terms_[k];
    term.site_tensors.front() *= term.prefactor;
    term.prefactor = 1.0;
    if (term.num_sites() == 1) {
      const Tensor& w = term.site_tensors.front();
      accumulate(sites_[static_cast<std::size_t>(term.sites.front())].closed, w.reshape({w.dim(1), w.dim(2)}));
      continue;
    }
    for (std::size_t j = 0; j < term.num_sites(); ++j)
      sites_[static_cast<std::size_t>(term.sites[j])].open.emplace(static_cast<int>(k), term.site_tensors[j]);
  }
  up_.resize(static_cast<std::size_t>(shape.num_nodes()));
  down_.resize(static_cast<std::size_t>(shape.num_nodes()));
}

bool EffectiveOperators::straddles(int k, NodeId v) const {
  const auto& sites = terms_[static_cast<std::size_t>(k)].sites;
  bool inside = false, outside = false;
  for (int s : sites) (shape_.in_subtree(s, v) ? inside : outside) = true;
  return inside && outside;
}

std::vector<bool> EffectiveOperators::open_mask(NodeId v) const {
  std::vector<bool> mask(terms_.size());
  for (std::size_t k = 0; k < terms_.size(); ++k) mask[k] = straddles(static_cast<int>(k), v);
  return mask;
}

std::vector<std::uint64_t> EffectiveOperators::up_stamp(const TtnState& state, NodeId v) const {
  std::vector<std::uint64_t> s;
  for (int f = 0; f < shape_.num_nodes(); ++f) {
    const NodeId u = shape_.node(f);
    if (shape_.is_ancestor_or_self(v, u)) s.push_back(state.version(u));
  }
  return s;
}

std::vector<std::uint64_t> EffectiveOperators::down_stamp(const TtnState& state, NodeId v) const {
  std::vector<std::uint64_t> s;
  for (int f = 0; f < shape_.num_nodes(); ++f) {
    const NodeId u = shape_.node(f);
    if (!shape_.is_ancestor_or_self(v, u)) s.push_back(state.version(u));
  }
  return s;
}

const LinkOperator& EffectiveOperators::below(const TtnState& state, NodeId v, int which) {
  if (v.level == 0) return site(2 * v.index + which);
  return up(state, shape_.child(v, which));
}

const LinkOperator& EffectiveOperators::up(const TtnState& state, NodeId v) {
  Entry& e = up_[static_cast<std::size_t>(shape_.flat(v))];
  auto stamp = up_stamp(state, v);
  if (e.op && e.stamp == stamp) return *e.op;
  const auto center = state.isometry_center();
  if (!center || shape_.is_ancestor_or_self(v, *center))
    throw StructureError("EffectiveOperators: subtree is not isometric towards its parent");
  const LinkOperator& x = below(state, v, 0);
  const LinkOperator& y = below(state, v, 1);
  e.op = combine_link_operators(state.tensor(v), 2, 0, x, 1, y, open_mask(v));
  e.stamp = std::move(stamp);
  return *e.op;
}

const LinkOperator& EffectiveOperators::down(const TtnState& state, NodeId v) {
  const auto parent = shape_.parent(v);
  if (!parent) return empty_;
  Entry& e = down_[static_cast<std::size_t>(shape_.flat(v))];
  auto stamp = down_stamp(state, v);
  if (e.op && e.stamp == stamp) return *e.op;
  const auto center = state.isometry_center();
  if (!center || !shape_.is_ancestor_or_self(v, *center))
    throw StructureError("EffectiveOperators: complement is not isometric towards the subtree");
  const NodeId w = *parent;
  const Tensor& t = state.tensor(w);
  if (shape_.child_slot(v) == 0) {
    const LinkOperator& x = below(state, w, 1);
    const LinkOperator& y = down(state, w);
    e.op = combine_link_operators(t, 0, 1, x, 2, y, open_mask(v));
  } else {
    const LinkOperator& x = down(state, w);
    const LinkOperator& y = below(state, w, 0);
    e.op = combine_link_operators(t, 1, 2, x, 0, y, open_mask(v));
  }
  e.stamp = std::move(stamp);
  return *e.op;
}

LocalHamiltonian EffectiveOperators::local_hamiltonian(const TtnState& state, NodeId v) {
  if (state.isometry_center() != v) throw StructureError("local_hamiltonian: tensor is not the isometry center");
  LinkOperator c0 = below(state, v, 0);
  LinkOperator c1 = below(state, v, 1);
  LinkOperator p = down(state, v);
  return LocalHamiltonian({std::move(c0), std::move(c1), std::move(p)});
}

double EffectiveOperators::energy(const TtnState& state) {
  const auto center = state.isometry_center();
  if (!center) throw StructureError("EffectiveOperators::energy: no isometry center");
  return local_hamiltonian(state, *center).energy(state.tensor(*center));
}

EffectiveOperators build_effective_operators(const TtnState& state, const TpoOperator& op) {
  EffectiveOperators eff(op, state.shape());
  const auto center = state.isometry_center();
  if (!center) throw StructureError("build_effective_operators: no isometry center");
  eff.local_hamiltonian(state, *center);
  return eff;
}

}  // namespace attn
