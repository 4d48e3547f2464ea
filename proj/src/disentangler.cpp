#include "attn/disentangler.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <string>

#include <Eigen/SVD>

#include "attn/dense.hpp"
#include "attn/error.hpp"

namespace attn {

namespace {

std::string pair_name(int a, int b) {
  std::ostringstream os;
  os << "(" << a << "," << b << ")";
  return os.str();
}

std::string ket(const std::string& link) { return "k:" + link; }
std::string bra(const std::string& link) { return "b:" + link; }
std::string site_link(int s) { return "S" + std::to_string(s); }
std::string node_link(const TreeShape& shape, NodeId v) { return "L" + std::to_string(shape.flat(v)); }
std::string bond(int j) { return "h" + std::to_string(j); }

/// Index of the horizontal bond of `term` crossing the cut left of `cut`.
int bond_at_cut(const TpoTerm& term, int cut) {
  return static_cast<int>(std::lower_bound(term.sites.begin(), term.sites.end(), cut) - term.sites.begin());
}

/// delta(hl, hr) delta(o, i) with links (hl, o, i, hr).
Tensor identity_site(std::size_t h, std::size_t d) {
  return outer(Tensor::identity(h), Tensor::identity(d)).permute({0, 2, 3, 1});
}

/// Copy of `term` with identity site tensors on the missing `extra` sites.
TpoTerm extend_term(const TpoTerm& term, std::initializer_list<int> extra) {
  std::vector<int> sites = term.sites;
  for (int s : extra)
    if (!term.contains(s)) sites.push_back(s);
  std::sort(sites.begin(), sites.end());
  TpoTerm out;
  out.prefactor = term.prefactor;
  out.sites = sites;
  const std::size_t d = term.local_dim();
  for (int s : sites) {
    const int p = term.position(s);
    out.site_tensors.push_back(p >= 0 ? term.site_tensors[static_cast<std::size_t>(p)]
                                      : identity_site(term.bond_before(s), d));
  }
  return out;
}

/// Contracts the two-site gate g[n_a, n_b, x_a, x_b] into the chain on
/// `leg` (1: out, 2: in) of positions pa < pb, carrying the gate's inner
/// link through the sites in between.
void apply_gate_on_leg(std::vector<Tensor>& ws, std::size_t pa, std::size_t pb, const Tensor& g, std::size_t leg) {
  const QrResult qr = qr_split(g.permute({0, 2, 1, 3}), {0, 1});  // Q[na, xa, k], R[k, nb, xb]
  const std::size_t k = qr.r.dim(0);
  {
    Tensor& w = ws[pa];
    Tensor t = contract(w, qr.q, {{leg, 1}});  // [hl, other, hr, na, k]
    t = leg == 1 ? t.permute({0, 3, 1, 2, 4}) : t.permute({0, 1, 3, 2, 4});
    w = std::move(t).reshape({w.dim(0), w.dim(1), w.dim(2), w.dim(3) * k});
  }
  for (std::size_t j = pa + 1; j < pb; ++j) {
    Tensor& w = ws[j];
    Tensor t = outer(w, Tensor::identity(k)).permute({0, 4, 1, 2, 3, 5});
    w = std::move(t).reshape({w.dim(0) * k, w.dim(1), w.dim(2), w.dim(3) * k});
  }
  {
    Tensor& w = ws[pb];
    Tensor t = contract(w, qr.r, {{leg, 2}});  // [hl, other, hr, k, nb]
    t = leg == 1 ? t.permute({0, 3, 4, 1, 2}) : t.permute({0, 3, 1, 4, 2});
    w = std::move(t).reshape({w.dim(0) * k, w.dim(1), w.dim(2), w.dim(3)});
  }
}

/// Left factor with orthonormal columns and right factor of a matricized tensor.
std::pair<Tensor, Tensor> orthogonal_split(const Tensor& t, std::span<const std::size_t> left,
                                           const AbsorbOptions& options) {
  if (!options.use_svd) {
    QrResult qr = qr_split_rank_revealing(t, left, options.qr_threshold);
    return {std::move(qr.q), std::move(qr.r)};
  }
  SvdResult svd = svd_split(t, left, static_cast<std::size_t>(-1), options.svd_cutoff);
  Tensor sv = svd.vh;
  const std::size_t cols = sv.size() / sv.dim(0);
  for (std::size_t r = 0; r < sv.dim(0); ++r)
    for (std::size_t c = 0; c < cols; ++c) sv[r * cols + c] *= svd.singular_values[r];
  return {std::move(svd.u), std::move(sv)};
}

/// Two-pass recompression of the horizontal links of a chain.
void recompress(std::vector<Tensor>& ws, const AbsorbOptions& options) {
  const std::size_t n = ws.size();
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const std::array<std::size_t, 3> left{0, 1, 2};
    auto [q, r] = orthogonal_split(ws[j], left, options);  // q[hl,o,i,k], r[k,hr]
    ws[j] = std::move(q);
    ws[j + 1] = contract(r, ws[j + 1], {{1, 0}});
  }
  for (std::size_t j = n; j-- > 1;) {
    const std::array<std::size_t, 3> left{1, 2, 3};
    auto [q, r] = orthogonal_split(ws[j], left, options);  // q[o,i,hr,k], r[k,hl]
    ws[j] = q.permute({3, 0, 1, 2});
    ws[j - 1] = contract(ws[j - 1], r, {{3, 1}});
  }
}

/// Drops sites whose tensor is a multiple of the identity with dummy
/// horizontal links, folding the multiple into the prefactor.
void prune_identities(TpoTerm& term) {
  for (std::size_t j = 0; j < term.sites.size() && term.sites.size() > 1;) {
    const Tensor& w = term.site_tensors[j];
    if (w.dim(0) == 1 && w.dim(3) == 1) {
      const std::size_t d = w.dim(1);
      const Complex c = w[0];
      double dev = 0.0;
      for (std::size_t o = 0; o < d; ++o)
        for (std::size_t i = 0; i < d; ++i) dev = std::max(dev, std::abs(w[o * d + i] - (o == i ? c : Complex{0.0})));
      if (dev <= 1e-13 * std::max(1.0, std::abs(c))) {
        term.prefactor *= c;
        term.sites.erase(term.sites.begin() + static_cast<std::ptrdiff_t>(j));
        term.site_tensors.erase(term.site_tensors.begin() + static_cast<std::ptrdiff_t>(j));
        continue;
      }
    }
    ++j;
  }
}

bool term_holds_pair(const TpoTerm& t, int a, int b) { return t.contains(a) && t.contains(b); }

void check_gate_shape(const Disentangler& e, std::size_t d) {
  if (e.u.shape() != Shape{d, d, d, d})
    throw PlacementError(PlacementRule::kShape, "disentangler " + pair_name(e.site_a, e.site_b) +
                                                    ": gate must have links (d, d, d, d)");
}

/// Labeled TTN tensor of `v`, ket or bra.
Labeled labeled_node(const TtnState& state, NodeId v, bool is_bra) {
  const TreeShape& shape = state.shape();
  std::vector<std::string> names;
  for (int c = 0; c < 2; ++c)
    names.push_back(v.level == 0 ? site_link(2 * v.index + c) : node_link(shape, shape.child(v, c)));
  names.push_back(node_link(shape, v));
  for (auto& n : names) n = is_bra ? bra(n) : ket(n);
  return {is_bra ? state.tensor(v).conj() : state.tensor(v), names};
}

/// Piece of term `k` on the parent link of `v`, or the identity.
Labeled up_piece(const TtnState& state, EffectiveOperators& eff, NodeId v, int k) {
  const TreeShape& shape = state.shape();
  const std::string link = node_link(shape, v);
  const LinkOperator& op = eff.up(state, v);
  auto it = op.open.find(k);
  if (it == op.open.end()) return delta(bra(link), ket(link), state.parent_bond(v));
  const TpoTerm& term = eff.terms()[static_cast<std::size_t>(k)];
  return {it->second,
          {bond(bond_at_cut(term, shape.first_site(v))), bra(link), ket(link), bond(bond_at_cut(term, shape.end_site(v)))}};
}

Labeled down_piece(const TtnState& state, EffectiveOperators& eff, NodeId v, int k) {
  const TreeShape& shape = state.shape();
  const std::string link = node_link(shape, v);
  const LinkOperator& op = eff.down(state, v);
  auto it = op.open.find(k);
  if (it == op.open.end()) return delta(bra(link), ket(link), state.parent_bond(v));
  const TpoTerm& term = eff.terms()[static_cast<std::size_t>(k)];
  return {it->second,
          {bond(bond_at_cut(term, shape.end_site(v))), bra(link), ket(link), bond(bond_at_cut(term, shape.first_site(v)))}};
}

Labeled site_piece(const TpoTerm& term, int s, std::size_t d, const std::string& out, const std::string& in) {
  const int p = term.position(s);
  if (p < 0) return delta(out, in, d);
  return {term.site_tensors[static_cast<std::size_t>(p)], {bond(p), out, in, bond(p + 1)}};
}

}  // namespace

int DisentanglerLayer::owner(int site) const {
  for (std::size_t j = 0; j < entries.size(); ++j)
    if (entries[j].site_a == site || entries[j].site_b == site) return static_cast<int>(j);
  return -1;
}

double DisentanglerLayer::max_unitarity_deviation() const {
  double dev = 0.0;
  for (const auto& e : entries) {
    dev = std::max(dev, check_isometry(e.u, {0, 1}).max_deviation);
    dev = std::max(dev, check_isometry(e.u, {2, 3}).max_deviation);
  }
  return dev;
}

PathAnchor find_path_anchor(const TreeShape& shape, int site_a, int site_b) {
  if (site_a > site_b) std::swap(site_a, site_b);
  if (site_a < 0 || site_b >= shape.num_sites() || site_a == site_b)
    throw PlacementError(PlacementRule::kSiteRange, "disentangler " + pair_name(site_a, site_b) +
                                                        ": need two distinct sites in [0, N)");
  PathAnchor p;
  p.left = shape.lowest_node_of_site(site_a);
  p.right = shape.lowest_node_of_site(site_b);
  p.anchor = shape.common_ancestor(p.left, p.right);
  p.path = shape.path(p.left, p.right);
  return p;
}

bool path_untruncated(const TreeShape& shape, std::size_t local_dim, std::size_t max_bond, int site_a,
                      int site_b) {
  const PathAnchor p = find_path_anchor(shape, site_a, site_b);
  for (std::size_t j = 0; j + 1 < p.path.size(); ++j) {
    const NodeId lower = p.path[j].level < p.path[j + 1].level ? p.path[j] : p.path[j + 1];
    const int inside = shape.subtree_size(lower);
    const int exponent = std::min(inside, shape.num_sites() - inside);
    double reach = std::pow(static_cast<double>(local_dim), exponent);
    if (reach > static_cast<double>(max_bond)) return false;
  }
  return true;
}

DisentanglerLayer place_disentanglers(const TpoOperator& op, const TreeShape& shape, std::size_t max_bond,
                                      const PlacementOptions& options) {
  if (op.num_sites() != shape.num_sites()) throw StructureError("place_disentanglers: size mismatch");
  std::set<std::pair<int, int>> pairs;
  for (const auto& t : op.interaction_terms())
    for (std::size_t i = 0; i < t.sites.size(); ++i)
      for (std::size_t j = i + 1; j < t.sites.size(); ++j) {
        const int a = t.sites[i], b = t.sites[j];
        if ((a >> 1) == (b >> 1)) continue;
        if (path_untruncated(shape, op.local_dim(), max_bond, a, b)) continue;
        pairs.emplace(a, b);
      }
  std::vector<std::pair<int, int>> order(pairs.begin(), pairs.end());
  std::stable_sort(order.begin(), order.end(), [&](const auto& x, const auto& y) {
    return find_path_anchor(shape, x.first, x.second).anchor.level >
           find_path_anchor(shape, y.first, y.second).anchor.level;
  });

  DisentanglerLayer layer{shape.num_sites(), op.local_dim(), {}};
  const Tensor identity = Tensor::identity(op.local_dim() * op.local_dim())
                              .reshape({op.local_dim(), op.local_dim(), op.local_dim(), op.local_dim()});
  for (const auto& [a, b] : order) {
    if (options.budget && layer.size() >= *options.budget) break;
    if (layer.owner(a) >= 0 || layer.owner(b) >= 0) continue;
    bool shared = false;
    for (const auto& t : op.interaction_terms()) {
      if (!t.contains(a) && !t.contains(b)) continue;
      for (int s : t.sites)
        if (s != a && s != b && layer.owner(s) >= 0) shared = true;
    }
    if (shared) continue;
    layer.entries.push_back({a, b, identity});
  }
  return layer;
}

void validate_layer(const DisentanglerLayer& layer, const TpoOperator& op, const TreeShape& shape,
                    std::size_t max_bond) {
  if (layer.num_sites != shape.num_sites() || op.num_sites() != shape.num_sites())
    throw StructureError("validate_layer: size mismatch");
  std::set<int> used;
  for (const auto& e : layer.entries) {
    check_gate_shape(e, op.local_dim());
    if (e.site_a >= e.site_b)
      throw PlacementError(PlacementRule::kSiteRange, "disentangler " + pair_name(e.site_a, e.site_b) + ": need site_a < site_b");
    find_path_anchor(shape, e.site_a, e.site_b);
    const std::string name = "disentangler " + pair_name(e.site_a, e.site_b);
    if ((e.site_a >> 1) == (e.site_b >> 1))
      throw PlacementError(PlacementRule::kSameTensor, name + ": both sites belong to one lowest-layer tensor");
    const auto& terms = op.interaction_terms();
    if (std::none_of(terms.begin(), terms.end(), [&](const TpoTerm& t) { return term_holds_pair(t, e.site_a, e.site_b); }))
      throw PlacementError(PlacementRule::kNotOnTerm, name + ": no interaction term holds both sites");
    if (used.count(e.site_a) || used.count(e.site_b))
      throw PlacementError(PlacementRule::kSiteOverlap, name + ": site already carries a disentangler");
    used.insert(e.site_a);
    used.insert(e.site_b);
    if (path_untruncated(shape, op.local_dim(), max_bond, e.site_a, e.site_b))
      throw PlacementError(PlacementRule::kUntruncated, name + ": every link on the tree path is untruncated");
  }
  for (const auto& t : op.interaction_terms()) {
    std::set<int> owners;
    for (int s : t.sites)
      if (int o = layer.owner(s); o >= 0) owners.insert(o);
    if (owners.size() > 1) {
      auto it = owners.begin();
      const auto& e0 = layer.entries[static_cast<std::size_t>(*it++)];
      const auto& e1 = layer.entries[static_cast<std::size_t>(*it)];
      throw PlacementError(PlacementRule::kSharedTerm, "disentanglers " + pair_name(e0.site_a, e0.site_b) + " and " +
                                                           pair_name(e1.site_a, e1.site_b) + " share a term");
    }
  }
}

TpoTerm absorb_gate_into_term(const TpoTerm& term, const Tensor& gate, int site_a, int site_b, bool conjugate,
                              const AbsorbOptions& options) {
  term.validate();
  const std::size_t d = term.local_dim();
  if (gate.shape() != Shape{d, d, d, d})
    throw StructureError("absorb_gate_into_term: gate must have links (d, d, d, d)");
  if (site_a >= site_b) throw StructureError("absorb_gate_into_term: need site_a < site_b");
  if (!term.contains(site_a) && !term.contains(site_b))
    throw StructureError("absorb_gate_into_term: gate sites " + pair_name(site_a, site_b) + " miss the term");
  TpoTerm out = extend_term(term, {site_a, site_b});
  const auto pa = static_cast<std::size_t>(out.position(site_a));
  const auto pb = static_cast<std::size_t>(out.position(site_b));
  if (conjugate) {
    apply_gate_on_leg(out.site_tensors, pa, pb, gate.conj(), 2);
  } else {
    apply_gate_on_leg(out.site_tensors, pa, pb, gate, 1);
  }
  recompress(out.site_tensors, options);
  prune_identities(out);
  out.validate();
  return out;
}

TpoTerm conjugate_term(const TpoTerm& term, const Tensor& u, int site_a, int site_b, const AbsorbOptions& options) {
  return absorb_gate_into_term(absorb_gate_into_term(term, u, site_a, site_b, false, options), u, site_a, site_b, true,
                               options);
}

TpoOperator contract_de_layer(const TpoOperator& op, const DisentanglerLayer& layer, const AbsorbOptions& options) {
  if (layer.num_sites != op.num_sites()) throw StructureError("contract_de_layer: size mismatch");
  TpoOperator out(op.num_sites(), op.local_dim());
  for (const auto& e : layer.entries) check_gate_shape(e, op.local_dim());
  for (const auto& term : op.all_terms()) {
    std::set<int> owners;
    for (int s : term.sites)
      if (int o = layer.owner(s); o >= 0) owners.insert(o);
    if (owners.size() > 1 && !options.allow_multiple_gates)
      throw PlacementError(PlacementRule::kSharedTerm, "contract_de_layer: a term touches more than one disentangler");
    TpoTerm t = term;
    for (int o : owners) {
      const auto& e = layer.entries[static_cast<std::size_t>(o)];
      t = conjugate_term(t, e.u, e.site_a, e.site_b, options);
    }
    out.add_term(std::move(t));
  }
  return out;
}

Vector apply_layer_dense(const DisentanglerLayer& layer, const Vector& psi, bool dagger) {
  Vector out = psi;
  for (const auto& e : layer.entries) {
    const Tensor g = dagger ? e.u.conj().permute({2, 3, 0, 1}) : e.u;
    out = apply_two_site_gate(g, e.site_a, e.site_b, out, layer.num_sites);
  }
  return out;
}

std::vector<TpoTerm> terms_touching(const TpoOperator& op, int site_a, int site_b) {
  std::vector<TpoTerm> out;
  for (const auto& t : op.all_terms())
    if (t.contains(site_a) || t.contains(site_b)) out.push_back(extend_term(t, {site_a, site_b}));
  return out;
}

SideEnvironment precontract_environment(const TtnState& state, EffectiveOperators& eff, int site) {
  const TreeShape& shape = state.shape();
  const NodeId v = shape.lowest_node_of_site(site);
  const int other = site ^ 1;
  SideEnvironment env{v, site, {}};
  const Labeled k_t = labeled_node(state, v, false);
  const Labeled b_t = labeled_node(state, v, true);
  for (std::size_t k = 0; k < eff.terms().size(); ++k) {
    const Labeled p = site_piece(eff.terms()[k], other, state.local_dim(), bra(site_link(other)), ket(site_link(other)));
    env.per_term.push_back(k_t * p * b_t);
  }
  return env;
}

SideEnvironment iterate_environment(const TtnState& state, EffectiveOperators& eff, const SideEnvironment& env) {
  const TreeShape& shape = state.shape();
  const auto parent = shape.parent(env.top);
  if (!parent) throw StructureError("iterate_environment: already at the top tensor");
  const NodeId sib = shape.child(*parent, 1 - shape.child_slot(env.top));
  SideEnvironment out{*parent, env.site, {}};
  const Labeled k_t = labeled_node(state, *parent, false);
  const Labeled b_t = labeled_node(state, *parent, true);
  for (std::size_t k = 0; k < env.per_term.size(); ++k)
    out.per_term.push_back(env.per_term[k] * k_t * up_piece(state, eff, sib, static_cast<int>(k)) * b_t);
  return out;
}

DisentanglerEnvironment build_global_environment(TtnState& state, const TpoOperator& op, int site_a, int site_b) {
  const TreeShape& shape = state.shape();
  const PathAnchor path = find_path_anchor(shape, site_a, site_b);
  if (path.left == path.right)
    throw PlacementError(PlacementRule::kSameTensor, "build_global_environment: sites share a lowest-layer tensor");
  if (site_a > site_b) throw StructureError("build_global_environment: need site_a < site_b");
  const std::size_t d = state.local_dim();
  DisentanglerEnvironment out{site_a, site_b, Tensor({d, d, d, d, d, d, d, d})};
  const auto terms = terms_touching(op, site_a, site_b);
  if (terms.empty()) return out;

  state.isometrize_towards(path.anchor);
  EffectiveOperators eff(TpoOperator::from_terms(op.num_sites(), d, terms), shape);
  SideEnvironment left = precontract_environment(state, eff, site_a);
  while (left.top != shape.child(path.anchor, 0)) left = iterate_environment(state, eff, left);
  SideEnvironment right = precontract_environment(state, eff, site_b);
  while (right.top != shape.child(path.anchor, 1)) right = iterate_environment(state, eff, right);

  const Labeled k_t = labeled_node(state, path.anchor, false);
  const Labeled b_t = labeled_node(state, path.anchor, true);
  const std::vector<std::string> order{"pa", "pb", bra(site_link(site_a)), bra(site_link(site_b)),
                                       ket(site_link(site_a)), ket(site_link(site_b)), "xa", "xb"};
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const TpoTerm& term = eff.terms()[k];
    const Labeled f = left.per_term[k] * k_t * right.per_term[k] * down_piece(state, eff, path.anchor, static_cast<int>(k)) * b_t;
    const Labeled wa = site_piece(term, site_a, d, "pa", "xa");
    const Labeled wb = site_piece(term, site_b, d, "pb", "xb");
    const Labeled g = (f.squeezed() * wa.squeezed() * wb.squeezed()).squeezed();
    out.g += g.ordered(order).t;
  }
  return out;
}

Tensor environment_gamma(const DisentanglerEnvironment& env, const Tensor& u) {
  const std::size_t d = env.g.dim(0);
  if (u.shape() != Shape{d, d, d, d}) throw StructureError("environment_gamma: gate must have links (d, d, d, d)");
  return contract(env.g, u.conj(), {{4, 0}, {5, 1}, {6, 2}, {7, 3}}).reshape({d * d, d * d});
}

double environment_energy(const DisentanglerEnvironment& env, const Tensor& u) {
  const std::size_t d = env.g.dim(0);
  const Tensor gamma = environment_gamma(env, u);
  const RowMatrix um = u.reshape({d * d, d * d}).as_matrix(d * d);
  return (um * gamma.as_matrix(d * d)).trace().real();
}

Tensor svd_update(const Tensor& gamma) {
  if (gamma.rank() != 2 || gamma.dim(0) != gamma.dim(1)) throw StructureError("svd_update: need a square matrix");
  const std::size_t n = gamma.dim(0);
  const RowMatrix g = gamma.as_matrix(n);
  if (!g.allFinite()) throw NumericalError("svd_update: non-finite environment");
  Eigen::JacobiSVD<RowMatrix> svd(g, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RowMatrix u = -svd.matrixV() * svd.matrixU().adjoint();
  const auto d = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(n))));
  if (d * d != n) throw StructureError("svd_update: environment is not a two-site matrix");
  return Tensor::from_matrix(u).reshape({d, d, d, d});
}

DisentanglerOptResult optimize_disentangler(const DisentanglerEnvironment& env, const Tensor& u0,
                                            const DisentanglerOptOptions& options) {
  DisentanglerOptResult res;
  res.site_a = env.site_a;
  res.site_b = env.site_b;
  res.u = u0;
  res.initial_energy = res.energy = environment_energy(env, u0);
  res.trace.push_back(res.energy);
  Tensor u = u0;
  double previous = res.energy;
  for (int it = 0; it < options.max_iter; ++it) {
    const Tensor gamma = environment_gamma(env, u);
    const std::size_t n = gamma.dim(0);
    res.model_trace.push_back(-Eigen::JacobiSVD<RowMatrix>(gamma.as_matrix(n)).singularValues().sum());
    u = svd_update(gamma);
    const double e = environment_energy(env, u);
    if (!std::isfinite(e)) throw NumericalError("optimize_disentangler: non-finite energy");
    res.trace.push_back(e);
    ++res.iterations;
    if (e < res.energy) {
      res.energy = e;
      res.u = u;
    }
    if (std::abs(e - previous) <= options.rel_deviation * std::max(1.0, std::abs(previous))) {
      res.converged = true;
      break;
    }
    previous = e;
  }
  res.rejected = res.energy >= res.initial_energy && res.iterations > 0;
  return res;
}

LayerOptReport optimize_layer(TtnState& state, const TpoOperator& op, DisentanglerLayer& layer,
                              const DisentanglerOptOptions& options) {
  LayerOptReport report;
  if (!state.isometry_center()) state.isometrize_towards(state.shape().top());
  {
    EffectiveOperators before(contract_de_layer(op, layer), state.shape());
    report.energy_before = before.energy(state);
  }
  std::vector<std::size_t> order(layer.entries.size());
  for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return layer.entries[x].site_a < layer.entries[y].site_a;
  });
  for (std::size_t j : order) {
    auto& e = layer.entries[j];
    const DisentanglerEnvironment env = build_global_environment(state, op, e.site_a, e.site_b);
    report.per_gate.push_back(optimize_disentangler(env, e.u, options));
    e.u = report.per_gate.back().u;
  }
  EffectiveOperators after(contract_de_layer(op, layer), state.shape());
  report.energy_after = after.energy(state);
  return report;
}

}  // namespace attn
