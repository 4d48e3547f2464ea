#include "attn/measure.hpp"

#include "attn/effective.hpp"
#include "attn/error.hpp"

namespace attn {

Complex measure_local(TtnState& state, const Tensor& op, int site) {
  const std::size_t d = state.local_dim();
  if (op.shape() != Shape{d, d}) throw StructureError("measure_local: operator must be (d x d)");
  if (site < 0 || site >= state.num_sites()) throw StructureError("measure_local: site out of range");
  const NodeId v = state.shape().lowest_node_of_site(site);
  state.isometrize_towards(v);
  const Tensor& t = state.tensor(v);
  const std::size_t axis = static_cast<std::size_t>(site & 1);
  Tensor ot = contract(op, t, {{1, axis}});
  if (axis == 1) ot = ot.permute({1, 0, 2});
  return inner(t, ot) / inner(t, t);
}

Complex measure_tpo_term(TtnState& state, const TpoTerm& term) {
  term.validate();
  if (term.local_dim() != state.local_dim()) throw StructureError("measure_tpo_term: local dimension mismatch");
  for (int s : term.sites)
    if (s < 0 || s >= state.num_sites()) throw StructureError("measure_tpo_term: site out of range");
  if (term.num_sites() == 1) {
    const Tensor& w = term.site_tensors.front();
    return term.prefactor * measure_local(state, w.reshape({w.dim(1), w.dim(2)}), term.sites.front());
  }
  const TreeShape& shape = state.shape();
  NodeId anchor = shape.lowest_node_of_site(term.sites.front());
  for (int s : term.sites) anchor = shape.common_ancestor(anchor, shape.lowest_node_of_site(s));
  state.isometrize_towards(anchor);
  TpoOperator single(state.num_sites(), state.local_dim());
  single.add_term(term);
  EffectiveOperators eff(single, shape);
  const LocalHamiltonian h({eff.below(state, anchor, 0), eff.below(state, anchor, 1), LinkOperator{}});
  const Tensor& t = state.tensor(anchor);
  return inner(t, h.apply(t)) / inner(t, t);
}

Eigen::MatrixXcd correlation_matrix(TtnState& state, const DisentanglerLayer& layer, const Tensor& op_a,
                                    const Tensor& op_b) {
  const int n = state.num_sites();
  const std::size_t d = state.local_dim();
  if (op_a.shape() != Shape{d, d} || op_b.shape() != Shape{d, d})
    throw StructureError("correlation_matrix: operators must be (d x d)");
  AbsorbOptions absorb;
  absorb.allow_multiple_gates = true;
  Eigen::MatrixXcd c(n, n);
  const Tensor ab = contract(op_a, op_b, {{1, 0}});
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      TpoOperator o(n, d);
      if (i == j) {
        o.add_term(TpoTerm::product({i}, {ab}));
      } else if (i < j) {
        o.add_term(TpoTerm::product({i, j}, {op_a, op_b}));
      } else {
        o.add_term(TpoTerm::product({j, i}, {op_b, op_a}));
      }
      const TpoOperator dressed = layer.empty() ? o : contract_de_layer(o, layer, absorb);
      c(i, j) = measure_tpo_term(state, dressed.all_terms().front());
    }
  }
  return c;
}

}  // namespace attn
