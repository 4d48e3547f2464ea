#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "attn/tpo.hpp"
#include "attn/ttn.hpp"

namespace attn {

/// Effective operator carried by one directed link of the network.
///
/// `closed` sums every term that lies entirely on the link's source side,
/// links (out, in). `open` holds one piece per term that straddles the link,
/// links (left horizontal, out, in, right horizontal). A term absent from
/// both acts as the identity on this link.
struct LinkOperator {
  std::optional<Tensor> closed;
  std::map<int, Tensor> open;
};

/// The three incoming link operators of a tensor, in link order
/// (child 0, child 1, parent).
class LocalHamiltonian {
 public:
  LocalHamiltonian() = default;
  explicit LocalHamiltonian(std::array<LinkOperator, 3> links);

  const std::array<LinkOperator, 3>& links() const { return links_; }
  /// H_eff T with the same links as T.
  Tensor apply(const Tensor& t) const;
  /// <T|H_eff|T> / <T|T>.
  double energy(const Tensor& t) const;

 private:
  std::array<LinkOperator, 3> links_;
  std::vector<int> open_terms_;
};

inline Tensor apply_eff_ops(const Tensor& t, const LocalHamiltonian& h) { return h.apply(t); }

/// Contracts `t` with conj(t) over every link except `out_axis` after
/// applying the incoming operators `x` (on `x_axis`) and `y` (on `y_axis`).
/// Ring order is out_axis, x_axis, y_axis cyclically. Terms straddling the
/// output link are listed in `open_at_output`; the others close by tracing
/// their horizontal link.
LinkOperator combine_link_operators(const Tensor& t, std::size_t out_axis, std::size_t x_axis,
                                    const LinkOperator& x, std::size_t y_axis, const LinkOperator& y,
                                    const std::vector<bool>& open_at_output);

/// Lazily evaluated effective operators of a TPO operator on a TTN.
///
/// Each cached link operator records the tensor versions it was built from;
/// a changed tensor invalidates the operators flowing out of it. Operators
/// are always built pointing towards the current isometry center.
class EffectiveOperators {
 public:
  EffectiveOperators(const TpoOperator& op, const TreeShape& shape);

  const TpoOperator& source() const { return source_; }
  /// Site tensors of every term with the prefactor folded into the first.
  const std::vector<TpoTerm>& terms() const { return terms_; }

  /// Operator on the physical link of `site`.
  const LinkOperator& site(int site) const { return sites_[static_cast<std::size_t>(site)]; }
  /// Operator on the parent link of `v` built from the subtree below.
  const LinkOperator& up(const TtnState& state, NodeId v);
  /// Operator on child link `which` of `v`: a site operator or up().
  const LinkOperator& below(const TtnState& state, NodeId v, int which);
  /// Operator on the parent link of `v` built from everything else.
  const LinkOperator& down(const TtnState& state, NodeId v);

  /// Incoming operators of tensor `v`; `v` must be the isometry center.
  LocalHamiltonian local_hamiltonian(const TtnState& state, NodeId v);
  /// <psi|op|psi> / <psi|psi>, evaluated at the isometry center.
  double energy(const TtnState& state);

  /// Whether term `k` has sites both inside and outside the subtree of `v`.
  bool straddles(int k, NodeId v) const;

 private:
  struct Entry {
    std::optional<LinkOperator> op;
    std::vector<std::uint64_t> stamp;
  };
  std::vector<std::uint64_t> up_stamp(const TtnState& state, NodeId v) const;
  std::vector<std::uint64_t> down_stamp(const TtnState& state, NodeId v) const;
  std::vector<bool> open_mask(NodeId v) const;

  TpoOperator source_;
  TreeShape shape_;
  std::vector<TpoTerm> terms_;
  std::vector<LinkOperator> sites_;
  std::vector<Entry> up_;
  std::vector<Entry> down_;
  LinkOperator empty_;
};

/// Effective operators of `op` on `state`, every link towards the center
/// evaluated eagerly.
EffectiveOperators build_effective_operators(const TtnState& state, const TpoOperator& op);

}  // namespace attn
