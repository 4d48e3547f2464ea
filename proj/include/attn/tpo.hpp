#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "attn/tensor.hpp"

namespace attn {

/// One n-body operator term stored as a chain of site tensors.
///
/// Site tensor links: (left horizontal, out, in, right horizontal). "out" is
/// the row (ket) index of the operator, "in" the column index. The leftmost
/// and rightmost horizontal links are dummies of dimension 1.
struct TpoTerm {
  std::vector<int> sites;
  std::vector<Tensor> site_tensors;
  Complex prefactor{1.0};

  /// Product term prefactor * ops[0] (x) ops[1] (x) ... with bond dimension 1.
  /// `sites` must be ascending; ops are d x d matrices.
  static TpoTerm product(std::vector<int> sites, const std::vector<Tensor>& ops,
                         Complex prefactor = 1.0);

  std::size_t num_sites() const { return sites.size(); }
  std::size_t local_dim() const { return site_tensors.front().dim(1); }
  bool contains(int site) const;
  /// Position of `site` within `sites`, or -1.
  int position(int site) const;
  /// Dimension of the horizontal link crossing the cut just left of `site`
  /// (1 outside the span of the term).
  std::size_t bond_before(int site) const;
  std::size_t max_bond() const;

  /// Dense (d^n x d^n) matrix over the term's own sites, prefactor included;
  /// sites[0] is the slowest-varying index.
  Tensor dense() const;

  /// Throws StructureError on broken chain invariants.
  void validate() const;
};

/// A Hamiltonian or observable stored as a set of TPO terms, with all local
/// terms on a site summed into one d x d matrix.
class TpoOperator {
 public:
  TpoOperator() = default;
  TpoOperator(int num_sites, std::size_t local_dim);

  static TpoOperator from_terms(int num_sites, std::size_t local_dim, std::span<const TpoTerm> terms);

  int num_sites() const { return num_sites_; }
  std::size_t local_dim() const { return local_dim_; }

  /// Adds prefactor * op on `site`, summing into any existing local term.
  void add_local(int site, const Tensor& op, Complex prefactor = 1.0);
  /// Single-site terms are folded into the local terms.
  void add_term(TpoTerm term);

  const std::map<int, Tensor>& local_terms() const { return local_; }
  const std::vector<TpoTerm>& interaction_terms() const { return interactions_; }

  /// Every term as a TpoTerm: local terms (ascending site) first, then the
  /// interaction terms in storage order.
  std::vector<TpoTerm> all_terms() const;

  bool empty() const { return local_.empty() && interactions_.empty(); }

 private:
  int num_sites_ = 0;
  std::size_t local_dim_ = 2;
  std::map<int, Tensor> local_;
  std::vector<TpoTerm> interactions_;
};

/// Canonical form with at most one local term per site.
TpoOperator sum_local_terms(const TpoOperator& op);

namespace pauli {
Tensor identity();
Tensor x();
Tensor y();
Tensor z();
/// Pauli matrix by name: 'x', 'y', 'z' or 'i'.
Tensor by_name(char name);
}  // namespace pauli

}  // namespace attn
