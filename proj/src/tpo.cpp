#include "attn/tpo.hpp"

#include <algorithm>
#include <sstream>

#include "attn/error.hpp"

namespace attn {

TpoTerm TpoTerm::product(std::vector<int> sites, const std::vector<Tensor>& ops, Complex prefactor) {
  if (sites.empty() || sites.size() != ops.size())
    throw StructureError("TpoTerm::product: need one operator per site");
  TpoTerm term;
  term.prefactor = prefactor;
  term.sites = std::move(sites);
  for (const auto& op : ops) {
    if (op.rank() != 2 || op.dim(0) != op.dim(1))
      throw StructureError("TpoTerm::product: operators must be square matrices");
    term.site_tensors.push_back(op.reshape({1, op.dim(0), op.dim(1), 1}));
  }
  term.validate();
  return term;
}

bool TpoTerm::contains(int site) const { return position(site) >= 0; }

int TpoTerm::position(int site) const {
  auto it = std::lower_bound(sites.begin(), sites.end(), site);
  if (it == sites.end() || *it != site) return -1;
  return static_cast<int>(it - sites.begin());
}

std::size_t TpoTerm::bond_before(int site) const {
  auto it = std::lower_bound(sites.begin(), sites.end(), site);
  if (it == sites.begin() || it == sites.end()) return 1;
  return site_tensors[static_cast<std::size_t>(it - sites.begin())].dim(0);
}

std::size_t TpoTerm::max_bond() const {
  std::size_t b = 1;
  for (const auto& w : site_tensors) b = std::max(b, w.dim(3));
  return b;
}

Tensor TpoTerm::dense() const {
  // acc links: (out_0 .. out_k, in_0 .. in_k, h) built site by site.
  Tensor acc = site_tensors[0].reshape({site_tensors[0].dim(1), site_tensors[0].dim(2), site_tensors[0].dim(3)});
  std::size_t n_out = 1;
  for (std::size_t s = 1; s < site_tensors.size(); ++s) {
    const std::size_t r = acc.rank();
    acc = contract(acc, site_tensors[s], {{r - 1, 0}});
    // links: out_0..out_{s-1}, in_0..in_{s-1}, out_s, in_s, h
    std::vector<std::size_t> perm;
    for (std::size_t k = 0; k < n_out; ++k) perm.push_back(k);
    perm.push_back(2 * n_out);
    for (std::size_t k = 0; k < n_out; ++k) perm.push_back(n_out + k);
    perm.push_back(2 * n_out + 1);
    perm.push_back(2 * n_out + 2);
    acc = acc.permute(perm);
    ++n_out;
  }
  std::size_t dim = 1;
  for (const auto& w : site_tensors) dim *= w.dim(1);
  Tensor out = std::move(acc).reshape({dim, dim});
  out *= prefactor;
  return out;
}

void TpoTerm::validate() const {
  if (sites.empty() || sites.size() != site_tensors.size())
    throw StructureError("TpoTerm: sites and site tensors differ in length");
  if (!std::is_sorted(sites.begin(), sites.end()) ||
      std::adjacent_find(sites.begin(), sites.end()) != sites.end())
    throw StructureError("TpoTerm: sites must be strictly ascending");
  for (std::size_t k = 0; k < site_tensors.size(); ++k) {
    const auto& w = site_tensors[k];
    if (w.rank() != 4) throw StructureError("TpoTerm: site tensors must have two horizontal links");
    if (w.dim(1) != w.dim(2) || w.dim(1) != site_tensors[0].dim(1))
      throw StructureError("TpoTerm: inconsistent physical dimensions");
    if (k > 0 && site_tensors[k - 1].dim(3) != w.dim(0))
      throw StructureError("TpoTerm: horizontal link mismatch");
  }
  if (site_tensors.front().dim(0) != 1 || site_tensors.back().dim(3) != 1)
    throw StructureError("TpoTerm: edge horizontal links must be dummies");
}

TpoOperator::TpoOperator(int num_sites, std::size_t local_dim)
    : num_sites_(num_sites), local_dim_(local_dim) {
  if (num_sites <= 0 || local_dim == 0) throw StructureError("TpoOperator: invalid size");
}

TpoOperator TpoOperator::from_terms(int num_sites, std::size_t local_dim, std::span<const TpoTerm> terms) {
  TpoOperator op(num_sites, local_dim);
  for (const auto& t : terms) op.add_term(t);
  return op;
}

void TpoOperator::add_local(int site, const Tensor& op, Complex prefactor) {
  if (site < 0 || site >= num_sites_) throw StructureError("add_local: site out of range");
  if (op.shape() != Shape{local_dim_, local_dim_})
    throw StructureError("add_local: operator must be d x d");
  auto it = local_.find(site);
  if (it == local_.end())
    local_.emplace(site, op * prefactor);
  else
    it->second += op * prefactor;
}

void TpoOperator::add_term(TpoTerm term) {
  term.validate();
  if (term.local_dim() != local_dim_) throw StructureError("add_term: local dimension mismatch");
  if (term.sites.front() < 0 || term.sites.back() >= num_sites_)
    throw StructureError("add_term: site out of range");
  if (term.sites.size() == 1) {
    add_local(term.sites[0], term.dense(), 1.0);
    return;
  }
  interactions_.push_back(std::move(term));
}

std::vector<TpoTerm> TpoOperator::all_terms() const {
  std::vector<TpoTerm> out;
  out.reserve(local_.size() + interactions_.size());
  for (const auto& [site, op] : local_) out.push_back(TpoTerm::product({site}, {op}));
  out.insert(out.end(), interactions_.begin(), interactions_.end());
  return out;
}

TpoOperator sum_local_terms(const TpoOperator& op) {
  // add_local already merges; rebuilding keeps the result canonical.
  TpoOperator out(op.num_sites(), op.local_dim());
  for (const auto& t : op.all_terms()) out.add_term(t);
  return out;
}

namespace pauli {

Tensor identity() { return Tensor::identity(2); }
Tensor x() { return Tensor({2, 2}, {0.0, 1.0, 1.0, 0.0}); }
Tensor y() { return Tensor({2, 2}, {0.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 0.0}); }
Tensor z() { return Tensor({2, 2}, {1.0, 0.0, 0.0, -1.0}); }

Tensor by_name(char name) {
  switch (name) {
    case 'x': return x();
    case 'y': return y();
    case 'z': return z();
    case 'i': return identity();
    default: {
      std::ostringstream os;
      os << "unknown Pauli operator '" << name << "'";
      throw ConfigError(os.str());
    }
  }
}

}  // namespace pauli

}  // namespace attn
