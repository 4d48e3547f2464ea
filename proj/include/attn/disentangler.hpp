#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "attn/effective.hpp"
#include "attn/labeled.hpp"
#include "attn/lanczos.hpp"
#include "attn/tpo.hpp"
#include "attn/ttn.hpp"

namespace attn {

/// Two-site unitary u acting on sites (site_a < site_b). Links of u:
/// (out_a, out_b, in_a, in_b).
struct Disentangler {
  int site_a = 0;
  int site_b = 1;
  Tensor u;
};

/// A set of site-disjoint disentanglers D = (x)_j u_j. The aTTN state is
/// D^dagger |psi_TTN>, so energies are <psi_TTN| D H D^dagger |psi_TTN>.
struct DisentanglerLayer {
  int num_sites = 0;
  std::size_t local_dim = 2;
  std::vector<Disentangler> entries;

  bool empty() const { return entries.empty(); }
  std::size_t size() const { return entries.size(); }
  /// Index of the disentangler acting on `site`, or -1.
  int owner(int site) const;
  /// Largest |u u^dagger - 1| entry over the layer.
  double max_unitarity_deviation() const;
};

/// Tree links on the path between the lowest tensors of two sites.
struct PathAnchor {
  NodeId anchor;             ///< lowest common ancestor
  NodeId left;               ///< lowest tensor holding site_a
  NodeId right;              ///< lowest tensor holding site_b
  std::vector<NodeId> path;  ///< left ... anchor ... right
};

/// Unordered in the two sites.
PathAnchor find_path_anchor(const TreeShape& shape, int site_a, int site_b);

/// Whether every tensor-tensor link on the path has a maximal reachable
/// dimension no larger than the bond dimension.
bool path_untruncated(const TreeShape& shape, std::size_t local_dim, std::size_t max_bond, int site_a,
                      int site_b);

struct PlacementOptions {
  std::optional<std::size_t> budget;  ///< cap on the number of disentanglers
};

/// Greedy placement with identity gates. Candidates are ordered by anchor
/// level (highest first), then by (site_a, site_b).
DisentanglerLayer place_disentanglers(const TpoOperator& op, const TreeShape& shape, std::size_t max_bond,
                                      const PlacementOptions& options = {});

/// Throws PlacementError naming the first rule the layer breaks.
void validate_layer(const DisentanglerLayer& layer, const TpoOperator& op, const TreeShape& shape,
                    std::size_t max_bond);

struct AbsorbOptions {
  bool use_svd = false;         ///< truncated SVD instead of rank-revealing QR
  double qr_threshold = 1e-12;  ///< relative pivot cutoff of the QR recompression
  double svd_cutoff = 1e-14;    ///< relative singular value cutoff
  bool allow_multiple_gates = false;  ///< let one term meet several gates (observables)
};

/// gate . term (conjugate = false) or term . gate^dagger (conjugate = true)
/// for a gate with links (out_a, out_b, in_a, in_b) on (site_a, site_b).
/// The term is extended with identity sites, the gate's inner link is
/// carried through the sites in between, and the horizontal links are
/// recompressed.
TpoTerm absorb_gate_into_term(const TpoTerm& term, const Tensor& gate, int site_a, int site_b, bool conjugate,
                              const AbsorbOptions& options = {});

/// u . term . u^dagger.
TpoTerm conjugate_term(const TpoTerm& term, const Tensor& u, int site_a, int site_b,
                       const AbsorbOptions& options = {});

/// H' = D H D^dagger as a TPO operator. Throws PlacementError if a term
/// touches more than one disentangler, unless options allow it.
TpoOperator contract_de_layer(const TpoOperator& op, const DisentanglerLayer& layer,
                              const AbsorbOptions& options = {});

/// D^dagger psi (or D psi) on a full state vector.
Vector apply_layer_dense(const DisentanglerLayer& layer, const Vector& psi, bool dagger);

/// Environment of one disentangler built from a TTN. The energy of the
/// terms touching the pair as a function of the gate is
/// E(u) = Tr(u Gamma(u)), with
///   Gamma[(p_a p_b), (o_a o_b)] = sum G[p_a,p_b,o_a,o_b,i_a,i_b,x_a,x_b] conj(u[i_a,i_b,x_a,x_b]).
struct DisentanglerEnvironment {
  int site_a = 0;
  int site_b = 1;
  Tensor g;  ///< links (p_a, p_b, o_a, o_b, i_a, i_b, x_a, x_b)
};

/// Partial environment from the lowest tensor holding a site up to `top`,
/// one labeled tensor per term. Open links: bra and ket of the parent link of
/// `top`, bra and ket of the site, and the term's horizontal links at the
/// edges of the subtree and around the site.
struct SideEnvironment {
  NodeId top;
  int site = 0;
  std::vector<Labeled> per_term;
};

/// Terms of `op` touching either site, each extended with identities so that
/// both sites lie on its chain.
std::vector<TpoTerm> terms_touching(const TpoOperator& op, int site_a, int site_b);

/// Side environment on the lowest tensor holding `site`.
SideEnvironment precontract_environment(const TtnState& state, EffectiveOperators& eff, int site);
/// Moves a side environment one level up.
SideEnvironment iterate_environment(const TtnState& state, EffectiveOperators& eff, const SideEnvironment& env);

/// Environment of the pair for the operator `op`. Moves the isometry center of
/// `state` to the anchor.
DisentanglerEnvironment build_global_environment(TtnState& state, const TpoOperator& op, int site_a, int site_b);

/// Gamma(u) as a (d^2 x d^2) matrix over ((p_a p_b), (o_a o_b)).
Tensor environment_gamma(const DisentanglerEnvironment& env, const Tensor& u);
/// Re Tr(u Gamma(u)).
double environment_energy(const DisentanglerEnvironment& env, const Tensor& u);

/// argmin over unitaries of Re Tr(u Gamma) for fixed Gamma: u = -V U^dagger.
Tensor svd_update(const Tensor& gamma);

struct DisentanglerOptOptions {
  int max_iter = 10;
  double rel_deviation = 1e-8;
};

struct DisentanglerOptResult {
  int site_a = 0;
  int site_b = 1;
  Tensor u;
  double initial_energy = 0.0;
  double energy = 0.0;
  int iterations = 0;
  std::vector<double> trace;        ///< true energy of each iterate, u_0 first
  std::vector<double> model_trace;  ///< -sum of singular values of each Gamma
  bool converged = false;           ///< relative change fell below the threshold
  bool rejected = false;            ///< no iterate improved on u_0
};

/// Self-consistent SVD iteration. Returns the lowest-energy iterate seen,
/// which may be the starting gate.
DisentanglerOptResult optimize_disentangler(const DisentanglerEnvironment& env, const Tensor& u0,
                                            const DisentanglerOptOptions& options = {});

struct LayerOptReport {
  double energy_before = 0.0;  ///< energy of the original operator with the old layer
  double energy_after = 0.0;
  std::vector<DisentanglerOptResult> per_gate;
};

/// Optimizes every gate of the layer (ascending site_a) against the TTN state
/// for operator `op`. Environments use the original operator's terms.
LayerOptReport optimize_layer(TtnState& state, const TpoOperator& op, DisentanglerLayer& layer,
                              const DisentanglerOptOptions& options = {});

}  // namespace attn
