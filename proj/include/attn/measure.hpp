#pragma once

#include "attn/disentangler.hpp"
#include "attn/tpo.hpp"
#include "attn/ttn.hpp"

namespace attn {

/// <psi| o_site |psi> / <psi|psi> for a (d x d) operator [out, in]. Moves the
/// isometry center to the lowest tensor holding the site.
Complex measure_local(TtnState& state, const Tensor& op, int site);

/// <psi| term |psi> / <psi|psi>, contracting only the subtree below the
/// lowest common ancestor of the term's sites, which becomes the center.
Complex measure_tpo_term(TtnState& state, const TpoTerm& term);

/// C[i][j] = <o^a_i o^b_j> on the state D^dagger |psi_TTN>. On the diagonal
/// the product o^a o^b acts on one site.
Eigen::MatrixXcd correlation_matrix(TtnState& state, const DisentanglerLayer& layer, const Tensor& op_a,
                                    const Tensor& op_b);

}  // namespace attn
