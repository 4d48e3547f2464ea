#pragma once

#include <cstddef>
#include <span>

#include "attn/lanczos.hpp"
#include "attn/tpo.hpp"

namespace attn {

// Full-Hilbert-space utilities used as verification oracles. Basis states are
// row-major over the sites with site 0 the slowest-varying index.

struct DenseGuard {
  std::size_t max_dim = 4096;  ///< largest d^N accepted for a dense matrix
};

/// Sum of Kronecker-embedded term matrices, (d^N x d^N).
Tensor dense_export(const TpoOperator& op, DenseGuard guard = {});

/// Applies the (d^n x d^n) matrix `m` on `sites` (ascending) of a state vector.
Vector apply_on_sites(const Tensor& m, std::span<const int> sites, const Vector& psi, int num_sites,
                      std::size_t local_dim);

Vector apply_term(const TpoTerm& term, const Vector& psi, int num_sites);
Vector apply_operator(const TpoOperator& op, const Vector& psi);
double expectation(const TpoOperator& op, const Vector& psi);

/// Applies a two-site gate with links (out_a, out_b, in_a, in_b), site_a < site_b.
Vector apply_two_site_gate(const Tensor& gate, int site_a, int site_b, const Vector& psi, int num_sites);

struct EdOptions {
  std::size_t max_dim = 1u << 16;    ///< guard on d^N
  std::size_t dense_limit = 1024;    ///< dense eigensolver up to this dimension
  double tol = 1e-11;                ///< residual target above dense_limit
};

struct EdResult {
  double energy = 0.0;
  Vector ground_state;
};

/// Ground state of the operator; dense Hermitian eigensolver for small
/// spaces, matrix-free Lanczos on the full state vector otherwise.
EdResult exact_diagonalize(const TpoOperator& op, EdOptions options = {});

}  // namespace attn
