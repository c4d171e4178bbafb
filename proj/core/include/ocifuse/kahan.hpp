#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ocifuse/linalg.hpp"
#include "ocifuse/problem.hpp"

namespace ocifuse {

/// Y_b = W_b^T X_b^{-1} W_b for every bound, each m x m.
struct KahanTerms {
  std::vector<SymMatrix> terms;
  Index dim = 0;

  std::size_t size() const { return terms.size(); }
};

/// Throws std::invalid_argument if some X_b is not PD or W_b has the wrong
/// column count.
KahanTerms build_kahan_terms(std::span<const BoundSpec> bounds, Index m);

/// True iff omega >= -tol elementwise and |sum - 1| <= tol.
bool on_simplex(const Vector& omega, double tol = 1e-9);

/// sum_b omega_b Y_b. Throws std::invalid_argument when omega has the wrong
/// length or lies off the simplex by more than `tol`.
SymMatrix combined_term(const KahanTerms& k, const Vector& omega, double tol = 1e-9);

/// P is PD and W_b P W_b^T <= X_b (at tolerance) for every bound.
bool is_admissible(const SymMatrix& p, std::span<const BoundSpec> bounds, double tol = kPsdTol);

/// P^{-1} - sum_b omega_b Y_b is PSD at tolerance. Throws std::domain_error
/// if P is not PD.
bool in_kahan_family(const SymMatrix& p, const KahanTerms& k, const Vector& omega,
                     double tol = kPsdTol);

/// Deterministic sampler over the admissible set. Mixes low-rank Wishart
/// draws (strong cross-correlation) scaled into the interior with draws scaled
/// to within 1% of the tightest bound. Every returned matrix passes
/// is_admissible.
std::vector<SymMatrix> sample_admissible(std::span<const BoundSpec> bounds, Index m,
                                         std::uint64_t seed, std::size_t count);

}  // namespace ocifuse
