#pragma once

#include <string>

#include "ocifuse/conic_program.hpp"
#include "ocifuse/linalg.hpp"
#include "ocifuse/problem.hpp"

namespace ocifuse {

/// Which rank condition decides feasibility, and its value.
struct FeasibilityReport {
  std::string condition;  // e.g. "rank(H)" or the OCI matrix expression
  Index rank = 0;
  Index required = 0;
  bool feasible = false;

  /// "feasible (<condition>: r/n)" or "infeasible (rank r < n)".
  std::string verdict() const;
};

/// R PD: H^T R^-1 (R - C (W^T W + C^T R^-1 C)^+ C^T) R^-1 H has rank n.
FeasibilityReport feasibility_pd(const OciProblem& p);
/// R = 0: H^T C^-T W^T W C^-1 H has rank n.
FeasibilityReport feasibility_zero(const OciProblem& p);
/// Dispatches on the noise regime. Throws InvalidProblemError.
FeasibilityReport feasibility(const OciProblem& p);
/// CI and SCI: the stacked H has full column rank.
FeasibilityReport feasibility(const CiProblem& p);
FeasibilityReport feasibility(const SciProblem& p);

inline bool check_feasibility_pd(const OciProblem& p) { return feasibility_pd(p).feasible; }
inline bool check_feasibility_zero(const OciProblem& p) { return feasibility_zero(p).feasible; }

struct GainAndBound {
  Matrix gain;
  SymMatrix bound;
};

/// Closed-form gain and bound when the family term sum_b w_b Y_b is replaced
/// by a fixed PSD matrix `y` (m x m):
///   R = 0:  B = (H^T C^-T y C^-1 H)^-1,  K = B H^T C^-T y C^-1
///   R PD:   M = R^-1 - R^-1 C (y + C^T R^-1 C)^+ C^T R^-1,
///           B = (H^T M H)^-1,  K = B H^T M
/// Throws std::domain_error when the information matrix is singular.
GainAndBound bound_for_fixed_y(const OciProblem& p, const SymMatrix& y);

/// bound_for_fixed_y at y = sum_b omega_b Y_b.
GainAndBound bound_for_fixed_omega(const OciProblem& p, const Vector& omega);

FusionResult solve_oci_pd(const OciProblem& p, const SolverOptions& options = {},
                          const SdpBackend& backend = default_backend());
FusionResult solve_oci_zero(const OciProblem& p, const SolverOptions& options = {},
                            const SdpBackend& backend = default_backend());
/// Dispatches on the noise regime.
FusionResult solve_oci(const OciProblem& p, const SolverOptions& options = {},
                       const SdpBackend& backend = default_backend());
FusionResult solve_ci(const CiProblem& p, const SolverOptions& options = {},
                      const SdpBackend& backend = default_backend());
/// Populates FusionResult::split with B1 = B - K X2 K^T and B2 = K X2 K^T.
FusionResult solve_sci(const SciProblem& p, const SolverOptions& options = {},
                       const SdpBackend& backend = default_backend());

/// Runs only the fusion SDP, on a copy of the problem whose bounds (and R)
/// are divided by their largest eigenvalue; the optimal weights are invariant
/// under that scaling. Exposes the backend status for feasibility checks.
/// Throws InvalidProblemError.
SolveOutcome solve_sdp(const OciProblem& p, const SolverOptions& options = {},
                       const SdpBackend& backend = default_backend());
SolveOutcome solve_sdp(const CiProblem& p, const SolverOptions& options = {},
                       const SdpBackend& backend = default_backend());

/// x = K z. Throws std::invalid_argument on dimension mismatch.
Vector fuse_estimates(const Matrix& gain, const Vector& z);

}  // namespace ocifuse
