#pragma once

#include <optional>
#include <vector>

#include "ocifuse/conic_program.hpp"
#include "ocifuse/kahan.hpp"
#include "ocifuse/problem.hpp"

namespace ocifuse {

/// A fusion SDP together with handles to its decision variables.
struct FusionProgram {
  ConicProgram program;
  MatrixVar bound;                 // B
  std::optional<MatrixVar> aux;    // U, present when R is PD
  std::vector<ScalarVar> weights;  // omega on the simplex
};

/// R PD:
///   [B, I; I, H^T R^-1 H - U] >= 0
///   [U, H^T R^-1 C; (.)^T, sum_b w_b Y_b + C^T R^-1 C] >= 0
/// objective trace(B) or -log det(H^T R^-1 H - U).
/// Throws std::invalid_argument if R is not PD.
FusionProgram build_oci_pd_program(const OciProblem& p, const KahanTerms& k);

/// R = 0, C invertible:
///   [B, I; I, H^T C^-T (sum_b w_b Y_b) C^-1 H] >= 0
/// objective trace(B) or -log det of the lower-right block.
/// Throws std::invalid_argument if C is not square and invertible.
FusionProgram build_oci_zero_program(const OciProblem& p, const KahanTerms& k);

/// Covariance intersection directly on the estimates:
///   [B, I; I, sum_i w_i H_i^T X_i^-1 H_i] >= 0
FusionProgram build_ci_program(const CiProblem& p);

}  // namespace ocifuse
