#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ocifuse/linalg.hpp"

namespace ocifuse {

/// Scalar optimality criterion J(B).
enum class Criterion { kTrace, kLogDet };

std::string_view to_string(Criterion c);
/// Parses "trace" / "logdet". Throws std::invalid_argument otherwise.
Criterion parse_criterion(std::string_view s);

/// J(B): trace(B), or log det(B) (throws std::domain_error unless B is PD).
double evaluate_criterion(Criterion c, const SymMatrix& b);

/// One known bound W * P * W^T <= X on the unknown matrix P.
struct BoundSpec {
  Matrix selector;  // W, o_b x m
  SymMatrix bound;  // X, o_b x o_b, PD
};

/// E[e e^T] = R + C P C^T with P constrained by `bounds`.
struct OciProblem {
  Matrix h;         // o x n
  SymMatrix noise;  // R, o x o; PD or exactly zero
  Matrix coupling;  // C, o x m
  std::vector<BoundSpec> bounds;
  Criterion criterion = Criterion::kTrace;

  Index state_dim() const { return h.cols(); }
  Index measurement_dim() const { return h.rows(); }
  Index uncertain_dim() const { return coupling.cols(); }
};

enum class NoiseRegime { kPositiveDefinite, kZero, kUnsupported };

/// Classifies R: PD (at kPsdTol), exactly zero, or anything else.
NoiseRegime noise_regime(const SymMatrix& r);

/// A partial estimate z_i = H_i x + e_i with a bound X_i on E[e_i e_i^T].
struct Estimate {
  Matrix h;
  SymMatrix bound;
};

struct CiProblem {
  std::vector<Estimate> estimates;
  Criterion criterion = Criterion::kTrace;
};

/// Split problem: each estimate's `bound` is X1_i (unknown cross-correlation
/// part); `known` is the joint second moment X2 of the correlated-known part.
struct SciProblem {
  std::vector<Estimate> estimates;
  SymMatrix known;
  Criterion criterion = Criterion::kTrace;
};

struct SolverDiagnostics {
  std::string backend;
  std::string status;
  int iterations = 0;
  double sdp_objective = 0.0;
  double duality_gap = 0.0;
  double max_psd_violation = 0.0;
  double max_equality_violation = 0.0;
};

struct SplitBound {
  SymMatrix unknown_part;  // B1
  SymMatrix known_part;    // B2 = K X2 K^T
};

struct FusionResult {
  Matrix gain;       // K, n x o
  SymMatrix bound;   // B, n x n
  Vector omega;      // simplex weights
  double objective = 0.0;
  SolverDiagnostics diagnostics;
  std::optional<SplitBound> split;
};

/// Every violated precondition, human readable. Empty means well-formed.
std::vector<std::string> validate_oci(const OciProblem& p);
std::vector<std::string> validate_ci(const CiProblem& p);
std::vector<std::string> validate_sci(const SciProblem& p);

/// Vertical stack [H_1; ...; H_N].
Matrix stacked_h(const std::vector<Estimate>& estimates);

/// Row selectors W_i = [0 ... I_{o_i} ... 0] for the given block sizes.
std::vector<Matrix> block_selectors(const std::vector<Index>& sizes);

/// CI as OCI: R = 0, C = I, bounds (W_i, X_i). Throws InvalidProblemError.
OciProblem ci_to_oci(const CiProblem& p);

/// SCI as OCI: R = X2, C = I, bounds (W_i, X1_i). Throws InvalidProblemError.
OciProblem sci_to_oci(const SciProblem& p);

/// Clamps entries >= -tol to zero and renormalizes to sum 1. Throws
/// std::invalid_argument when an entry is below -tol or the sum vanishes.
Vector normalize_simplex(const Vector& omega, double tol = 1e-9);

}  // namespace ocifuse
