#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ocifuse/linalg.hpp"
#include "ocifuse/problem.hpp"

namespace ocifuse {

/// Largest number of weights the grid oracle accepts.
inline constexpr std::size_t kMaxOracleWeights = 4;

/// 1e-3 for M <= 2, 0.02 for M = 3, 0.05 for M = 4.
double default_grid_step(std::size_t num_weights);

/// All lattice points of the M-simplex with spacing `step`. The last
/// coordinate absorbs rounding so every point sums to exactly 1. Throws
/// std::invalid_argument unless step is in (0, 1] and 1/step is an integer
/// within 1e-12.
std::vector<Vector> grid_simplex(std::size_t num_weights, double step);

struct OracleResult {
  Vector omega;
  double objective = 0.0;
  SymMatrix bound;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;  // grid points where B(omega) is undefined
};

/// Exhaustive search of criterion(B(omega)) over grid_simplex. Throws
/// std::invalid_argument for more than kMaxOracleWeights bounds and
/// std::domain_error if every grid point is singular.
OracleResult oracle_solve(const OciProblem& p, double step);

struct ClassicResult {
  double omega = 0.0;  // weight on the first estimate
  Matrix gain;         // [K_1, K_2]
  SymMatrix bound;
  double objective = 0.0;
};

/// Scalar-weight CI of two full-state estimates:
/// B(w) = (w X1^-1 + (1 - w) X2^-1)^-1, K = B [w X1^-1, (1 - w) X2^-1].
ClassicResult classic_ci_two(const SymMatrix& x1, const SymMatrix& x2, Criterion criterion);

/// Scalar-weight split CI of two full-state estimates with unknown-correlation
/// parts u1, u2 and independent parts s1, s2:
/// P_i(w_i)^-1 = w_i (u_i + w_i s_i)^-1, B = (P_1^-1 + P_2^-1)^-1,
/// K = B [P_1^-1, P_2^-1].
ClassicResult classic_sci_two(const SymMatrix& u1, const SymMatrix& u2, const SymMatrix& s1,
                              const SymMatrix& s2, Criterion criterion);

struct ConsistencyReport {
  double worst_margin = 0.0;  // min over samples of lambda_min(B - K (R + C P C^T) K^T)
  std::size_t samples = 0;
  bool pass = false;
};

/// Margin threshold used by consistency_audit.
inline constexpr double kConsistencyTol = 1e-6;

ConsistencyReport consistency_audit(const FusionResult& result, const OciProblem& p,
                                    std::size_t samples = 200, std::uint64_t seed = 42);

}  // namespace ocifuse
