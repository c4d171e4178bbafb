#pragma once

#include "ocifuse/conic_program.hpp"

namespace ocifuse {

/// Dense primal log-barrier path-following backend for small programs.
///
/// Phase I minimizes s subject to F_j(x) + s I >= 0 to find a strictly
/// feasible point or certify infeasibility (lower bound on s above zero).
/// Phase II follows the central path of t * f0(x) - sum_j log det F_j(x)
/// with equality-constrained Newton steps until the barrier duality gap
/// theta / t falls below gap_tol. All coordinates carry a box barrier at
/// the options' variable bound, which keeps the Newton systems
/// nonsingular when a variable does not enter the objective.
class BarrierBackend final : public SdpBackend {
 public:
  std::string_view name() const override { return "barrier"; }
  SolveOutcome solve(const ConicProgram& program, const SolverOptions& options) const override;
};

}  // namespace ocifuse
