#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ocifuse/conic_program.hpp"
#include "ocifuse/problem.hpp"
#include "problem_document.hpp"

namespace ocifuse::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitInputError = 1,
  kExitInfeasible = 2,
  kExitSolverFailure = 3,
  kExitVerifyFailed = 4,
};

/// Dispatches to the solver matching doc.kind.
FusionResult solve_document(const ProblemDocument& doc, const SolverOptions& options);

/// K, B, omega, objective, diagnostics; B1/B2 for SCI; fused x when the
/// document carries measurements.
Json result_to_json(const ProblemDocument& doc, const FusionResult& result);

struct VerifyOptions {
  std::optional<double> grid_step;  // default_grid_step(M) when unset; 0 disables
  std::size_t samples = 200;
  std::uint64_t seed = 42;
};

/// Objective agreement tolerance between the SDP and the default grid,
/// relative to max(1, |objective|).
double oracle_tolerance(std::size_t num_weights);

struct VerifyReport {
  Json json;
  bool pass = false;
  std::vector<std::string> warnings;
};

/// Grid oracle (skipped with a warning when M exceeds the grid limit),
/// consistency audit and unbiasedness check of a solved document.
VerifyReport verify_document(const ProblemDocument& doc, const FusionResult& result,
                             const VerifyOptions& options);

/// Entry point of the `ocifuse` tool; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
            std::ostream& err);

}  // namespace ocifuse::cli
