#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "ocifuse/errors.hpp"
#include "ocifuse/fusion.hpp"
#include "ocifuse/oracle.hpp"

namespace ocifuse::cli {

namespace {

constexpr double kUnbiasednessTol = 1e-7;
constexpr double kFamilyTol = 1e-5;

struct CommonFlags {
  std::string input;
  std::optional<std::string> criterion;
  double feas_tol = SolverOptions{}.feas_tol;
  double gap_tol = SolverOptions{}.gap_tol;
  std::optional<std::string> output;
  bool quiet = false;
};

void add_solver_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--criterion", f.criterion, "Override the document criterion")
      ->check(CLI::IsMember({"trace", "logdet"}));
  cmd->add_option("--feas-tol", f.feas_tol, "PSD feasibility tolerance")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--gap-tol", f.gap_tol, "Relative duality gap tolerance")
      ->check(CLI::PositiveNumber);
}

void add_io_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("input", f.input, "Problem document path, or - for standard input")->required();
  cmd->add_option("--output", f.output, "Write the result here instead of standard output");
  cmd->add_flag("--quiet", f.quiet, "Suppress warnings and summaries on standard error");
}

SolverOptions solver_options(const CommonFlags& f) {
  SolverOptions o;
  o.feas_tol = f.feas_tol;
  o.gap_tol = std::min(f.gap_tol, o.acceptable_gap_tol);
  return o;
}

ProblemDocument load(const CommonFlags& f, std::istream& in) {
  if (f.input == "-") return read_document(in);
  std::ifstream file(f.input);
  if (!file) throw DocumentError({"cannot open input file '" + f.input + "'"});
  return read_document(file);
}

ProblemDocument load_with_override(const CommonFlags& f, std::istream& in) {
  auto doc = load(f, in);
  if (f.criterion) doc.set_criterion(parse_criterion(*f.criterion));
  return doc;
}

/// Writes to --output when given, else to `out`. Returns false on I/O error.
bool emit(const CommonFlags& f, const std::string& text, std::ostream& out, std::ostream& err) {
  if (!f.output) {
    out << text;
    return static_cast<bool>(out);
  }
  std::ofstream file(*f.output);
  file << text;
  if (!file) {
    err << "error: cannot write '" << *f.output << "'\n";
    return false;
  }
  return true;
}

int report_input_error(const DocumentError& e, std::ostream& err) {
  err << "error: invalid problem document\n";
  for (const auto& v : e.violations()) err << "  - " << v << '\n';
  return kExitInputError;
}

/// Runs `body` mapping library errors onto exit codes.
template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const DocumentError& e) {
    return report_input_error(e, err);
  } catch (const InvalidProblemError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const InfeasibleProblemError& e) {
    err << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const SolverFailureError& e) {
    err << "solver failure: " << e.what() << '\n';
    return kExitSolverFailure;
  }
}

Json check_json(const std::string& name, bool pass, double value, double tolerance) {
  return {{"name", name}, {"pass", pass}, {"value", value}, {"tolerance", tolerance}};
}

int cmd_solve(const std::string& kind, const CommonFlags& f, std::istream& in, std::ostream& out,
              std::ostream& err) {
  return guarded(err, [&] {
    const auto doc = load_with_override(f, in);
    if (to_string(doc.kind) != kind) {
      err << "error: document kind is '" << to_string(doc.kind) << "' but 'solve " << kind
          << "' was requested\n";
      return static_cast<int>(kExitInputError);
    }
    const FusionResult result = solve_document(doc, solver_options(f));
    if (!emit(f, result_to_json(doc, result).dump(2) + "\n", out, err)) {
      return static_cast<int>(kExitInputError);
    }
    if (!f.quiet && result.diagnostics.duality_gap > f.gap_tol * std::max(1.0, std::abs(result.diagnostics.sdp_objective))) {
      err << "warning: solver stopped at duality gap " << result.diagnostics.duality_gap << '\n';
    }
    return static_cast<int>(kExitOk);
  });
}

int cmd_verify(const CommonFlags& f, const VerifyOptions& v, std::istream& in, std::ostream& out,
               std::ostream& err) {
  return guarded(err, [&] {
    if (v.grid_step && *v.grid_step > 0.0) {
      const double divisions = 1.0 / *v.grid_step;
      if (std::abs(std::round(divisions) * *v.grid_step - 1.0) > 1e-12) {
        err << "error: --grid-step must divide 1 evenly\n";
        return static_cast<int>(kExitInputError);
      }
    }
    const auto doc = load_with_override(f, in);
    const FusionResult result = solve_document(doc, solver_options(f));
    const VerifyReport report = verify_document(doc, result, v);
    if (!f.quiet) {
      for (const auto& w : report.warnings) err << "warning: " << w << '\n';
      for (const auto& c : report.json["checks"]) {
        err << (c["pass"].get<bool>() ? "PASS " : "FAIL ") << c["name"].get<std::string>()
            << " value=" << c["value"].dump() << " tolerance=" << c["tolerance"].dump() << '\n';
      }
    }
    if (!emit(f, report.json.dump(2) + "\n", out, err)) return static_cast<int>(kExitInputError);
    return static_cast<int>(report.pass ? kExitOk : kExitVerifyFailed);
  });
}

int cmd_check(const CommonFlags& f, std::istream& in, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto doc = load(f, in);
    FeasibilityReport r;
    switch (doc.kind) {
      case ProblemKind::kCi:
        r = feasibility(std::get<CiProblem>(doc.problem));
        break;
      case ProblemKind::kSci:
        r = feasibility(std::get<SciProblem>(doc.problem));
        break;
      case ProblemKind::kOci:
        r = feasibility(std::get<OciProblem>(doc.problem));
        break;
    }
    std::string text = r.verdict() + "\n";
    if (!r.feasible) text += "condition: " + r.condition + "\n";
    if (!emit(f, text, out, err)) return static_cast<int>(kExitInputError);
    return static_cast<int>(r.feasible ? kExitOk : kExitInfeasible);
  });
}

}  // namespace

FusionResult solve_document(const ProblemDocument& doc, const SolverOptions& options) {
  switch (doc.kind) {
    case ProblemKind::kCi:
      return solve_ci(std::get<CiProblem>(doc.problem), options);
    case ProblemKind::kSci:
      return solve_sci(std::get<SciProblem>(doc.problem), options);
    case ProblemKind::kOci:
      break;
  }
  return solve_oci(std::get<OciProblem>(doc.problem), options);
}

Json result_to_json(const ProblemDocument& doc, const FusionResult& result) {
  Json j;
  j["version"] = std::string(kSchemaVersion);
  j["kind"] = std::string(to_string(doc.kind));
  j["criterion"] = std::string(to_string(doc.criterion()));
  j["status"] = result.diagnostics.status;
  j["objective"] = result.objective;
  j["omega"] = vector_to_json(result.omega);
  j["K"] = matrix_to_json(result.gain);
  j["B"] = matrix_to_json(result.bound.matrix());
  if (result.split) {
    j["B1"] = matrix_to_json(result.split->unknown_part.matrix());
    j["B2"] = matrix_to_json(result.split->known_part.matrix());
  }
  if (doc.z) j["x"] = vector_to_json(fuse_estimates(result.gain, *doc.z));
  const auto& d = result.diagnostics;
  j["diagnostics"] = {{"backend", d.backend},
                      {"status", d.status},
                      {"iterations", d.iterations},
                      {"sdp_objective", d.sdp_objective},
                      {"duality_gap", d.duality_gap},
                      {"max_psd_violation", d.max_psd_violation},
                      {"max_equality_violation", d.max_equality_violation}};
  return j;
}

double oracle_tolerance(std::size_t num_weights) {
  switch (num_weights) {
    case 0:
    case 1:
      return 1e-6;
    case 2:
      return 1e-4;
    case 3:
      return 1e-3;
    default:
      return 5e-3;
  }
}

VerifyReport verify_document(const ProblemDocument& doc, const FusionResult& result,
                             const VerifyOptions& options) {
  VerifyReport report;
  const OciProblem oci = doc.as_oci();
  const std::size_t m = oci.bounds.size();
  const double scale = std::max(1.0, std::abs(result.objective));
  Json& j = report.json;
  j["version"] = std::string(kSchemaVersion);
  j["kind"] = std::string(to_string(doc.kind));
  j["criterion"] = std::string(to_string(doc.criterion()));
  j["objective"] = result.objective;
  j["omega"] = vector_to_json(result.omega);
  j["checks"] = Json::array();
  bool pass = true;

  const double step = options.grid_step.value_or(default_grid_step(m));
  if (step <= 0.0) {
    j["oracle"] = {{"skipped", true}, {"reason", "grid disabled"}};
  } else if (m > kMaxOracleWeights) {
    const std::string reason = "grid check skipped: " + std::to_string(m) +
                               " weights exceed the limit of " + std::to_string(kMaxOracleWeights);
    report.warnings.push_back(reason);
    j["oracle"] = {{"skipped", true}, {"reason", reason}};
  } else {
    try {
      const OracleResult o = oracle_solve(oci, step);
      const double gap = result.objective - o.objective;
      j["oracle"] = {{"skipped", false},
                     {"step", step},
                     {"objective", o.objective},
                     {"omega", vector_to_json(o.omega)},
                     {"evaluated", o.evaluated},
                     {"singular_points", o.skipped}};
      j["objective_gap"] = gap;
      const double agree_tol = oracle_tolerance(m) * scale;
      const double family_tol = kFamilyTol * scale;
      const bool agree = std::abs(gap) <= agree_tol;
      const bool family = gap <= family_tol;
      j["checks"].push_back(check_json("oracle_agreement", agree, std::abs(gap), agree_tol));
      j["checks"].push_back(check_json("family_optimality", family, gap, family_tol));
      pass = pass && agree && family;
    } catch (const std::domain_error& e) {
      j["oracle"] = {{"skipped", false}, {"error", e.what()}};
      j["checks"].push_back(check_json("oracle_agreement", false, 0.0, 0.0));
      pass = false;
    }
  }

  const ConsistencyReport c = consistency_audit(result, oci, options.samples, options.seed);
  j["consistency"] = {{"samples", c.samples}, {"seed", options.seed}, {"worst_margin", c.worst_margin}};
  j["checks"].push_back(check_json("consistency", c.pass, c.worst_margin, -kConsistencyTol));
  pass = pass && c.pass;

  const Matrix h = doc.h();
  const double kh =
      (result.gain * h - Matrix::Identity(h.cols(), h.cols())).cwiseAbs().maxCoeff();
  const bool unbiased = kh <= kUnbiasednessTol;
  j["checks"].push_back(check_json("unbiasedness", unbiased, kh, kUnbiasednessTol));
  pass = pass && unbiased;

  j["pass"] = pass;
  report.pass = pass;
  return report;
}

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Covariance-intersection fusion with family-optimal bounds", "ocifuse"};
  app.require_subcommand(1);

  CommonFlags solve_flags;
  std::string kind;
  auto* solve = app.add_subcommand("solve", "Solve a fusion problem and print K, B and weights");
  solve->add_option("kind", kind, "Problem kind")
      ->required()
      ->check(CLI::IsMember({"ci", "sci", "oci"}));
  add_io_flags(solve, solve_flags);
  add_solver_flags(solve, solve_flags);

  CommonFlags verify_flags;
  VerifyOptions verify_opts;
  double grid_step = -1.0;
  auto* verify = app.add_subcommand("verify", "Solve, then check against brute-force oracles");
  add_io_flags(verify, verify_flags);
  add_solver_flags(verify, verify_flags);
  verify->add_option("--grid-step", grid_step, "Simplex grid spacing (0 disables the grid)")
      ->check(CLI::Range(0.0, 1.0));
  verify->add_option("--samples", verify_opts.samples, "Admissible samples for the audit")
      ->check(CLI::PositiveNumber);
  verify->add_option("--seed", verify_opts.seed, "Sampler seed");

  CommonFlags check_flags;
  auto* check = app.add_subcommand("check", "Report the feasibility rank condition");
  add_io_flags(check, check_flags);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }

  if (grid_step >= 0.0) verify_opts.grid_step = grid_step;
  if (solve->parsed()) return cmd_solve(kind, solve_flags, in, out, err);
  if (verify->parsed()) return cmd_verify(verify_flags, verify_opts, in, out, err);
  return cmd_check(check_flags, in, out, err);
}

}  // namespace ocifuse::cli
