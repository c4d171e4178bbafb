#include "ocifuse/fusion.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "ocifuse/errors.hpp"
#include "ocifuse/kahan.hpp"
#include "ocifuse/programs.hpp"

namespace ocifuse {

namespace {

Matrix stacked_selectors(const OciProblem& p) {
  Index rows = 0;
  for (const auto& b : p.bounds) rows += b.selector.rows();
  Matrix w(rows, p.uncertain_dim());
  Index r = 0;
  for (const auto& b : p.bounds) {
    w.middleRows(r, b.selector.rows()) = b.selector;
    r += b.selector.rows();
  }
  return w;
}

void require_valid(const OciProblem& p) {
  if (auto v = validate_oci(p); !v.empty()) throw InvalidProblemError(std::move(v));
}

FeasibilityReport rank_report(std::string condition, const Matrix& m, Index required) {
  FeasibilityReport r;
  r.condition = std::move(condition);
  r.rank = rank(m);
  r.required = required;
  r.feasible = r.rank == required;
  return r;
}

/// Returns (K, B) from an information-form gain K = (H^T M H)^-1 H^T M.
GainAndBound from_weighting(const Matrix& h, const SymMatrix& weighting) {
  const SymMatrix info = congruence_t(h, weighting);
  Eigen::LLT<Matrix> llt(info.matrix());
  if (llt.info() != Eigen::Success || !is_pd(info, 1e-14)) {
    throw std::domain_error("fused information matrix is singular");
  }
  GainAndBound out;
  out.bound = symmetrize(llt.solve(Matrix::Identity(info.dim(), info.dim())));
  out.gain = llt.solve(h.transpose() * weighting.matrix());
  return out;
}

/// R^-1 - R^-1 C (y + C^T R^-1 C)^+ C^T R^-1
SymMatrix pd_weighting(const OciProblem& p, const SymMatrix& y) {
  const SymMatrix r_inv = inverse_pd(p.noise);
  const Matrix r_inv_c = r_inv.matrix() * p.coupling;
  const SymMatrix inner = pinv(y + congruence_t(p.coupling, r_inv));
  return r_inv - congruence(r_inv_c, inner);
}

SolverDiagnostics diagnostics_from(const SolveOutcome& o, const SdpBackend& backend) {
  SolverDiagnostics d;
  d.backend = std::string(backend.name());
  d.status = std::string(to_string(o.status));
  d.iterations = o.iterations;
  d.sdp_objective = o.objective;
  d.duality_gap = o.duality_gap;
  d.max_psd_violation = o.max_psd_violation;
  d.max_equality_violation = o.max_equality_violation;
  return d;
}

double largest_eigenvalue(const std::vector<BoundSpec>& bounds, const SymMatrix& noise) {
  double scale = 0.0;
  for (const auto& b : bounds) scale = std::max(scale, spectral_norm(b.bound));
  if (!noise.is_exactly_zero()) scale = std::max(scale, spectral_norm(noise));
  return scale > 0.0 ? scale : 1.0;
}

/// Divides the bounds and the noise by their largest eigenvalue. The optimal
/// weights and the gain are invariant under this common scaling.
OciProblem normalized(const OciProblem& p) {
  OciProblem q = p;
  const double inv = 1.0 / largest_eigenvalue(p.bounds, p.noise);
  for (auto& b : q.bounds) b.bound *= inv;
  q.noise *= inv;
  return q;
}

CiProblem normalized(const CiProblem& p) {
  double scale = 0.0;
  for (const auto& e : p.estimates) scale = std::max(scale, spectral_norm(e.bound));
  CiProblem q = p;
  for (auto& e : q.estimates) e.bound *= 1.0 / scale;
  return q;
}

struct SdpRun {
  SolveOutcome outcome;
  std::vector<ScalarVar> weights;
};

SdpRun run_sdp(const FusionProgram& fp, const SolverOptions& options, const SdpBackend& backend) {
  return {backend.solve(fp.program, options), fp.weights};
}

SdpRun run_sdp(const OciProblem& p, const SolverOptions& options, const SdpBackend& backend) {
  const OciProblem q = normalized(p);
  const KahanTerms k = build_kahan_terms(q.bounds, q.uncertain_dim());
  return run_sdp(noise_regime(q.noise) == NoiseRegime::kZero ? build_oci_zero_program(q, k)
                                                             : build_oci_pd_program(q, k),
                 options, backend);
}

SdpRun run_sdp(const CiProblem& p, const SolverOptions& options, const SdpBackend& backend) {
  return run_sdp(build_ci_program(normalized(p)), options, backend);
}

/// Clamped, renormalized simplex weights from an optimal run.
Vector optimal_weights(const SdpRun& run, const FeasibilityReport& feas,
                       const SolverOptions& options, const SdpBackend& backend,
                       SolverDiagnostics& diag) {
  const SolveOutcome& outcome = run.outcome;
  diag = diagnostics_from(outcome, backend);
  switch (outcome.status) {
    case SolveStatus::kOptimal:
      break;
    case SolveStatus::kInfeasible:
      throw SolverFailureError("backend reported infeasibility although " + feas.verdict());
    case SolveStatus::kNumericalTrouble:
      throw SolverFailureError("backend failed: " + outcome.message);
  }
  Vector omega(static_cast<Index>(run.weights.size()));
  for (std::size_t b = 0; b < run.weights.size(); ++b) {
    omega(static_cast<Index>(b)) = outcome.value(run.weights[b]);
  }
  try {
    return normalize_simplex(omega, std::max(1e-9, options.feas_tol));
  } catch (const std::invalid_argument& e) {
    throw SolverFailureError(std::string("backend returned off-simplex weights: ") + e.what());
  }
}

void throw_if_infeasible(const FeasibilityReport& feas, const char* detail) {
  if (!feas.feasible) {
    throw InfeasibleProblemError(std::string(detail) + ": " + feas.verdict());
  }
}

FusionResult finish(GainAndBound gb, Vector omega, Criterion criterion, SolverDiagnostics diag) {
  FusionResult r;
  r.gain = std::move(gb.gain);
  r.bound = std::move(gb.bound);
  r.omega = std::move(omega);
  r.diagnostics = std::move(diag);
  try {
    r.objective = evaluate_criterion(criterion, r.bound);
  } catch (const std::domain_error&) {
    throw SolverFailureError("fused bound is singular; criterion is undefined");
  }
  return r;
}

template <typename F>
GainAndBound recover(F&& f) {
  try {
    return f();
  } catch (const std::domain_error& e) {
    throw SolverFailureError(std::string("gain recovery failed at the optimal weights: ") +
                             e.what());
  }
}

}  // namespace

std::string FeasibilityReport::verdict() const {
  if (feasible) {
    return "feasible (" + condition + ": " + std::to_string(rank) + "/" + std::to_string(required) +
           ")";
  }
  return "infeasible (rank " + std::to_string(rank) + " < " + std::to_string(required) + ")";
}

FeasibilityReport feasibility_pd(const OciProblem& p) {
  const SymMatrix r_inv = inverse_pd(p.noise);
  const Matrix w = stacked_selectors(p);
  const SymMatrix inner = pinv(symmetrize(w.transpose() * w) + congruence_t(p.coupling, r_inv));
  const SymMatrix middle = p.noise - congruence(p.coupling, inner);
  const Matrix r_inv_h = r_inv.matrix() * p.h;
  return rank_report("rank(H^T R^-1 (R - C (W^T W + C^T R^-1 C)^+ C^T) R^-1 H)",
                     congruence_t(r_inv_h, middle).matrix(), p.state_dim());
}

FeasibilityReport feasibility_zero(const OciProblem& p) {
  const Matrix w = stacked_selectors(p);
  const Matrix c_inv_h = p.coupling.fullPivLu().solve(p.h);
  const Matrix w_c_inv_h = w * c_inv_h;
  return rank_report("rank(H^T C^-T W^T W C^-1 H)", w_c_inv_h.transpose() * w_c_inv_h,
                     p.state_dim());
}

FeasibilityReport feasibility(const OciProblem& p) {
  require_valid(p);
  return noise_regime(p.noise) == NoiseRegime::kZero ? feasibility_zero(p) : feasibility_pd(p);
}

FeasibilityReport feasibility(const CiProblem& p) {
  if (auto v = validate_ci(p); !v.empty()) throw InvalidProblemError(std::move(v));
  const Matrix h = stacked_h(p.estimates);
  return rank_report("H full column rank", h, h.cols());
}

FeasibilityReport feasibility(const SciProblem& p) {
  if (auto v = validate_sci(p); !v.empty()) throw InvalidProblemError(std::move(v));
  const Matrix h = stacked_h(p.estimates);
  return rank_report("H full column rank", h, h.cols());
}

GainAndBound bound_for_fixed_y(const OciProblem& p, const SymMatrix& y) {
  if (y.dim() != p.uncertain_dim()) {
    throw std::invalid_argument("bound_for_fixed_y: y must be " +
                                std::to_string(p.uncertain_dim()) + "x" +
                                std::to_string(p.uncertain_dim()));
  }
  switch (noise_regime(p.noise)) {
    case NoiseRegime::kZero: {
      const auto lu = p.coupling.fullPivLu();
      if (!lu.isInvertible()) throw std::invalid_argument("bound_for_fixed_y: C is singular");
      const Matrix c_inv_h = lu.solve(p.h);
      // K = (H' C^-T y C^-1 H)^-1 H' C^-T y C^-1, i.e. the weighting C^-T y C^-1.
      const Matrix c_inv = lu.inverse();
      return from_weighting(p.h, congruence_t(c_inv, y));
    }
    case NoiseRegime::kPositiveDefinite:
      return from_weighting(p.h, pd_weighting(p, y));
    case NoiseRegime::kUnsupported:
      break;
  }
  throw std::invalid_argument("bound_for_fixed_y: R must be PD or exactly zero");
}

GainAndBound bound_for_fixed_omega(const OciProblem& p, const Vector& omega) {
  const KahanTerms k = build_kahan_terms(p.bounds, p.uncertain_dim());
  return bound_for_fixed_y(p, combined_term(k, omega));
}

FusionResult solve_oci_pd(const OciProblem& p, const SolverOptions& options,
                          const SdpBackend& backend) {
  require_valid(p);
  if (noise_regime(p.noise) != NoiseRegime::kPositiveDefinite) {
    throw InvalidProblemError({"solve_oci_pd requires R PD"});
  }
  const FeasibilityReport feas = feasibility_pd(p);
  throw_if_infeasible(feas, "OCI problem is infeasible");

  SolverDiagnostics diag;
  Vector omega = optimal_weights(run_sdp(p, options, backend), feas, options, backend, diag);
  GainAndBound gb = recover([&] { return bound_for_fixed_omega(p, omega); });
  return finish(std::move(gb), std::move(omega), p.criterion, std::move(diag));
}

FusionResult solve_oci_zero(const OciProblem& p, const SolverOptions& options,
                            const SdpBackend& backend) {
  require_valid(p);
  if (noise_regime(p.noise) != NoiseRegime::kZero) {
    throw InvalidProblemError({"solve_oci_zero requires R = 0"});
  }
  const FeasibilityReport feas = feasibility_zero(p);
  throw_if_infeasible(feas, "OCI problem is infeasible");

  SolverDiagnostics diag;
  Vector omega = optimal_weights(run_sdp(p, options, backend), feas, options, backend, diag);
  GainAndBound gb = recover([&] { return bound_for_fixed_omega(p, omega); });
  return finish(std::move(gb), std::move(omega), p.criterion, std::move(diag));
}

FusionResult solve_oci(const OciProblem& p, const SolverOptions& options,
                       const SdpBackend& backend) {
  require_valid(p);
  return noise_regime(p.noise) == NoiseRegime::kZero ? solve_oci_zero(p, options, backend)
                                                     : solve_oci_pd(p, options, backend);
}

FusionResult solve_ci(const CiProblem& p, const SolverOptions& options,
                      const SdpBackend& backend) {
  const FeasibilityReport feas = feasibility(p);
  throw_if_infeasible(feas, "H is not full column rank");

  SolverDiagnostics diag;
  Vector omega = optimal_weights(run_sdp(p, options, backend), feas, options, backend, diag);

  GainAndBound gb = recover([&] {
    const Index n = p.estimates.front().h.cols();
    std::vector<Matrix> weighted;  // omega_i H_i^T X_i^-1
    SymMatrix info = SymMatrix::zero(n);
    Index o = 0;
    for (std::size_t i = 0; i < p.estimates.size(); ++i) {
      const auto& e = p.estimates[i];
      const SymMatrix x_inv = inverse_pd(e.bound);
      weighted.push_back(omega(static_cast<Index>(i)) * e.h.transpose() * x_inv.matrix());
      info += omega(static_cast<Index>(i)) * congruence_t(e.h, x_inv);
      o += e.h.rows();
    }
    Eigen::LLT<Matrix> llt(info.matrix());
    if (llt.info() != Eigen::Success || !is_pd(info, 1e-14)) {
      throw std::domain_error("weighted information sum is singular");
    }
    GainAndBound out;
    out.bound = symmetrize(llt.solve(Matrix::Identity(n, n)));
    out.gain.resize(n, o);
    Index col = 0;
    for (const auto& wblk : weighted) {
      out.gain.middleCols(col, wblk.cols()) = llt.solve(wblk);
      col += wblk.cols();
    }
    return out;
  });
  return finish(std::move(gb), std::move(omega), p.criterion, std::move(diag));
}

FusionResult solve_sci(const SciProblem& p, const SolverOptions& options,
                       const SdpBackend& backend) {
  const FeasibilityReport feas = feasibility(p);
  throw_if_infeasible(feas, "H is not full column rank");

  const OciProblem oci = sci_to_oci(p);
  const KahanTerms k = build_kahan_terms(oci.bounds, oci.uncertain_dim());
  SolverDiagnostics diag;
  Vector omega = optimal_weights(run_sdp(oci, options, backend), feas, options, backend, diag);

  GainAndBound gb = recover([&] {
    // X2^-1 (X2 - (Y* + X2^-1)^-1) X2^-1 with a regular inverse: Y* + X2^-1 is PD.
    const SymMatrix x2_inv = inverse_pd(p.known);
    const SymMatrix y_star = combined_term(k, omega);
    const SymMatrix middle = p.known - inverse_pd(y_star + x2_inv);
    return from_weighting(oci.h, congruence(x2_inv.matrix(), middle));
  });
  FusionResult r = finish(std::move(gb), std::move(omega), p.criterion, std::move(diag));
  SplitBound split;
  split.known_part = congruence(r.gain, p.known);
  split.unknown_part = r.bound - split.known_part;
  r.split = std::move(split);
  return r;
}

SolveOutcome solve_sdp(const OciProblem& p, const SolverOptions& options,
                       const SdpBackend& backend) {
  require_valid(p);
  return run_sdp(p, options, backend).outcome;
}

SolveOutcome solve_sdp(const CiProblem& p, const SolverOptions& options,
                       const SdpBackend& backend) {
  if (auto v = validate_ci(p); !v.empty()) throw InvalidProblemError(std::move(v));
  return run_sdp(p, options, backend).outcome;
}

Vector fuse_estimates(const Matrix& gain, const Vector& z) {
  if (gain.cols() != z.size()) {
    throw std::invalid_argument("fuse_estimates: gain has " + std::to_string(gain.cols()) +
                                " columns but z has " + std::to_string(z.size()) + " entries");
  }
  return gain * z;
}

}  // namespace ocifuse
