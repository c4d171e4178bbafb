#include "ocifuse/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

#include "ocifuse/fusion.hpp"
#include "ocifuse/kahan.hpp"

namespace ocifuse {

namespace {

void enumerate(std::size_t slots, long remaining, long total, std::vector<long>& counts,
               std::vector<Vector>& out) {
  if (slots == 1) {
    counts.push_back(remaining);
    Vector w(static_cast<Index>(counts.size()));
    double sum = 0.0;
    for (Index i = 0; i + 1 < w.size(); ++i) {
      w(i) = static_cast<double>(counts[static_cast<std::size_t>(i)]) / static_cast<double>(total);
      sum += w(i);
    }
    w(w.size() - 1) = 1.0 - sum;
    out.push_back(std::move(w));
    counts.pop_back();
    return;
  }
  for (long c = 0; c <= remaining; ++c) {
    counts.push_back(c);
    enumerate(slots - 1, remaining - c, total, counts, out);
    counts.pop_back();
  }
}

/// Minimizes a unimodal f on [0, 1]: coarse grid, then golden section on the
/// bracket around the best grid point.
double minimize_unit_interval(const std::function<double(double)>& f) {
  constexpr int kGrid = 200;
  int best = 0;
  double best_val = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= kGrid; ++k) {
    const double v = f(static_cast<double>(k) / kGrid);
    if (v < best_val) {
      best_val = v;
      best = k;
    }
  }
  double lo = std::max(0.0, static_cast<double>(best - 1) / kGrid);
  double hi = std::min(1.0, static_cast<double>(best + 1) / kGrid);
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = hi - ratio * (hi - lo);
  double b = lo + ratio * (hi - lo);
  double fa = f(a);
  double fb = f(b);
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    if (fa < fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - ratio * (hi - lo);
      fa = f(a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + ratio * (hi - lo);
      fb = f(b);
    }
  }
  double arg = 0.5 * (lo + hi);
  double val = f(arg);
  for (double cand : {static_cast<double>(best) / kGrid, lo, hi}) {
    const double v = f(cand);
    if (v < val) {
      val = v;
      arg = cand;
    }
  }
  return arg;
}

void require_same_dim(const SymMatrix& a, const SymMatrix& b, const char* what) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch");
  }
}

ClassicResult assemble(double omega, const SymMatrix& info1, const SymMatrix& info2,
                       Criterion criterion) {
  ClassicResult r;
  r.omega = omega;
  r.bound = inverse_pd(info1 + info2);
  const Index n = r.bound.dim();
  r.gain.resize(n, 2 * n);
  r.gain.leftCols(n) = r.bound.matrix() * info1.matrix();
  r.gain.rightCols(n) = r.bound.matrix() * info2.matrix();
  r.objective = evaluate_criterion(criterion, r.bound);
  return r;
}

/// w (u + w s)^-1, zero at w = 0.
SymMatrix sci_information(const SymMatrix& u, const SymMatrix& s, double w) {
  if (w <= 0.0) return SymMatrix::zero(u.dim());
  return w * inverse_pd(u + w * s);
}

}  // namespace

double default_grid_step(std::size_t num_weights) {
  if (num_weights <= 2) return 1e-3;
  if (num_weights == 3) return 0.02;
  return 0.05;
}

std::vector<Vector> grid_simplex(std::size_t num_weights, double step) {
  if (num_weights == 0) throw std::invalid_argument("grid_simplex: need at least one weight");
  if (!(step > 0.0) || step > 1.0) {
    throw std::invalid_argument("grid_simplex: step must lie in (0, 1]");
  }
  const long total = std::lround(1.0 / step);
  if (std::abs(static_cast<double>(total) * step - 1.0) > 1e-12) {
    throw std::invalid_argument("grid_simplex: step must divide 1");
  }
  std::vector<Vector> out;
  std::vector<long> counts;
  enumerate(num_weights, total, total, counts, out);
  return out;
}

OracleResult oracle_solve(const OciProblem& p, double step) {
  const std::size_t m = p.bounds.size();
  if (m > kMaxOracleWeights) {
    throw std::invalid_argument("oracle_solve: " + std::to_string(m) +
                                " weights exceed the grid limit of " +
                                std::to_string(kMaxOracleWeights));
  }
  OracleResult best;
  best.objective = std::numeric_limits<double>::infinity();
  for (const Vector& omega : grid_simplex(m, step)) {
    double obj = 0.0;
    GainAndBound gb;
    try {
      gb = bound_for_fixed_omega(p, omega);
      obj = evaluate_criterion(p.criterion, gb.bound);
    } catch (const std::domain_error&) {
      ++best.skipped;
      continue;
    }
    ++best.evaluated;
    if (obj < best.objective) {
      best.objective = obj;
      best.omega = omega;
      best.bound = std::move(gb.bound);
    }
  }
  if (best.evaluated == 0) {
    throw std::domain_error("oracle_solve: B(omega) is singular at every grid point");
  }
  return best;
}

ClassicResult classic_ci_two(const SymMatrix& x1, const SymMatrix& x2, Criterion criterion) {
  require_same_dim(x1, x2, "classic_ci_two");
  const SymMatrix i1 = inverse_pd(x1);
  const SymMatrix i2 = inverse_pd(x2);
  const auto objective = [&](double w) {
    return evaluate_criterion(criterion, inverse_pd(w * i1 + (1.0 - w) * i2));
  };
  const double w = minimize_unit_interval(objective);
  return assemble(w, w * i1, (1.0 - w) * i2, criterion);
}

ClassicResult classic_sci_two(const SymMatrix& u1, const SymMatrix& u2, const SymMatrix& s1,
                              const SymMatrix& s2, Criterion criterion) {
  require_same_dim(u1, u2, "classic_sci_two");
  require_same_dim(u1, s1, "classic_sci_two");
  require_same_dim(u1, s2, "classic_sci_two");
  const auto objective = [&](double w) {
    return evaluate_criterion(criterion, inverse_pd(sci_information(u1, s1, w) +
                                                    sci_information(u2, s2, 1.0 - w)));
  };
  const double w = minimize_unit_interval(objective);
  return assemble(w, sci_information(u1, s1, w), sci_information(u2, s2, 1.0 - w), criterion);
}

ConsistencyReport consistency_audit(const FusionResult& result, const OciProblem& p,
                                    std::size_t samples, std::uint64_t seed) {
  ConsistencyReport report;
  report.worst_margin = std::numeric_limits<double>::infinity();
  const auto draws = sample_admissible(p.bounds, p.uncertain_dim(), seed, samples);
  for (const SymMatrix& cov : draws) {
    const SymMatrix err = p.noise + congruence(p.coupling, cov);
    const SymMatrix gap = result.bound - congruence(result.gain, err);
    report.worst_margin = std::min(report.worst_margin, min_eigenvalue(gap));
  }
  report.samples = draws.size();
  report.pass = report.worst_margin >= -kConsistencyTol;
  return report;
}

}  // namespace ocifuse
