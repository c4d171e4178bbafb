#include "ocifuse/barrier_backend.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

namespace ocifuse {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPathFactor = 20.0;
constexpr double kMinPathFactor = 1.2;
constexpr double kNewtonTol = 1e-10;
// Newton steps allowed inside the quadratic region before rounding noise in
// the decrement is accepted as centered.
constexpr int kMaxQuadraticSteps = 10;
constexpr double kLooseNewtonTol = 1e-3;

struct Block {
  Matrix f0;
  std::vector<std::pair<Index, Matrix>> terms;

  Index dim() const { return f0.rows(); }

  Matrix evaluate(const Vector& x) const {
    Matrix f = f0;
    for (const auto& [k, coeff] : terms) f += x(k) * coeff;
    return f;
  }
};

/// minimize t * (c^T x - log det G(x)) - sum_j log det F_j(x) - box barrier
/// subject to A x = b.
struct BarrierProblem {
  Index n = 0;
  std::vector<Block> blocks;
  std::optional<Block> logdet_objective;
  Vector c;
  Matrix a;
  Vector b;
  Vector box;

  double theta() const {
    double th = 0.0;
    for (const auto& blk : blocks) th += static_cast<double>(blk.dim());
    for (Index k = 0; k < n; ++k) {
      if (std::isfinite(box(k))) th += 2.0;
    }
    return th;
  }

  double objective(const Vector& x) const {
    double f = c.dot(x);
    if (logdet_objective) {
      Eigen::LLT<Matrix> llt(logdet_objective->evaluate(x));
      if (llt.info() != Eigen::Success) return kInf;
      f -= 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    }
    return f;
  }
};

Block to_block(const AffineSymExpr& e) {
  Block blk;
  blk.f0 = e.constant();
  for (const auto& [coord, coeff] : e.coefficients()) {
    blk.terms.emplace_back(static_cast<Index>(coord), coeff);
  }
  return blk;
}

std::optional<double> log_det(const Matrix& f) {
  Eigen::LLT<Matrix> llt(f);
  if (llt.info() != Eigen::Success) return std::nullopt;
  const auto diag = llt.matrixLLT().diagonal();
  if ((diag.array() <= 0.0).any()) return std::nullopt;
  return 2.0 * diag.array().log().sum();
}

/// Barrier-augmented objective; +inf outside the domain.
double merit(const BarrierProblem& p, const Vector& x, double t) {
  double f = t * p.c.dot(x);
  if (p.logdet_objective) {
    const auto ld = log_det(p.logdet_objective->evaluate(x));
    if (!ld) return kInf;
    f -= t * *ld;
  }
  for (const auto& blk : p.blocks) {
    const auto ld = log_det(blk.evaluate(x));
    if (!ld) return kInf;
    f -= *ld;
  }
  for (Index k = 0; k < p.n; ++k) {
    if (!std::isfinite(p.box(k))) continue;
    const double up = p.box(k) - x(k);
    const double lo = p.box(k) + x(k);
    if (up <= 0.0 || lo <= 0.0) return kInf;
    f -= std::log(up) + std::log(lo);
  }
  return f;
}

/// Adds weight * (gradient, Hessian) of -log det F(x) for one block.
bool accumulate_log_det(const Block& blk, const Vector& x, double weight, Vector& g, Matrix& h) {
  Eigen::LLT<Matrix> llt(blk.evaluate(x));
  if (llt.info() != Eigen::Success) return false;
  const Matrix s = llt.solve(Matrix::Identity(blk.dim(), blk.dim()));
  std::vector<Matrix> sf;
  sf.reserve(blk.terms.size());
  for (const auto& [k, coeff] : blk.terms) {
    sf.push_back(s * coeff);
    g(k) -= weight * sf.back().trace();
  }
  for (std::size_t i = 0; i < blk.terms.size(); ++i) {
    const Matrix sft = sf[i].transpose();
    const Index ki = blk.terms[i].first;
    for (std::size_t j = 0; j <= i; ++j) {
      const double v = weight * sf[j].cwiseProduct(sft).sum();
      const Index kj = blk.terms[j].first;
      h(ki, kj) += v;
      if (i != j) h(kj, ki) += v;
    }
  }
  return true;
}

bool derivatives(const BarrierProblem& p, const Vector& x, double t, Vector& g, Matrix& h) {
  g = t * p.c;
  h = Matrix::Zero(p.n, p.n);
  if (p.logdet_objective && !accumulate_log_det(*p.logdet_objective, x, t, g, h)) return false;
  for (const auto& blk : p.blocks) {
    if (!accumulate_log_det(blk, x, 1.0, g, h)) return false;
  }
  for (Index k = 0; k < p.n; ++k) {
    if (!std::isfinite(p.box(k))) continue;
    const double up = p.box(k) - x(k);
    const double lo = p.box(k) + x(k);
    g(k) += 1.0 / up - 1.0 / lo;
    h(k, k) += 1.0 / (up * up) + 1.0 / (lo * lo);
  }
  return true;
}

/// Solves [H A^T; A 0] [dx; nu] = [-g; r] with Jacobi scaling of H: Schur
/// elimination when H factors cleanly, else pivoted LU on the full system.
std::optional<Vector> newton_direction(const Matrix& h, const Vector& g, const Matrix& a,
                                       const Vector& r) {
  const Vector d = h.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  const Matrix hs = d.asDiagonal() * h * d.asDiagonal();
  const Vector gs = d.cwiseProduct(g);
  const Matrix as = a * d.asDiagonal();
  Vector ys;
  Eigen::LLT<Matrix> llt(hs);
  if (llt.info() == Eigen::Success) {
    if (a.rows() == 0) {
      ys = -llt.solve(gs);
    } else {
      const Matrix hi_at = llt.solve(as.transpose());
      const Vector hi_g = llt.solve(gs);
      Eigen::LLT<Matrix> schur(as * hi_at);
      if (schur.info() == Eigen::Success) {
        const Vector nu = schur.solve(-r - as * hi_g);
        ys = -(hi_g + hi_at * nu);
      }
    }
  }
  if (ys.size() == 0 || !ys.allFinite()) {
    const Index n = h.rows();
    const Index m = a.rows();
    Matrix kkt = Matrix::Zero(n + m, n + m);
    kkt.topLeftCorner(n, n) = hs;
    kkt.topRightCorner(n, m) = as.transpose();
    kkt.bottomLeftCorner(m, n) = as;
    Vector rhs(n + m);
    rhs.head(n) = -gs;
    rhs.tail(m) = r;
    ys = kkt.fullPivLu().solve(rhs).head(n);
  }
  if (!ys.allFinite()) return std::nullopt;
  return d.cwiseProduct(ys);
}

enum class CenterResult { kCentered, kStalled, kIterLimit, kSingular };

CenterResult center(const BarrierProblem& p, Vector& x, double t, int& iterations,
                    int max_iterations) {
  Vector g;
  Matrix h;
  int quadratic_steps = 0;
  for (;;) {
    if (iterations >= max_iterations) return CenterResult::kIterLimit;
    if (!derivatives(p, x, t, g, h)) return CenterResult::kSingular;
    const Vector r = p.a.rows() ? Vector(p.b - p.a * x) : Vector();
    const auto dx = newton_direction(h, g, p.a, r);
    if (!dx) return CenterResult::kSingular;
    const double decrement2 = dx->dot(h * *dx);
    const double eq_residual = r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
    if (eq_residual <= 1e-11) {
      if (decrement2 / 2.0 <= kNewtonTol) return CenterResult::kCentered;
      if (quadratic_steps >= kMaxQuadraticSteps && decrement2 / 2.0 <= kLooseNewtonTol) {
        return CenterResult::kCentered;
      }
    }

    // Inside the quadratic region of a self-concordant barrier a full step is
    // safe, so only the domain is checked; otherwise backtrack on Armijo.
    const bool quadratic_region = decrement2 < 0.0625;
    if (quadratic_region) ++quadratic_steps;
    const double slope = g.dot(*dx);
    const double f0 = quadratic_region ? 0.0 : merit(p, x, t);
    double alpha = 1.0;
    for (;;) {
      const Vector trial = x + alpha * *dx;
      const double f1 = merit(p, trial, t);
      if (std::isfinite(f1) && (quadratic_region || f1 <= f0 + 0.25 * alpha * slope)) break;
      alpha *= 0.5;
      if (alpha < 1e-14) return CenterResult::kStalled;
    }
    x += alpha * *dx;
    ++iterations;
  }
}

/// max(largest constant or coefficient magnitude, 1 / smallest coefficient
/// matrix magnitude): variables with tiny coefficients may need large values.
double data_scale(const ConicProgram& program) {
  double big = 1.0;
  double small = 1.0;
  auto visit = [&](const AffineSymExpr& e) {
    if (e.constant().size()) big = std::max(big, e.constant().cwiseAbs().maxCoeff());
    for (const auto& [_, coeff] : e.coefficients()) {
      const double mag = coeff.cwiseAbs().maxCoeff();
      if (mag == 0.0) continue;
      big = std::max(big, mag);
      small = std::min(small, mag);
    }
  };
  for (const auto& blk : program.psd_blocks()) visit(blk);
  if (const auto* l = std::get_if<NegLogDetObjective>(&program.objective())) visit(l->expr);
  return std::max(big, 1.0 / small);
}

double max_psd_violation(const BarrierProblem& p, const Vector& x) {
  double worst = 0.0;
  for (const auto& blk : p.blocks) {
    const Matrix f = blk.evaluate(x);
    const double lo = Eigen::SelfAdjointEigenSolver<Matrix>(f, Eigen::EigenvaluesOnly).eigenvalues()(0);
    worst = std::max(worst, -lo);
  }
  return worst;
}

bool strictly_feasible(const BarrierProblem& p, const Vector& x) {
  for (const auto& blk : p.blocks) {
    if (!log_det(blk.evaluate(x))) return false;
  }
  return std::isfinite(merit(p, x, 0.0));
}

}  // namespace

SolveOutcome BarrierBackend::solve(const ConicProgram& program, const SolverOptions& options) const {
  SolveOutcome out;
  if (auto problems = program.validate(); !problems.empty()) {
    out.status = SolveStatus::kNumericalTrouble;
    out.message = "malformed program: " + problems.front();
    return out;
  }

  const Index n = static_cast<Index>(program.num_coords());
  const double bound = options.variable_bound * data_scale(program);

  BarrierProblem base;
  base.n = n;
  for (const auto& blk : program.psd_blocks()) base.blocks.push_back(to_block(blk));
  for (std::size_t coord : program.nonneg_coords()) {
    Block nonneg;
    nonneg.f0 = Matrix::Zero(1, 1);
    nonneg.terms.emplace_back(static_cast<Index>(coord), Matrix::Ones(1, 1));
    base.blocks.push_back(std::move(nonneg));
  }
  base.c = Vector::Zero(n);
  if (const auto* tr = std::get_if<TraceObjective>(&program.objective())) {
    for (Index i = 0; i < tr->var.dim; ++i) base.c(static_cast<Index>(tr->var.coord(i, i))) = 1.0;
  } else if (const auto* ld = std::get_if<NegLogDetObjective>(&program.objective())) {
    base.logdet_objective = to_block(ld->expr);
  }
  const auto& eqs = program.equalities();
  base.a = Matrix::Zero(static_cast<Index>(eqs.size()), n);
  base.b = Vector::Zero(static_cast<Index>(eqs.size()));
  for (std::size_t i = 0; i < eqs.size(); ++i) {
    for (const auto& [coord, coeff] : eqs[i].terms) {
      base.a(static_cast<Index>(i), static_cast<Index>(coord)) += coeff;
    }
    base.b(static_cast<Index>(i)) = eqs[i].rhs;
  }
  base.box = Vector::Constant(n, bound);

  auto log = [&](const char* phase, double t, double gap, double obj) {
    if (options.verbosity > 0) {
      std::cerr << "[barrier] " << phase << " t=" << t << " gap=" << gap << " obj=" << obj
                << " newton=" << out.iterations << '\n';
    }
  };

  // Caller's hint if it is usable, else the least-norm point on the affine
  // constraints.
  Vector x = Vector::Zero(n);
  const auto& hint = program.initial_point();
  const bool hint_usable =
      hint && hint->size() == n && hint->allFinite() &&
      (base.a.rows() == 0 || (base.a * *hint - base.b).cwiseAbs().maxCoeff() <= 1e-12) &&
      strictly_feasible(base, *hint);
  if (hint_usable) {
    x = *hint;
  } else if (base.a.rows() > 0) {
    x = base.a.completeOrthogonalDecomposition().solve(base.b);
  }
  auto finish_residuals = [&](const Vector& at) {
    out.x = at;
    out.max_psd_violation = max_psd_violation(base, at);
    out.max_equality_violation =
        base.a.rows() ? (base.a * at - base.b).cwiseAbs().maxCoeff() : 0.0;
  };
  if (x.size() && x.cwiseAbs().maxCoeff() >= bound) {
    out.status = SolveStatus::kNumericalTrouble;
    out.message = "equality constraints force coordinates outside the variable bound";
    finish_residuals(x);
    return out;
  }

  // Phase I.
  if (!strictly_feasible(base, x)) {
    double worst = 0.0;
    for (const auto& blk : base.blocks) {
      const Matrix f = blk.evaluate(x);
      worst = std::max(
          worst, -Eigen::SelfAdjointEigenSolver<Matrix>(f, Eigen::EigenvaluesOnly).eigenvalues()(0));
    }
    const double s0 = worst + 1.0;

    BarrierProblem phase1;
    phase1.n = n + 1;
    for (const auto& blk : base.blocks) {
      Block shifted = blk;
      shifted.terms.emplace_back(n, Matrix::Identity(blk.dim(), blk.dim()));
      phase1.blocks.push_back(std::move(shifted));
    }
    phase1.c = Vector::Zero(n + 1);
    phase1.c(n) = 1.0;
    phase1.a = Matrix::Zero(base.a.rows(), n + 1);
    phase1.a.leftCols(n) = base.a;
    phase1.b = base.b;
    phase1.box = Vector::Constant(n + 1, bound);
    phase1.box(n) = std::max(bound, 2.0 * s0 + 1.0);

    Vector z(n + 1);
    z.head(n) = x;
    z(n) = s0;
    const double theta1 = phase1.theta();
    double t = theta1 / s0;
    double factor = kPathFactor;
    double t_centered = 0.0;  // 0 until some stage centers
    for (;;) {
      const int budget = std::min(options.max_iter, out.iterations + options.max_center_iter);
      Vector trial = z;
      const auto res = center(phase1, trial, t, out.iterations, budget);
      const double gap = theta1 / t;
      log("phase1", t, gap, trial(n));
      if (trial(n) < 0.0 && strictly_feasible(base, trial.head(n))) {
        x = trial.head(n);
        break;
      }
      if (res == CenterResult::kCentered) {
        z = std::move(trial);
        t_centered = t;
        const double s = z(n);
        if (s - gap > 0.0) {
          out.status = SolveStatus::kInfeasible;
          out.duality_gap = gap;
          out.message = "phase I lower bound on infeasibility is " + std::to_string(s - gap);
          finish_residuals(z.head(n));
          return out;
        }
        if (out.iterations < options.max_iter && gap > 1e-15 * std::max(1.0, std::abs(s))) {
          t *= factor;
          continue;
        }
      } else if (t_centered > 0.0 && factor > kMinPathFactor && out.iterations < options.max_iter) {
        factor = std::sqrt(factor);
        t = t_centered * factor;
        continue;
      }
      out.status = SolveStatus::kNumericalTrouble;
      out.message = "phase I could not decide feasibility";
      finish_residuals(z.head(n));
      return out;
    }
  }

  // Phase II. A stage that fails to center is retried from the last center
  // with a shorter step; the last center is the fallback answer.
  const double theta = base.theta();
  double t = std::max(1.0, theta / std::max(1.0, std::abs(base.objective(x))));
  double factor = kPathFactor;
  std::optional<std::pair<Vector, double>> last_centered;
  double t_centered = 0.0;
  for (;;) {
    const int budget = std::min(options.max_iter, out.iterations + options.max_center_iter);
    Vector trial = x;
    const auto res = center(base, trial, t, out.iterations, budget);
    const double gap = theta / t;
    if (res == CenterResult::kCentered) {
      x = std::move(trial);
      last_centered.emplace(x, gap);
      t_centered = t;
      const double obj = base.objective(x);
      log("phase2", t, gap, obj);
      if (gap <= options.gap_tol * std::max(1.0, std::abs(obj))) {
        out.status = SolveStatus::kOptimal;
        out.duality_gap = gap;
        break;
      }
      if (out.iterations < options.max_iter) {
        t *= factor;
        continue;
      }
      out.message = "iteration limit reached";
    } else {
      out.message = res == CenterResult::kIterLimit ? "centering did not converge"
                    : res == CenterResult::kStalled ? "line search stalled"
                                                    : "singular Newton system";
      if (!last_centered) {
        out.status = SolveStatus::kNumericalTrouble;
        out.duality_gap = kInf;
        x = std::move(trial);
        break;
      }
      if (factor > kMinPathFactor && out.iterations < options.max_iter) {
        factor = std::sqrt(factor);
        t = t_centered * factor;
        continue;
      }
    }
    x = last_centered->first;
    const double obj = base.objective(x);
    out.duality_gap = last_centered->second;
    out.status = out.duality_gap <= options.acceptable_gap_tol * std::max(1.0, std::abs(obj))
                     ? SolveStatus::kOptimal
                     : SolveStatus::kNumericalTrouble;
    break;
  }

  out.objective = program.objective_value(x);
  finish_residuals(x);
  if (out.status == SolveStatus::kOptimal && out.max_psd_violation > options.feas_tol) {
    out.status = SolveStatus::kNumericalTrouble;
    out.message = "final iterate violates a PSD block";
  }
  return out;
}

const SdpBackend& default_backend() {
  static const BarrierBackend backend;
  return backend;
}

}  // namespace ocifuse
