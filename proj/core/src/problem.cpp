#include "ocifuse/problem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "ocifuse/errors.hpp"

namespace ocifuse {

namespace {

std::string dims(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

std::string join(const std::vector<std::string>& items) {
  std::ostringstream os;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) os << "; ";
    os << items[i];
  }
  return os.str();
}

void validate_estimates(const std::vector<Estimate>& estimates, const char* bound_name,
                        std::vector<std::string>& out) {
  if (estimates.empty()) {
    out.emplace_back("at least one estimate is required");
    return;
  }
  const Index n = estimates.front().h.cols();
  if (n == 0) out.emplace_back("estimate 0: H must have at least one column");
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const auto& e = estimates[i];
    const std::string tag = "estimate " + std::to_string(i) + ": ";
    if (e.h.cols() != n) {
      out.push_back(tag + "H has " + std::to_string(e.h.cols()) + " columns, expected " +
                    std::to_string(n));
    }
    if (e.h.rows() == 0) out.push_back(tag + "H must have at least one row");
    if (!all_finite(e.h) || !all_finite(e.bound.matrix())) out.push_back(tag + "non-finite entries");
    if (e.bound.dim() != e.h.rows()) {
      out.push_back(tag + bound_name + " is " + dims(e.bound.matrix()) + ", expected " +
                    std::to_string(e.h.rows()) + "x" + std::to_string(e.h.rows()));
    } else if (!is_pd(e.bound)) {
      out.push_back(tag + bound_name + " must be PD");
    }
  }
}

}  // namespace

InvalidProblemError::InvalidProblemError(std::vector<std::string> violations)
    : std::invalid_argument("invalid problem: " + join(violations)),
      violations_(std::move(violations)) {}

std::string_view to_string(Criterion c) {
  switch (c) {
    case Criterion::kTrace:
      return "trace";
    case Criterion::kLogDet:
      return "logdet";
  }
  return "trace";
}

Criterion parse_criterion(std::string_view s) {
  if (s == "trace") return Criterion::kTrace;
  if (s == "logdet") return Criterion::kLogDet;
  throw std::invalid_argument("unknown criterion '" + std::string(s) +
                              "' (expected trace or logdet)");
}

double evaluate_criterion(Criterion c, const SymMatrix& b) {
  return c == Criterion::kTrace ? b.trace() : log_det_pd(b);
}

NoiseRegime noise_regime(const SymMatrix& r) {
  if (r.is_exactly_zero()) return NoiseRegime::kZero;
  if (is_pd(r)) return NoiseRegime::kPositiveDefinite;
  return NoiseRegime::kUnsupported;
}

std::vector<std::string> validate_oci(const OciProblem& p) {
  std::vector<std::string> out;
  const Index o = p.h.rows();
  const Index n = p.h.cols();
  const Index m = p.coupling.cols();

  if (o == 0 || n == 0) out.emplace_back("H must be non-empty (got " + dims(p.h) + ")");
  if (!all_finite(p.h) || !all_finite(p.coupling) || !all_finite(p.noise.matrix())) {
    out.emplace_back("H, R and C must have finite entries");
  }
  if (p.coupling.rows() != o) {
    out.emplace_back("C is " + dims(p.coupling) + ", expected " + std::to_string(o) + " rows");
  }
  if (m == 0) out.emplace_back("C must have at least one column");

  bool r_shape_ok = p.noise.dim() == o;
  if (!r_shape_ok) {
    out.emplace_back("R is " + dims(p.noise.matrix()) + ", expected " + std::to_string(o) + "x" +
                     std::to_string(o));
  }

  if (p.bounds.empty()) out.emplace_back("at least one bound is required");
  for (std::size_t b = 0; b < p.bounds.size(); ++b) {
    const auto& bs = p.bounds[b];
    const std::string tag = "bound " + std::to_string(b) + ": ";
    if (bs.selector.cols() != m) {
      out.push_back(tag + "W is " + dims(bs.selector) + ", expected " + std::to_string(m) +
                    " columns");
    }
    if (bs.selector.rows() == 0) out.push_back(tag + "W must have at least one row");
    if (bs.bound.dim() != bs.selector.rows()) {
      out.push_back(tag + "X is " + dims(bs.bound.matrix()) + ", expected " +
                    std::to_string(bs.selector.rows()) + "x" + std::to_string(bs.selector.rows()));
    } else if (!all_finite(bs.bound.matrix()) || !all_finite(bs.selector)) {
      out.push_back(tag + "non-finite entries");
    } else if (!is_pd(bs.bound)) {
      out.push_back(tag + "X must be PD");
    }
    if (bs.selector.rows() > 0 && rank(bs.selector) != bs.selector.rows()) {
      out.push_back(tag + "W must have full row rank");
    }
  }

  if (r_shape_ok) {
    switch (noise_regime(p.noise)) {
      case NoiseRegime::kUnsupported:
        out.emplace_back("R must be PD or exactly zero");
        break;
      case NoiseRegime::kZero:
        if (o != m || p.coupling.rows() != o || rank(p.coupling) != m) {
          out.emplace_back(
              "R=0 requires square invertible C (fold C into H and the bounds so that o = m)");
        }
        break;
      case NoiseRegime::kPositiveDefinite:
        break;
    }
  }
  return out;
}

std::vector<std::string> validate_ci(const CiProblem& p) {
  std::vector<std::string> out;
  validate_estimates(p.estimates, "X", out);
  return out;
}

std::vector<std::string> validate_sci(const SciProblem& p) {
  std::vector<std::string> out;
  validate_estimates(p.estimates, "X1", out);
  Index o = 0;
  for (const auto& e : p.estimates) o += e.h.rows();
  if (p.known.dim() != o) {
    out.push_back("X2 is " + dims(p.known.matrix()) + ", expected " + std::to_string(o) + "x" +
                  std::to_string(o) + " (sum of estimate dimensions)");
  } else if (!all_finite(p.known.matrix())) {
    out.emplace_back("X2 has non-finite entries");
  } else if (!is_pd(p.known)) {
    out.emplace_back("X2 must be PD");
  }
  return out;
}

Matrix stacked_h(const std::vector<Estimate>& estimates) {
  Index rows = 0;
  const Index n = estimates.empty() ? 0 : estimates.front().h.cols();
  for (const auto& e : estimates) rows += e.h.rows();
  Matrix h(rows, n);
  Index r = 0;
  for (const auto& e : estimates) {
    h.middleRows(r, e.h.rows()) = e.h;
    r += e.h.rows();
  }
  return h;
}

std::vector<Matrix> block_selectors(const std::vector<Index>& sizes) {
  const Index total = std::accumulate(sizes.begin(), sizes.end(), Index{0});
  std::vector<Matrix> out;
  out.reserve(sizes.size());
  Index offset = 0;
  for (Index s : sizes) {
    Matrix w = Matrix::Zero(s, total);
    w.middleCols(offset, s).setIdentity();
    out.push_back(std::move(w));
    offset += s;
  }
  return out;
}

namespace {

OciProblem estimates_to_oci(const std::vector<Estimate>& estimates, SymMatrix noise,
                            Criterion criterion) {
  std::vector<Index> sizes;
  sizes.reserve(estimates.size());
  for (const auto& e : estimates) sizes.push_back(e.h.rows());
  auto selectors = block_selectors(sizes);

  OciProblem p;
  p.h = stacked_h(estimates);
  const Index o = p.h.rows();
  p.noise = std::move(noise);
  p.coupling = Matrix::Identity(o, o);
  p.criterion = criterion;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    p.bounds.push_back({std::move(selectors[i]), estimates[i].bound});
  }
  return p;
}

}  // namespace

OciProblem ci_to_oci(const CiProblem& p) {
  if (auto v = validate_ci(p); !v.empty()) throw InvalidProblemError(std::move(v));
  const Index o = stacked_h(p.estimates).rows();
  return estimates_to_oci(p.estimates, SymMatrix::zero(o), p.criterion);
}

OciProblem sci_to_oci(const SciProblem& p) {
  if (auto v = validate_sci(p); !v.empty()) throw InvalidProblemError(std::move(v));
  return estimates_to_oci(p.estimates, p.known, p.criterion);
}

Vector normalize_simplex(const Vector& omega, double tol) {
  if (omega.size() == 0) throw std::invalid_argument("normalize_simplex: empty weight vector");
  Vector w = omega;
  for (Index i = 0; i < w.size(); ++i) {
    if (!std::isfinite(w(i)) || w(i) < -tol) {
      throw std::invalid_argument("normalize_simplex: weight " + std::to_string(i) + " = " +
                                  std::to_string(w(i)) + " is off the simplex");
    }
    w(i) = std::max(w(i), 0.0);
  }
  const double sum = w.sum();
  if (!(sum > 0.0)) throw std::invalid_argument("normalize_simplex: weights sum to zero");
  return w / sum;
}

}  // namespace ocifuse
