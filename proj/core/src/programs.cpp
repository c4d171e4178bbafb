#include "ocifuse/programs.hpp"

#include <stdexcept>
#include <string>

#include "ocifuse/errors.hpp"

namespace ocifuse {

namespace {

std::vector<ScalarVar> add_simplex(ConicProgram& prog, std::size_t count) {
  std::vector<ScalarVar> w;
  w.reserve(count);
  for (std::size_t b = 0; b < count; ++b) {
    w.push_back(prog.add_scalar("omega_" + std::to_string(b + 1), /*nonneg=*/true));
  }
  prog.add_sum_equals(w, 1.0);
  return w;
}

Vector uniform_weights(std::size_t count) {
  return Vector::Constant(static_cast<Index>(count), 1.0 / static_cast<double>(count));
}

void set_weights(Vector& x, const std::vector<ScalarVar>& weights, const Vector& omega) {
  for (std::size_t b = 0; b < weights.size(); ++b) {
    x(static_cast<Index>(weights[b].coord)) = omega(static_cast<Index>(b));
  }
}

/// [B, I; I, inner(w)] where inner(w) = sum_b w_b terms[b].
FusionProgram information_program(const std::vector<SymMatrix>& terms, Index n,
                                  Criterion criterion) {
  FusionProgram fp;
  fp.bound = fp.program.add_matrix("B", n);
  fp.weights = add_simplex(fp.program, terms.size());

  const Matrix eye = Matrix::Identity(n, n);
  AffineSymExpr block(2 * n);
  block.add_matrix(0, fp.bound);
  block.add_constant(0, n, eye);
  AffineSymExpr inner(n);
  for (std::size_t b = 0; b < terms.size(); ++b) {
    block.add_scalar(n, n, fp.weights[b], terms[b].matrix());
    inner.add_scalar(0, 0, fp.weights[b], terms[b].matrix());
  }
  fp.program.add_psd_block(std::move(block));

  // Uniform weights with B = 2 inner^-1 are strictly feasible whenever the
  // uniform information sum is PD.
  const Vector uniform = uniform_weights(terms.size());
  SymMatrix inner0 = SymMatrix::zero(n);
  for (std::size_t b = 0; b < terms.size(); ++b) inner0 += uniform(static_cast<Index>(b)) * terms[b];
  if (is_pd(inner0)) {
    Vector x0 = Vector::Zero(static_cast<Index>(fp.program.num_coords()));
    set_weights(x0, fp.weights, uniform);
    set_matrix_value(x0, fp.bound, 2.0 * inverse_pd(inner0));
    fp.program.set_initial_point(std::move(x0));
  }

  if (criterion == Criterion::kTrace) {
    fp.program.minimize_trace(fp.bound);
  } else {
    fp.program.minimize_neg_log_det(std::move(inner));
  }
  return fp;
}

}  // namespace

FusionProgram build_oci_pd_program(const OciProblem& p, const KahanTerms& k) {
  if (noise_regime(p.noise) != NoiseRegime::kPositiveDefinite) {
    throw std::invalid_argument("build_oci_pd_program: R is not PD");
  }
  const Index n = p.state_dim();
  const Index m = p.uncertain_dim();
  const SymMatrix r_inv = inverse_pd(p.noise);
  const SymMatrix info = congruence_t(p.h, r_inv);                  // H^T R^-1 H
  const Matrix cross = p.h.transpose() * r_inv.matrix() * p.coupling;  // H^T R^-1 C
  const SymMatrix c_info = congruence_t(p.coupling, r_inv);         // C^T R^-1 C

  FusionProgram fp;
  fp.aux = fp.program.add_matrix("U", n);
  fp.bound = fp.program.add_matrix("B", n);
  fp.weights = add_simplex(fp.program, k.size());

  AffineSymExpr first(2 * n);
  first.add_matrix(0, fp.bound);
  first.add_constant(0, n, Matrix::Identity(n, n));
  first.add_constant(n, n, info.matrix());
  first.add_matrix(n, *fp.aux, -1.0);
  fp.program.add_psd_block(std::move(first));

  AffineSymExpr second(n + m);
  second.add_matrix(0, *fp.aux);
  second.add_constant(0, n, cross);
  second.add_constant(n, n, c_info.matrix());
  for (std::size_t b = 0; b < k.size(); ++b) {
    second.add_scalar(n, n, fp.weights[b], k.terms[b].matrix());
  }
  fp.program.add_psd_block(std::move(second));

  // At uniform weights, U = U_min + V/2 with U_min = (H^T R^-1 C) Z^-1 (.)^T,
  // Z = sum w Y + C^T R^-1 C and V = H^T R^-1 H - U_min, leaves both blocks
  // strictly feasible when Z and V are PD.
  const Vector uniform = uniform_weights(k.size());
  const SymMatrix z = combined_term(k, uniform) + c_info;
  if (is_pd(z)) {
    const SymMatrix u_min = congruence(cross, inverse_pd(z));
    const SymMatrix v = info - u_min;
    if (is_pd(v)) {
      Vector x0 = Vector::Zero(static_cast<Index>(fp.program.num_coords()));
      set_weights(x0, fp.weights, uniform);
      set_matrix_value(x0, *fp.aux, u_min + 0.5 * v);
      set_matrix_value(x0, fp.bound, 4.0 * inverse_pd(v));
      fp.program.set_initial_point(std::move(x0));
    }
  }

  if (p.criterion == Criterion::kTrace) {
    fp.program.minimize_trace(fp.bound);
  } else {
    AffineSymExpr inner(n);
    inner.add_constant(0, 0, info.matrix());
    inner.add_matrix(0, *fp.aux, -1.0);
    fp.program.minimize_neg_log_det(std::move(inner));
  }
  return fp;
}

FusionProgram build_oci_zero_program(const OciProblem& p, const KahanTerms& k) {
  const Matrix& c = p.coupling;
  if (c.rows() != c.cols() || rank(c) != c.cols()) {
    throw std::invalid_argument("build_oci_zero_program: C must be square and invertible");
  }
  const Matrix c_inv_h = c.fullPivLu().solve(p.h);  // C^-1 H
  std::vector<SymMatrix> terms;
  terms.reserve(k.size());
  for (const auto& y : k.terms) terms.push_back(congruence_t(c_inv_h, y));
  return information_program(terms, p.state_dim(), p.criterion);
}

FusionProgram build_ci_program(const CiProblem& p) {
  if (auto v = validate_ci(p); !v.empty()) throw InvalidProblemError(std::move(v));
  std::vector<SymMatrix> terms;
  terms.reserve(p.estimates.size());
  for (const auto& e : p.estimates) terms.push_back(congruence_t(e.h, inverse_pd(e.bound)));
  return information_program(terms, p.estimates.front().h.cols(), p.criterion);
}

}  // namespace ocifuse
