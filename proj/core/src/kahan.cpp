#include "ocifuse/kahan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace ocifuse {

KahanTerms build_kahan_terms(std::span<const BoundSpec> bounds, Index m) {
  KahanTerms k;
  k.dim = m;
  k.terms.reserve(bounds.size());
  for (std::size_t b = 0; b < bounds.size(); ++b) {
    const auto& bs = bounds[b];
    if (bs.selector.cols() != m || bs.selector.rows() != bs.bound.dim()) {
      throw std::invalid_argument("build_kahan_terms: bound " + std::to_string(b) +
                                  " has inconsistent dimensions");
    }
    if (!is_pd(bs.bound)) {
      throw std::invalid_argument("build_kahan_terms: X of bound " + std::to_string(b) +
                                  " is not PD");
    }
    k.terms.push_back(congruence_t(bs.selector, inverse_pd(bs.bound)));
  }
  return k;
}

bool on_simplex(const Vector& omega, double tol) {
  if (omega.size() == 0 || !omega.allFinite()) return false;
  return omega.minCoeff() >= -tol && std::abs(omega.sum() - 1.0) <= tol;
}

SymMatrix combined_term(const KahanTerms& k, const Vector& omega, double tol) {
  if (static_cast<std::size_t>(omega.size()) != k.size()) {
    throw std::invalid_argument("combined_term: expected " + std::to_string(k.size()) +
                                " weights, got " + std::to_string(omega.size()));
  }
  if (!on_simplex(omega, tol)) {
    throw std::invalid_argument("combined_term: weights are off the simplex");
  }
  SymMatrix sum = SymMatrix::zero(k.dim);
  for (std::size_t b = 0; b < k.size(); ++b) sum += omega(static_cast<Index>(b)) * k.terms[b];
  return sum;
}

bool is_admissible(const SymMatrix& p, std::span<const BoundSpec> bounds, double tol) {
  if (!is_pd(p, tol)) return false;
  for (const auto& bs : bounds) {
    if (bs.selector.cols() != p.dim()) return false;
    if (!psd_dominates(bs.bound, congruence(bs.selector, p), tol)) return false;
  }
  return true;
}

bool in_kahan_family(const SymMatrix& p, const KahanTerms& k, const Vector& omega, double tol) {
  const SymMatrix p_inv = inverse_pd(p);
  return is_psd(p_inv - combined_term(k, omega), tol);
}

namespace {

/// Largest generalized eigenvalue of (W P W^T, X), i.e. how far P must be
/// shrunk so that W P W^T <= X.
double bound_ratio(const BoundSpec& bs, const SymMatrix& p) {
  Eigen::LLT<Matrix> llt(bs.bound.matrix());
  const Matrix l_inv_w = llt.matrixL().solve(bs.selector);
  return eigenvalues(congruence(l_inv_w, p)).maxCoeff();
}

}  // namespace

std::vector<SymMatrix> sample_admissible(std::span<const BoundSpec> bounds, Index m,
                                         std::uint64_t seed, std::size_t count) {
  std::vector<SymMatrix> out;
  out.reserve(count);
  if (count == 0) return out;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_int_distribution<Index> rank_dist(1, m);

  const std::size_t max_attempts = 1000 * count;
  for (std::size_t attempt = 0; out.size() < count; ++attempt) {
    if (attempt >= max_attempts) {
      throw std::runtime_error("sample_admissible: rejection sampling did not converge");
    }
    const Index r = rank_dist(rng);
    Matrix g(m, r);
    for (Index i = 0; i < g.size(); ++i) g.data()[i] = gauss(rng);
    Matrix p0 = g * g.transpose() / static_cast<double>(r);
    // A small ridge keeps P PD while leaving low-rank draws strongly correlated.
    const double ridge = (1e-3 + 0.2 * unif(rng)) * std::max(p0.trace() / m, 1e-12);
    p0.diagonal().array() += ridge;
    const SymMatrix base = symmetrize(p0);

    double worst = 0.0;
    for (const auto& bs : bounds) worst = std::max(worst, bound_ratio(bs, base));
    const double gamma = worst > 0.0 ? 1.0 / worst : 1.0;

    const bool boundary = out.size() % 2 == 0;
    const double factor = boundary ? 1.0 - 0.01 * unif(rng) : 0.05 + 0.9 * unif(rng);
    SymMatrix p = (factor * gamma) * base;
    if (is_admissible(p, bounds)) out.push_back(std::move(p));
  }
  return out;
}

}  // namespace ocifuse
