#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "ocifuse/linalg.hpp"
#include "ocifuse/problem.hpp"

namespace ocifuse::testing {

using Rng = std::mt19937_64;

inline Matrix random_matrix(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal;
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

/// PD matrix with eigenvalues drawn log-uniformly from [lo, hi].
inline SymMatrix random_pd(Index n, Rng& rng, double lo = 0.3, double hi = 5.0) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Eigen::HouseholderQR<Matrix> qr(random_matrix(n, n, rng));
  const Matrix q = qr.householderQ();
  Vector eig(n);
  for (Index i = 0; i < n; ++i) eig(i) = lo * std::pow(hi / lo, unit(rng));
  return symmetrize(q * eig.asDiagonal() * q.transpose());
}

inline Index uniform_index(Index lo, Index hi, Rng& rng) {
  return std::uniform_int_distribution<Index>(lo, hi)(rng);
}

/// Random point on the simplex (flat Dirichlet).
inline Vector random_simplex(Index m, Rng& rng) {
  std::exponential_distribution<double> expo(1.0);
  Vector w(m);
  for (Index i = 0; i < m; ++i) w(i) = expo(rng);
  return w / w.sum();
}

/// Measurement matrix with full column rank when rows >= cols.
inline Matrix random_h(Index rows, Index cols, Rng& rng) { return random_matrix(rows, cols, rng); }

/// N estimates of an n-dimensional state. With full_state every H_i = I;
/// otherwise each H_i has a random row count in [1, n] and the stack is
/// redrawn until it has full column rank.
inline CiProblem random_ci(std::size_t count, Index n, bool full_state, Rng& rng,
                           Criterion criterion = Criterion::kTrace) {
  CiProblem p;
  p.criterion = criterion;
  for (;;) {
    p.estimates.clear();
    for (std::size_t i = 0; i < count; ++i) {
      const Index rows = full_state ? n : uniform_index(1, n, rng);
      const Matrix h = full_state ? Matrix(Matrix::Identity(n, n)) : random_h(rows, n, rng);
      p.estimates.push_back({h, random_pd(rows, rng)});
    }
    if (rank(stacked_h(p.estimates)) == n) return p;
  }
}

/// Like random_ci but the stacked H has rank n - 1: every H_i maps through a
/// common rank-deficient projector.
inline CiProblem deficient_ci(std::size_t count, Index n, Rng& rng,
                              Criterion criterion = Criterion::kTrace) {
  CiProblem p;
  p.criterion = criterion;
  const Matrix basis = random_matrix(n, n - 1, rng);
  const Matrix proj = basis * (basis.transpose() * basis).inverse() * basis.transpose();
  for (std::size_t i = 0; i < count; ++i) {
    const Index rows = uniform_index(1, n, rng);
    p.estimates.push_back({random_h(rows, n, rng) * proj, random_pd(rows, rng)});
  }
  return p;
}

/// Two full-state estimates with block-diagonal known part X2 = diag(S1, S2).
inline SciProblem random_sci_block(Index n, Rng& rng, Criterion criterion = Criterion::kTrace) {
  SciProblem p;
  p.criterion = criterion;
  for (int i = 0; i < 2; ++i) p.estimates.push_back({Matrix::Identity(n, n), random_pd(n, rng)});
  Matrix known = Matrix::Zero(2 * n, 2 * n);
  known.topLeftCorner(n, n) = random_pd(n, rng).matrix();
  known.bottomRightCorner(n, n) = random_pd(n, rng).matrix();
  p.known = SymMatrix::from_matrix(known);
  return p;
}

/// Two estimates with a dense (cross-correlated) known part.
inline SciProblem random_sci_dense(Index n, bool full_state, Rng& rng,
                                   Criterion criterion = Criterion::kTrace) {
  SciProblem p;
  p.criterion = criterion;
  for (;;) {
    p.estimates.clear();
    Index o = 0;
    for (int i = 0; i < 2; ++i) {
      const Index rows = full_state ? n : uniform_index(1, n, rng);
      const Matrix h = full_state ? Matrix(Matrix::Identity(n, n)) : random_h(rows, n, rng);
      p.estimates.push_back({h, random_pd(rows, rng)});
      o += rows;
    }
    if (rank(stacked_h(p.estimates)) != n) continue;
    p.known = random_pd(o, rng);
    return p;
  }
}

/// Random coordinate subsets of {0..m-1} as row selectors; every coordinate
/// is covered by at least one block and neighbouring blocks overlap.
inline std::vector<BoundSpec> random_bounds(Index m, std::size_t count, Rng& rng) {
  std::vector<std::vector<Index>> sets(count);
  std::vector<Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t k = 0; k < order.size(); ++k) sets[k % count].push_back(order[k]);
  std::bernoulli_distribution extra(0.35);
  for (auto& s : sets) {
    for (Index j = 0; j < m; ++j) {
      if (std::find(s.begin(), s.end(), j) == s.end() && extra(rng)) s.push_back(j);
    }
    if (s.empty()) s.push_back(uniform_index(0, m - 1, rng));
    std::sort(s.begin(), s.end());
  }
  std::vector<BoundSpec> bounds;
  for (const auto& s : sets) {
    Matrix w = Matrix::Zero(static_cast<Index>(s.size()), m);
    for (std::size_t r = 0; r < s.size(); ++r) w(static_cast<Index>(r), s[r]) = 1.0;
    bounds.push_back({w, random_pd(static_cast<Index>(s.size()), rng)});
  }
  return bounds;
}

/// General problem with PD noise: o measurements of an n-state, m-dimensional
/// unknown part coupled through a dense C.
inline OciProblem random_oci_pd(Index n, Index o, Index m, std::size_t num_bounds, Rng& rng,
                                Criterion criterion = Criterion::kTrace) {
  OciProblem p;
  p.criterion = criterion;
  p.h = random_h(o, n, rng);
  p.noise = random_pd(o, rng, 0.1, 1.0);
  p.coupling = random_matrix(o, m, rng) / std::sqrt(static_cast<double>(m));
  p.bounds = random_bounds(m, num_bounds, rng);
  return p;
}

/// Zero noise, square invertible C.
inline OciProblem random_oci_zero(Index n, Index o, std::size_t num_bounds, Rng& rng,
                                  Criterion criterion = Criterion::kTrace) {
  OciProblem p;
  p.criterion = criterion;
  p.h = random_h(o, n, rng);
  p.noise = SymMatrix::zero(o);
  p.coupling = random_matrix(o, o, rng) + 2.0 * Matrix::Identity(o, o);
  p.bounds = random_bounds(o, num_bounds, rng);
  return p;
}

inline double kh_error(const Matrix& gain, const Matrix& h) {
  return (gain * h - Matrix::Identity(h.cols(), h.cols())).cwiseAbs().maxCoeff();
}

}  // namespace ocifuse::testing
