#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ocifuse/linalg.hpp"

namespace ocifuse {

/// Handle to a scalar decision variable (one coordinate).
struct ScalarVar {
  std::size_t coord = 0;
};

/// Handle to a symmetric matrix decision variable. Its dim*(dim+1)/2 free
/// entries occupy consecutive coordinates starting at `offset`, upper
/// triangle in column-major order.
struct MatrixVar {
  std::size_t offset = 0;
  Index dim = 0;

  std::size_t coord(Index i, Index j) const;
  std::size_t num_coords() const { return static_cast<std::size_t>(dim * (dim + 1) / 2); }
};

/// Symmetric matrix expression F0 + sum_k x_k F_k. Blocks are placed by
/// (row, col) offsets; an off-diagonal placement also writes the transpose
/// at (col, row), so every expression is symmetric by construction.
class AffineSymExpr {
 public:
  AffineSymExpr() = default;
  explicit AffineSymExpr(Index dim);

  Index dim() const { return constant_.rows(); }

  void add_constant(Index row, Index col, const Matrix& block);
  void add_scalar(Index row, Index col, ScalarVar var, const Matrix& block);
  /// sign * V placed on the diagonal at (row, row).
  void add_matrix(Index row, const MatrixVar& var, double sign = 1.0);

  const Matrix& constant() const { return constant_; }
  const std::map<std::size_t, Matrix>& coefficients() const { return coefficients_; }

  Matrix evaluate(const Vector& x) const;

 private:
  Matrix& coefficient(std::size_t coord);
  void place(Matrix& target, Index row, Index col, const Matrix& block, double scale);

  Matrix constant_;
  std::map<std::size_t, Matrix> coefficients_;
};

struct LinearEquality {
  std::vector<std::pair<std::size_t, double>> terms;
  double rhs = 0.0;
};

struct TraceObjective {
  MatrixVar var;
};

struct NegLogDetObjective {
  AffineSymExpr expr;
};

using Objective = std::variant<std::monostate, TraceObjective, NegLogDetObjective>;

/// Solver-agnostic semidefinite program:
///   minimize   trace(V)  or  -log det(G(x))
///   subject to F_j(x) >= 0 (PSD), a_i^T x = b_i, selected scalars >= 0.
class ConicProgram {
 public:
  ScalarVar add_scalar(std::string name, bool nonneg = false);
  MatrixVar add_matrix(std::string name, Index dim);

  void add_psd_block(AffineSymExpr block);
  void add_equality(LinearEquality eq);
  /// sum of the given scalars == rhs
  void add_sum_equals(const std::vector<ScalarVar>& vars, double rhs);

  void minimize_trace(const MatrixVar& var);
  void minimize_neg_log_det(AffineSymExpr expr);

  std::size_t num_coords() const { return num_coords_; }
  const std::vector<AffineSymExpr>& psd_blocks() const { return blocks_; }
  const std::vector<LinearEquality>& equalities() const { return equalities_; }
  const std::vector<std::size_t>& nonneg_coords() const { return nonneg_; }
  const Objective& objective() const { return objective_; }

  const std::vector<std::pair<std::string, ScalarVar>>& scalar_vars() const { return scalars_; }
  const std::vector<std::pair<std::string, MatrixVar>>& matrix_vars() const { return matrices_; }

  /// Structural problems (dangling coordinates, asymmetric coefficients).
  std::vector<std::string> validate() const;

  /// Objective value at x (0 for a pure feasibility program).
  double objective_value(const Vector& x) const;

  /// Starting point hint. Backends use it when it is strictly feasible and
  /// fall back to their own initialization otherwise.
  void set_initial_point(Vector x) { initial_point_ = std::move(x); }
  const std::optional<Vector>& initial_point() const { return initial_point_; }

 private:
  std::size_t num_coords_ = 0;
  std::vector<std::pair<std::string, ScalarVar>> scalars_;
  std::vector<std::pair<std::string, MatrixVar>> matrices_;
  std::vector<AffineSymExpr> blocks_;
  std::vector<LinearEquality> equalities_;
  std::vector<std::size_t> nonneg_;
  Objective objective_;
  std::optional<Vector> initial_point_;
};

/// Packs the free entries of a symmetric matrix variable from coordinates.
SymMatrix matrix_value(const Vector& x, const MatrixVar& var);
/// Inverse of matrix_value: writes `value` into the coordinates of `var`.
void set_matrix_value(Vector& x, const MatrixVar& var, const SymMatrix& value);

enum class SolveStatus { kOptimal, kInfeasible, kNumericalTrouble };

std::string_view to_string(SolveStatus s);

struct SolveOutcome {
  SolveStatus status = SolveStatus::kNumericalTrouble;
  Vector x;
  double objective = 0.0;
  double duality_gap = 0.0;
  double max_psd_violation = 0.0;
  double max_equality_violation = 0.0;
  int iterations = 0;
  std::string message;

  double value(ScalarVar v) const { return x(static_cast<Index>(v.coord)); }
  SymMatrix value(const MatrixVar& v) const { return matrix_value(x, v); }
};

struct SolverOptions {
  double feas_tol = 1e-8;
  double gap_tol = 1e-8;
  /// Gap accepted as optimal when rounding stops progress before gap_tol.
  double acceptable_gap_tol = 1e-5;
  int max_iter = 800;
  /// Newton steps allowed per centering.
  int max_center_iter = 100;
  int verbosity = 0;
  /// Coordinates are confined to |x_k| <= variable_bound * data scale, where
  /// the data scale grows with the largest data magnitude and with the
  /// inverse of the smallest coefficient matrix. Programs that only have
  /// solutions outside the box read as infeasible.
  double variable_bound = 1e4;
};

/// Contract for conic backends. Optimal: blocks hold to feas_tol and the
/// objective is within gap_tol * max(1, |objective|) of optimal, or within
/// acceptable_gap_tol when numerical precision stalls progress (duality_gap
/// reports the certified value). Infeasible:
/// the backend holds a certificate. NumericalTrouble: neither.
/// Implementations must be safe to call concurrently on distinct programs.
class SdpBackend {
 public:
  virtual ~SdpBackend() = default;
  virtual std::string_view name() const = 0;
  virtual SolveOutcome solve(const ConicProgram& program, const SolverOptions& options) const = 0;
};

const SdpBackend& default_backend();

inline SolveOutcome solve(const ConicProgram& program, const SolverOptions& options = {}) {
  return default_backend().solve(program, options);
}

}  // namespace ocifuse
