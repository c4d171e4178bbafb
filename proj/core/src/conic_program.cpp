#include "ocifuse/conic_program.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace ocifuse {

std::size_t MatrixVar::coord(Index i, Index j) const {
  if (i > j) std::swap(i, j);
  if (i < 0 || j >= dim) throw std::out_of_range("MatrixVar::coord: index out of range");
  return offset + static_cast<std::size_t>(j * (j + 1) / 2 + i);
}

AffineSymExpr::AffineSymExpr(Index dim) : constant_(Matrix::Zero(dim, dim)) {}

void AffineSymExpr::place(Matrix& target, Index row, Index col, const Matrix& block,
                          double scale) {
  if (row < 0 || col < 0 || row + block.rows() > dim() || col + block.cols() > dim()) {
    throw std::out_of_range("AffineSymExpr: block placement exceeds expression size");
  }
  if (row == col) {
    if (block.rows() != block.cols()) {
      throw std::invalid_argument("AffineSymExpr: diagonal block must be square");
    }
    target.block(row, col, block.rows(), block.cols()) += scale * 0.5 * (block + block.transpose());
    return;
  }
  const bool overlap = row < col + block.cols() && col < row + block.rows();
  if (overlap) throw std::invalid_argument("AffineSymExpr: off-diagonal block overlaps diagonal");
  target.block(row, col, block.rows(), block.cols()) += scale * block;
  target.block(col, row, block.cols(), block.rows()) += scale * block.transpose();
}

Matrix& AffineSymExpr::coefficient(std::size_t coord) {
  auto [it, inserted] = coefficients_.try_emplace(coord);
  if (inserted) it->second = Matrix::Zero(dim(), dim());
  return it->second;
}

void AffineSymExpr::add_constant(Index row, Index col, const Matrix& block) {
  place(constant_, row, col, block, 1.0);
}

void AffineSymExpr::add_scalar(Index row, Index col, ScalarVar var, const Matrix& block) {
  place(coefficient(var.coord), row, col, block, 1.0);
}

void AffineSymExpr::add_matrix(Index row, const MatrixVar& var, double sign) {
  if (row < 0 || row + var.dim > dim()) {
    throw std::out_of_range("AffineSymExpr: matrix variable exceeds expression size");
  }
  for (Index j = 0; j < var.dim; ++j) {
    for (Index i = 0; i <= j; ++i) {
      Matrix& c = coefficient(var.coord(i, j));
      c(row + i, row + j) += sign;
      if (i != j) c(row + j, row + i) += sign;
    }
  }
}

Matrix AffineSymExpr::evaluate(const Vector& x) const {
  Matrix out = constant_;
  for (const auto& [coord, coeff] : coefficients_) out += x(static_cast<Index>(coord)) * coeff;
  return out;
}

ScalarVar ConicProgram::add_scalar(std::string name, bool nonneg) {
  ScalarVar v{num_coords_++};
  scalars_.emplace_back(std::move(name), v);
  if (nonneg) nonneg_.push_back(v.coord);
  return v;
}

MatrixVar ConicProgram::add_matrix(std::string name, Index dim) {
  if (dim <= 0) throw std::invalid_argument("ConicProgram: matrix variable needs positive size");
  MatrixVar v{num_coords_, dim};
  num_coords_ += v.num_coords();
  matrices_.emplace_back(std::move(name), v);
  return v;
}

void ConicProgram::add_psd_block(AffineSymExpr block) { blocks_.push_back(std::move(block)); }

void ConicProgram::add_equality(LinearEquality eq) { equalities_.push_back(std::move(eq)); }

void ConicProgram::add_sum_equals(const std::vector<ScalarVar>& vars, double rhs) {
  LinearEquality eq;
  eq.rhs = rhs;
  for (const auto& v : vars) eq.terms.emplace_back(v.coord, 1.0);
  add_equality(std::move(eq));
}

void ConicProgram::minimize_trace(const MatrixVar& var) { objective_ = TraceObjective{var}; }

void ConicProgram::minimize_neg_log_det(AffineSymExpr expr) {
  objective_ = NegLogDetObjective{std::move(expr)};
}

std::vector<std::string> ConicProgram::validate() const {
  std::vector<std::string> out;
  auto check_expr = [&](const AffineSymExpr& e, const std::string& tag) {
    const double scale = 1.0 + (e.constant().size() ? e.constant().cwiseAbs().maxCoeff() : 0.0);
    if ((e.constant() - e.constant().transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      out.push_back(tag + ": constant term is not symmetric");
    }
    for (const auto& [coord, coeff] : e.coefficients()) {
      if (coord >= num_coords_) {
        out.push_back(tag + ": references unknown coordinate " + std::to_string(coord));
      }
      if ((coeff - coeff.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + coeff.cwiseAbs().maxCoeff())) {
        out.push_back(tag + ": coefficient of coordinate " + std::to_string(coord) +
                      " is not symmetric");
      }
    }
  };
  for (std::size_t j = 0; j < blocks_.size(); ++j) {
    if (blocks_[j].dim() == 0) out.push_back("block " + std::to_string(j) + ": empty");
    check_expr(blocks_[j], "block " + std::to_string(j));
  }
  for (std::size_t i = 0; i < equalities_.size(); ++i) {
    for (const auto& [coord, _] : equalities_[i].terms) {
      if (coord >= num_coords_) {
        out.push_back("equality " + std::to_string(i) + ": references unknown coordinate");
      }
    }
  }
  if (const auto* t = std::get_if<TraceObjective>(&objective_)) {
    if (t->var.offset + t->var.num_coords() > num_coords_) {
      out.emplace_back("objective: unknown matrix variable");
    }
  } else if (const auto* l = std::get_if<NegLogDetObjective>(&objective_)) {
    check_expr(l->expr, "objective");
  }
  return out;
}

double ConicProgram::objective_value(const Vector& x) const {
  if (const auto* t = std::get_if<TraceObjective>(&objective_)) {
    return matrix_value(x, t->var).trace();
  }
  if (const auto* l = std::get_if<NegLogDetObjective>(&objective_)) {
    Eigen::LLT<Matrix> llt(l->expr.evaluate(x));
    if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
    return -2.0 * llt.matrixLLT().diagonal().array().log().sum();
  }
  return 0.0;
}

SymMatrix matrix_value(const Vector& x, const MatrixVar& var) {
  Matrix m(var.dim, var.dim);
  for (Index j = 0; j < var.dim; ++j) {
    for (Index i = 0; i <= j; ++i) {
      const double v = x(static_cast<Index>(var.coord(i, j)));
      m(i, j) = v;
      m(j, i) = v;
    }
  }
  return symmetrize(m);
}

void set_matrix_value(Vector& x, const MatrixVar& var, const SymMatrix& value) {
  if (value.dim() != var.dim) throw std::invalid_argument("set_matrix_value: dimension mismatch");
  for (Index j = 0; j < var.dim; ++j) {
    for (Index i = 0; i <= j; ++i) x(static_cast<Index>(var.coord(i, j))) = value(i, j);
  }
}

std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal:
      return "optimal";
    case SolveStatus::kInfeasible:
      return "infeasible";
    case SolveStatus::kNumericalTrouble:
      return "numerical_trouble";
  }
  return "numerical_trouble";
}

}  // namespace ocifuse
