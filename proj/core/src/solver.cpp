#include <cmath>

#include "its/field.hpp"

namespace its {

SolveReport solve_coefficients(const SparseMatrix& matrix, const Eigen::VectorXd& rhs,
                               double tolerance, int max_iterations) {
  const Eigen::Index n = matrix.cols();
  if (matrix.rows() != rhs.size()) throw Error("matrix and right-hand side sizes differ");
  if (max_iterations <= 0) max_iterations = static_cast<int>(std::min<Eigen::Index>(10 * n, 1 << 30));

  SolveReport report;
  report.solution = Eigen::VectorXd::Zero(n);
  const double rhs_norm = rhs.norm();
  if (n == 0 || rhs_norm == 0.0) {
    report.converged = true;
    return report;
  }

  // Jacobi preconditioner for A^T A: squared column norms.
  Eigen::VectorXd inv_diag = Eigen::VectorXd::Zero(n);
  for (Eigen::Index r = 0; r < matrix.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(matrix, r); it; ++it) inv_diag[it.col()] += it.value() * it.value();
  for (Eigen::Index i = 0; i < n; ++i) inv_diag[i] = inv_diag[i] > 0.0 ? 1.0 / inv_diag[i] : 0.0;

  Eigen::VectorXd& x = report.solution;
  Eigen::VectorXd r = rhs;
  Eigen::VectorXd z = matrix.transpose() * r;
  const double normal_rhs = z.norm();
  Eigen::VectorXd zt = inv_diag.cwiseProduct(z);
  Eigen::VectorXd p = zt;
  double gamma = z.dot(zt);
  Eigen::VectorXd q(matrix.rows());

  report.normal_residual = 1.0;
  for (int iter = 0; iter < max_iterations; ++iter) {
    q.noalias() = matrix * p;
    const double qq = q.squaredNorm();
    if (qq == 0.0) break;
    const double alpha = gamma / qq;
    x += alpha * p;
    r -= alpha * q;
    z.noalias() = matrix.transpose() * r;
    report.iterations = iter + 1;
    report.normal_residual = z.norm() / normal_rhs;
    if (report.normal_residual <= tolerance) {
      report.converged = true;
      break;
    }
    zt = inv_diag.cwiseProduct(z);
    const double gamma_next = z.dot(zt);
    p = zt + (gamma_next / gamma) * p;
    gamma = gamma_next;
  }
  report.residual = (rhs - matrix * x).norm() / rhs_norm;
  return report;
}

}  // namespace its
