#include "discra/linalg.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <stdexcept>

namespace discra {

Eigen::VectorXd solve_spd(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b, SolverKind kind,
                          SolveReport* report) {
  const int n = static_cast<int>(A.rows());
  if (A.cols() != n || b.size() != n) throw std::invalid_argument("solve_spd: dimension mismatch");
  SolveReport rep;
  Eigen::VectorXd x;
  if (n == 0) {
    if (report) *report = rep;
    return Eigen::VectorXd();
  }
  if (kind == SolverKind::automatic) kind = n >= kDenseLimit ? SolverKind::cg : SolverKind::dense;
  if (kind == SolverKind::dense) {
    Eigen::MatrixXd dense = A;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(dense);
    if (ldlt.info() != Eigen::Success) throw std::runtime_error("dense LDLT failed");
    x = ldlt.solve(b);
    rep.method = "dense-ldlt";
  } else {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(1e-12);
    cg.setMaxIterations(10 * n);
    cg.compute(A);
    x = cg.solve(b);
    rep.method = "cg";
    rep.iterations = static_cast<int>(cg.iterations());
  }
  double nb = b.norm();
  rep.residual = (A * x - b).norm() / (nb > 0 ? nb : 1.0);
  rep.energy = 0.5 * x.dot(A * x) - b.dot(x);
  if (report) *report = rep;
  return x;
}

}  // namespace discra
