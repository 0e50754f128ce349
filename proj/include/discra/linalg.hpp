#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <string>

namespace discra {

enum class SolverKind { automatic, cg, dense };

struct SolveReport {
  std::string method;
  int iterations = 0;
  double residual = 0.0;   // |Ax - b| / |b|
  double energy = 0.0;     // x.Ax / 2 - b.x
};

// Symmetric positive definite solve.  Automatic picks CG from 2000 unknowns up.
Eigen::VectorXd solve_spd(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b,
                          SolverKind kind = SolverKind::automatic, SolveReport* report = nullptr);

constexpr int kDenseLimit = 2000;

}  // namespace discra
