#pragma once

#include <vector>

#include "discra/forms.hpp"
#include "discra/linalg.hpp"

namespace discra {

struct WeightedGraph {
  int n = 0;
  std::vector<std::array<int, 2>> edges;
  std::vector<double> w;
};

// Gamma or Gamma* as a weighted graph; global[i] is the Lambda vertex of node i.
WeightedGraph graph_of(const DoubleMap& m, Kind k, std::vector<int>* global = nullptr);
Eigen::SparseMatrix<double> laplacian_matrix(const WeightedGraph& g);

// (Lf)(x) = sum_k rho(x, x_k) (f(x) - f(x_k)) on both complexes.
Cochain laplacian(const DoubleMap& m, const Cochain& f);
// -d*d* - *d*d, evaluated through the cochain operators.
Cochain laplacian_composed(const DoubleMap& m, const Cochain& f);

struct GraphSolution {
  Eigen::VectorXcd f;
  double residual = 0.0;   // max |Lf| off the marked set, relative to max |f|
  SolveReport re, im;
};
GraphSolution solve_dirichlet(const WeightedGraph& g, const std::vector<int>& marked,
                              const std::vector<cplx>& values, SolverKind kind = SolverKind::automatic);

struct BoundaryValues {
  std::vector<int> vertices;   // Lambda ids, all of one kind
  std::vector<cplx> values;
};
struct HarmonicSolution {
  Cochain f;                   // zero on the other complex
  double residual = 0.0;
  SolveReport report;
};
HarmonicSolution solve_dirichlet(const DoubleMap& m, Kind k, const BoundaryValues& bd,
                                 SolverKind kind = SolverKind::automatic);

// Non-interior vertices of one kind.
std::vector<int> boundary_vertices(const DoubleMap& m, Kind k);

struct NeumannData {
  int y0 = -1;                 // boundary dual vertex with a single half-edge
  cplx f0 = 0.0;
  Cochain alpha;               // Lambda 1-form, read on boundary dual half-edges
};
struct NeumannSolution {
  Cochain f;                   // on Gamma*
  Cochain conjugate;           // the Dirichlet solution on Gamma, f and F pair holomorphically
  double data_residual = 0.0;  // max |df - alpha| over half-edges other than the one at y0
  double flux_residual = 0.0;  // |df - alpha| on the half-edge at y0; nonzero total flux shows up here
  double harmonic_residual = 0.0;
};
NeumannSolution solve_neumann(const DoubleMap& m, const NeumannData& data, SolverKind kind = SolverKind::automatic);

// L f = rhs on the vertices of one complex, f = 0 on `fixed`; with no fixed vertex, one vertex
// per component is pinned (rhs must then sum to zero on each component).
Cochain solve_poisson(const DoubleMap& m, Kind k, const Cochain& rhs, const std::vector<int>& fixed,
                      SolverKind kind = SolverKind::automatic);

// Least squares on each component with one pinned vertex: L f = b, sum b = 0 per component.
Cochain solve_closed_laplacian(const DoubleMap& m, const Cochain& rhs, SolverKind kind = SolverKind::automatic);

struct HodgeSplit {
  Cochain exact, coexact, harmonic;
};
HodgeSplit hodge_decompose(const DoubleMap& m, const Cochain& c);

struct SubspaceBasis {
  std::vector<Cochain> basis;          // orthonormal for the rho scalar product
  std::vector<double> singular_values; // ascending
  double cutoff = 0.0;
  bool ambiguous = false;              // a singular value within 10x of the cutoff
  int dimension() const { return static_cast<int>(basis.size()); }
};
// Kernel of (d; d*) on Lambda 1-forms.
SubspaceBasis harmonic_basis(const DoubleMap& m);
// Kernel of (d; * + i).
SubspaceBasis holomorphic_basis(const DoubleMap& m);

// sum over faces of f . Lg, through the f.omega product; g must vanish near the boundary.
cplx weyl_residual(const DoubleMap& m, const Cochain& f, const Cochain& g);

struct GreenReport {
  cplx residual = 0.0;
  cplx area = 0.0;
  cplx contour = 0.0;
  double b_residual = 0.0;   // max |A B *dh - *dh| over f and g
  bool reliable = true;
};
// Boundary diamond edges of a quad set, with the sign of the counterclockwise traversal.
std::vector<SignedEdge> region_boundary(const DoubleMap& m, const std::vector<int>& quads);
GreenReport green_identity_residual(const DoubleMap& m, const std::vector<int>& quads, const Cochain& f,
                                    const Cochain& g);
// Same with explicit representatives bf, bg of B*df, B*dg.
GreenReport green_identity_residual(const DoubleMap& m, const std::vector<int>& quads, const Cochain& f,
                                    const Cochain& g, const Cochain& bf, const Cochain& bg);

}  // namespace discra
