#pragma once

#include <vector>

#include "discra/harmonic.hpp"

namespace discra {

struct CRReport {
  double max_residual = 0.0;
  int worst_quad = -1;
  std::vector<double> per_quad;
};
// |f(y') - f(y) - i rho(x,x') (f(x') - f(x))| per quad.
CRReport check_holomorphic(const DoubleMap& m, const Cochain& f);
// max of |d alpha| over faces (poles skipped) and |*alpha + i alpha| over edges.
CRReport check_holomorphic_form(const DoubleMap& m, const Cochain& alpha, const std::vector<int>& skip = {});

// (1/2i pi) times the integral of alpha around the face x*.
cplx residue(const DoubleMap& m, const Cochain& alpha, int x);
cplx holonomy(const Cochain& alpha, const std::vector<SignedEdge>& loop);

// Fundamental cycles of a BFS spanning tree of one complex, avoiding the listed Lambda-edges.
std::vector<std::vector<SignedEdge>> probe_loops(const DoubleMap& m, Kind k, const std::vector<int>& excluded = {});

enum class HolonomyKind { imaginary, real };

struct MeromorphicForm {
  Cochain form;
  std::vector<int> poles;
  std::vector<cplx> residues;
  std::vector<int> cut;               // Lambda-edges of the path
  double holonomy_residual = 0.0;     // worst |Re| (imaginary kind) or |Im| (real kind) over probe loops
  double type_residual = 0.0;         // max |*alpha + i alpha|
  double closed_residual = 0.0;       // max |d alpha| away from the poles
};
// One pole x (path from x to the boundary) or two poles x, x' (path from x to x').
// The imaginary kind comes from a Dirichlet Green function, the real kind from a Neumann
// problem on the surface cut open along the path.
MeromorphicForm meromorphic_form(const DoubleMap& m, const std::vector<int>& poles, const std::vector<int>& path,
                                 HolonomyKind kind);

struct PhiAB {
  Cochain form;
  cplx period_b = 0.0;                // integral over B
  double holonomy_residual = 0.0;     // worst |Re| over probe loops avoiding duals of A
};
// A and B are closed vertex cycles, one in each complex, with exactly one A-edge dual to a B-edge.
PhiAB phi_ab(const DoubleMap& m, const std::vector<int>& loop_a, const std::vector<int>& loop_b);

struct CauchyKernel {
  int dedge = -1;                     // the diamond edge (x, y)
  int x = -1, y = -1;
  std::array<int, 2> rect{-1, -1};    // the two quads of R
  Cochain mu;                         // alpha_x + alpha_y on Lambda
  Cochain nu;                         // on the diamond, zero on (x, y)
  Cochain tau;                        // diamond 1-form with d tau = 1 on rect[0]
  Cochain phi;                        // primitive of mu - 2 i pi A tau off R
  double consistency = 0.0;           // path dependence of phi
  cplx boundary_holonomy = 0.0;       // integral of nu over the boundary of D
};
// D is the whole map, which must be a disc; (x, y) an interior diamond edge.
CauchyKernel cauchy_kernel(const DoubleMap& m, int dedge);

struct CauchyReport {
  cplx contour = 0.0;                 // integral of f . nu over the boundary
  cplx area = 0.0;                    // sum over D of d''f ^ mu (heterogeneous wedge, halved)
  cplx point = 0.0;                   // 2 i pi (f(x) + f(y)) / 2
  cplx residual = 0.0;                // contour - area - point
};
CauchyReport cauchy_integral(const DoubleMap& m, const CauchyKernel& k, const Cochain& f);

// Function calculus on critical maps.
Cochain dagger(const DoubleMap& m, const Cochain& f);

struct PathIntegral {
  Cochain f;
  double path_residual = 0.0;         // worst mismatch over diamond edges not used by the BFS
};
// Integral of g dZ along diamond edges from z0, endpoint averages.
PathIntegral integrate_diamond(const DoubleMap& m, const Cochain& g, const Cochain& z, int z0);

struct Derivative {
  Cochain fprime;
  double residual = 0.0;              // max |df - avg(f') dZ| over diamond edges, relative
  double path_residual = 0.0;
};
Derivative derivative(const DoubleMap& m, const Cochain& f, const Cochain& z, double delta, int z0);

enum class PowerScaling { literal, continuum };   // 1/k or k in front of Z^(k-1) dZ
PathIntegral z_power(const DoubleMap& m, const Cochain& z, int k, int z0, PowerScaling s = PowerScaling::literal);

struct MinimalPolynomial {
  int degree = -1;                    // -1 when no dependence up to max_degree
  std::vector<cplx> coefficients;     // c_0 .. c_{n-1}, monic leading term implied
  double residual = 0.0;
  int rank = 0;                       // rank of span{Z^0 .. Z^max_degree} on U
};
// U given as a set of quads; Z^k evaluated on their corners.
MinimalPolynomial minimal_polynomial(const DoubleMap& m, const Cochain& z, int z0, const std::vector<int>& quads,
                                     int max_degree = -1);

}  // namespace discra
