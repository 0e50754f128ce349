#pragma once

#include <functional>
#include <string>
#include <vector>

#include "discra/forms.hpp"
#include "discra/mesh.hpp"

namespace discra {

// Positions of Lambda vertices.  On a torus a vertex has many lifts, so every
// quad also keeps its own developed corners; `periods` holds the two
// translations that identify the lifts.
struct PlanarEmbedding {
  std::vector<cplx> pos;
  std::vector<std::array<cplx, 4>> corners;   // optional, per quad
  std::vector<cplx> periods;                  // empty or two vectors

  std::array<cplx, 4> quad(const DoubleMap& m, int q) const;
  bool torus() const { return periods.size() == 2; }
};

// phi[q][k]: interior angle of quad q at corner k, i.e. the angle carried by the
// directed diagonal leaving v[k].
struct AngleSystem {
  std::vector<std::array<double, 4>> phi;
  double delta = 0.0;            // common side (critical) or longest diamond side
  // angle of the Lambda edge e at its tail
  double at_tail(int e, int Q) const { return e < Q ? phi[e][0] : phi[e - Q][1]; }
};

enum class Criticality { none, semi_critical, critical };
const char* criticality_name(Criticality c);

struct ClassifyReport {
  Criticality verdict = Criticality::none;
  AngleSystem angles;
  std::vector<int> violating_quads;     // first offenders for the reported verdict
  std::string reason;
  double max_orthogonality = 0.0;       // |cos| between diagonals
  double max_ratio_error = 0.0;         // relative, against lengths or rho
  double side_spread = 0.0;             // (max - min) / max over diamond sides
  std::vector<double> conic;            // per vertex, NaN off the interior
  std::vector<int> non_flat;            // interior vertices with angle != 2 pi
  std::vector<int> spin_obstructed;     // interior vertices with angle != 2 pi mod 4 pi
  bool flat() const { return non_flat.empty(); }
  bool spin_compatible() const { return spin_obstructed.empty(); }
};

ClassifyReport classify_map(const DoubleMap& m, const PlanarEmbedding& emb, double tol = 1e-9);
// Per quad: the largest of the side spread (max - min) / max, |cos| between the
// diagonals and the relative error of |y y'| / |x x'| against rho.  Zero on
// critical quads.
std::vector<double> quad_residuals(const DoubleMap& m, const PlanarEmbedding& emb);

// Lay quads out as rhombi of side delta with angle 2 arctan rho at primal
// corners, breadth first from quad 0.  Closing loops that disagree by a rotation
// mark a cone; on a closed flat surface the translations found give the periods.
struct Development {
  PlanarEmbedding emb;
  bool single_valued = true;        // every vertex received one position
  double rotation_defect = 0.0;     // largest mismatch that is not a translation
  std::vector<cplx> translations;
};
Development develop(const DoubleMap& m, double delta = 1.0);

// Lattice families.  Each returns the double with rho and lengths installed and
// the developed embedding (rhombus side 1).
struct Lattice {
  DoubleMap map;
  PlanarEmbedding emb;
  CellComplex primal;
};
// Builds the double, develops it and installs lengths; throws when the
// ratios are not flat.
Lattice lattice_from_complex(const CellComplex& g, const std::vector<double>& rho, bool torus);
// Square grid with horizontal edges rho_1/rho_3 and vertical edges rho_2/rho_4
// alternating in a checkerboard; needs sum arctan rho_i = pi.
Lattice rectangular_period2(const std::array<double, 4>& rho, int nx, int ny, bool torus);
// rho_1 = rho_3 = 1, vertical rhombi of angle alpha.
Lattice square_lattice(double alpha, int nx, int ny, bool torus);
// Triangular grid; rhombus angles alpha (horizontal), beta (vertical) and
// pi - alpha - beta (diagonal edges).
Lattice triangular_lattice(double alpha, double beta, int nx, int ny, bool torus);
// Axis-aligned diamond: an n x n grid of squares of side delta on [0, n delta]^2,
// primal vertices where i + j is even.
Lattice square_diamond(int n, double delta);

struct VoronoiResult {
  DoubleMap map;
  PlanarEmbedding emb;
  CellComplex delaunay;
  std::vector<std::array<int, 3>> triangles;     // before merging cocircular cells
  std::vector<std::array<int, 2>> merged_edges;  // diagonals dropped inside cocircular cells
};
VoronoiResult voronoi_delaunay(const std::vector<cplx>& points);

// Tile centring: each quad becomes four half-size quads around its centre.
// Old Lambda vertices keep their ids and, with the quad centres, form the new
// primal vertices; diamond edge midpoints become the new dual vertices.
struct Refined {
  DoubleMap map;
  PlanarEmbedding emb;
};
Refined refine(const DoubleMap& m, const PlanarEmbedding& emb);

// Embedding as a function on Lambda (planar maps).
Cochain coordinate(const DoubleMap& m, const PlanarEmbedding& emb);
double min_corner_angle(const std::array<cplx, 4>& c);
// Distance ratio |MM'| / (shortest path along the quad boundary), M and M' given
// by boundary arclength parameters in [0, 1).
double quad_path_ratio(const std::array<cplx, 4>& c, double s, double t);

struct ConvergenceLevel {
  double delta = 0.0;
  int vertices = 0;
  double error = 0.0;
};
struct ConvergenceReport {
  std::vector<ConvergenceLevel> levels;
  std::vector<double> ratios;
  double max_ratio = 0.0;
};
using FamilyBuilder = std::function<Eigen::VectorXcd(const DoubleMap&, const PlanarEmbedding&, int level)>;
// Refines levels - 1 times and compares the discrete function with the target
// on the vertices of the coarsest map.
ConvergenceReport convergence_test(const DoubleMap& m, const PlanarEmbedding& emb, int levels,
                                   const FamilyBuilder& build, const std::function<cplx(cplx)>& target,
                                   double eta = 1e-3);

// Ising couplings, K = asinh(rho) / 2.
double coupling_from_rho(double rho);
double rho_from_coupling(double K);
std::vector<double> couplings(const std::vector<double>& rho);
std::vector<double> rhos(const std::vector<double>& K);

struct ClosedFormCheck {
  int vertex = -1;
  std::string form;     // "square", "hexagonal", "triangular"
  double residual = 0.0;
};
struct IsingReport {
  std::vector<double> flatness;        // sum arctan rho - pi per interior vertex, NaN elsewhere
  double max_residual = 0.0;           // largest |flatness|
  int worst_vertex = -1;
  std::vector<ClosedFormCheck> closed_forms;
  double max_closed_form = 0.0;
  bool critical = false;
};
IsingReport ising_criticality(const DoubleMap& m, double tol = 1e-9);
// K given per primal edge.
IsingReport ising_criticality(const DoubleMap& m, const std::vector<double>& K, double tol = 1e-9);

}  // namespace discra
