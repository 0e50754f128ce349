#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "discra/critical.hpp"
#include "discra/forms.hpp"
#include "discra/mesh.hpp"

namespace discra {

// Double cover of the triple graph.  Each Upsilon-edge either keeps the sheet
// (flip 0) or swaps it (flip 1); the cover is a spin structure when every face
// boundary has an odd number of flips, i.e. lifts to one connected 2n-cycle.
struct SpinStructure {
  TripleGraph base;
  std::vector<std::uint8_t> flip;   // per Upsilon-edge
  std::vector<int> tree;            // maximal tree of Upsilon (edge ids)
  std::vector<int> extra;           // edges outside tree and cotree, one per basis cycle
  std::vector<int> mu;              // value (0/1) on each basis cycle
  int genus = 0;                    // closed case; extra.size() = 2 genus
  bool closed = true;

  int num_basis() const { return static_cast<int>(extra.size()); }
};

// Tree/cotree decomposition of Upsilon: a BFS maximal tree, a dual spanning tree
// of the remaining edges (rooted at the outer face when Upsilon has boundary)
// and the leftover edges.
struct TreeCotree {
  std::vector<int> tree, cotree, extra;
  bool closed = true;
};
TreeCotree tree_cotree(const TripleGraph& t);

// Flips are 0 on the tree, mu on the extra edges, and the cotree is peeled from
// its leaves so that each face gets an odd count.  Throws when mu does not match
// the number of basis cycles or when the last face comes out even.
SpinStructure build_spin_structure(const TripleGraph& t, const std::vector<int>& mu);
SpinStructure build_spin_structure(const DoubleMap& m, const std::vector<int>& mu);
std::vector<SpinStructure> enumerate_spin_structures(const DoubleMap& m);

int face_flip_parity(const SpinStructure& s, int face);
// Length of the lift of a face boundary started on sheet 0 (2n when non-trivial).
int lifted_cycle_length(const SpinStructure& s, int face);
// Two covers are isomorphic when their flips differ by a coboundary: b = a + dg.
// Returns g (0/1 per Upsilon vertex, g = 0 at vertex 0) or nothing.
std::optional<std::vector<int>> gauge_between(const SpinStructure& a, const SpinStructure& b);
bool isomorphic(const SpinStructure& a, const SpinStructure& b);
// Sum of flips along a closed Upsilon path given as signed edges.
int holonomy(const SpinStructure& s, const std::vector<SignedEdge>& cycle);

// Complex values on the vertices of the cover, index 2 xi + sheet.
struct Spinor {
  std::vector<cplx> v;

  int size() const { return static_cast<int>(v.size() / 2); }
  cplx at(int xi, int sheet) const { return v[2 * xi + sheet]; }
  static Spinor from_upper(const std::vector<cplx>& upper);   // sheet 1 set to minus sheet 0
  // The same function seen on an isomorphic cover: sheets swapped where g = 1.
  Spinor regauged(const std::vector<int>& g) const;
};

// Largest |zeta(xi-) + zeta(xi+)|, scaled by max |zeta|.
double equivariance_defect(const Spinor& z);

// Half angle of each Upsilon-edge in its stored orientation (positive around the
// quad): phi / 2 at the corner it turns around.
struct HalfAngleSystem {
  std::vector<double> theta;
};
HalfAngleSystem half_angles(const DoubleMap& m, const AngleSystem& angles);

// Values along the lift of quad q's diamond face, xi_1 .. xi_4 = side 3, 0, 1, 2,
// walked twice from xi_1 on sheet 0.  The step xi_j -> xi_j+1 is the edge turning
// around corner j - 1.
std::array<cplx, 8> face_lift(const DoubleMap& m, const SpinStructure& s, const Spinor& z, int q);

struct DiracResidual {
  double symmetry = 0.0;
  double dotsenko = 0.0;
  int worst_symmetry = -1;     // quad
  int worst_dotsenko = -1;
};
// Both equations at the four rotations of every diamond face lift.  Throws
// std::invalid_argument("malformed spinor: ...") on non-equivariant input.
DiracResidual dirac_residual(const DoubleMap& m, const SpinStructure& s, const Spinor& z);

// Continue a pair of values around a diamond with rho(a) then rho(a*) using
// only the Dotsenko relation; entries 4 and 5 come back as minus entries 0 and 1.
std::array<cplx, 6> dotsenko_orbit(double rho_a, double rho_dual, cplx z1, cplx z2);

struct DiracConstruction {
  bool ok = false;
  Spinor spinor;
  SpinStructure spin;
  HalfAngleSystem theta;
  std::vector<int> witness_cycle;     // Upsilon-edges of a loop with non-sign holonomy
  int witness_vertex = -1;            // Lambda vertex whose face lifts trivially
  int witness_quad = -1;              // rhombus with phi(a) + phi(a*) != pi
  double max_phase_mismatch = 0.0;    // over non-tree edges, distance to +-1
  std::string reason;
};
// zeta = exp(i sum theta) along tree paths of Upsilon from base, zeta(base+) = 1.
// Closing edges must carry holonomy +-1 (which sets the flips) and the flips must
// be odd around every face.
DiracConstruction construct_dirac_spinor(const DoubleMap& m, const AngleSystem& angles, int base = 0,
                                         double tol = 1e-9);

// Existence test from rho alone: e^{i phi(a)/2} = (rho(a*) + i) / sqrt(1 + rho(a*)^2).
struct DiracExistence {
  bool exists = false;
  DiracConstruction construction;
  std::vector<double> phi;                 // per Lambda-edge
  std::vector<double> vertex_phase_error;  // |exp(i sum phi/2) + 1| per interior vertex, NaN elsewhere
  double max_rhombus_error = 0.0;          // |phi(a) + phi(a*) - pi|
  int witness_vertex = -1;
  std::string reason;
};
DiracExistence dirac_exists(const DoubleMap& m, int base = 0, double tol = 1e-9);

// Dotsenko solutions on a cover, as a basis of the null space of the Dotsenko
// equations (columns hold sheet-0 values).
Eigen::MatrixXcd dotsenko_space(const DoubleMap& m, const SpinStructure& s, double tol = 1e-10);

struct SpinorForm {
  Cochain form;                 // on Lambda
  bool predicted_closed = false;
  bool predicted_holomorphic = false;
  bool closed = false;
  bool holomorphic = false;
  double closed_residual = 0.0;  // max |d form| over faces
  double type_residual = 0.0;    // max |*form + i form|
  std::array<bool, 2> symmetric{}, dotsenko{};
};
// 2 int_a d zeta zeta' = F(xi3) - F(xi2) + F(xi4) - F(xi1), F = zeta zeta'.
SpinorForm spinor_form(const DoubleMap& m, const SpinStructure& s, const Spinor& z, const Spinor& w,
                       double tol = 1e-9);
// Ratio form / dZ per Lambda-edge, dZ taken from the embedding.  With
// `conjugate` the reference is d(eps conj Z): conj dZ on primal edges and
// -conj dZ on dual ones, which is holomorphic on critical maps as well.
std::vector<cplx> ratio_to_dZ(const DoubleMap& m, const PlanarEmbedding& emb, const Cochain& form,
                              bool conjugate = false);

// Massive layer.
struct MassiveParams {
  double k = 1.0;
  double kp = 0.0;     // k^2 + kp^2 = 1
  double I = 0.0;      // complete integral for kp
  static MassiveParams from_modulus(double k);
};
// u = int_0^{phi/2} dt / sqrt(1 - kp^2 sin^2 t), Gauss-Kronrod adaptive.
double elliptic_half_angle(double phi, double k);
// Same integral by descending Landen / AGM iteration.
double elliptic_half_angle_agm(double phi, double k);
double complete_I(double kp);

struct MassiveReport {
  MassiveParams params;
  bool precondition_ok = true;
  double max_modulus_error = 0.0;     // relative |rho(a) rho(a*) k - 1|
  int offending_quad = -1;
  std::vector<double> u;              // per Lambda-edge
  std::vector<double> face_residual;  // per Lambda vertex (face v*), NaN off the interior
  std::vector<double> vertex_residual;
  double max_face = 0.0, max_vertex = 0.0;
  bool flat = false;
};
MassiveReport massive_flatness(const DoubleMap& m, double k, double tol = 1e-9);

}  // namespace discra
