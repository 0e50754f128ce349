#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace discra {

using cplx = std::complex<double>;

enum class Kind : std::uint8_t { primal = 0, dual = 1 };

inline Kind other(Kind k) { return k == Kind::primal ? Kind::dual : Kind::primal; }
inline const char* kind_name(Kind k) { return k == Kind::primal ? "primal" : "dual"; }

struct SignedEdge {
  int edge = -1;
  int sign = 1;
};

// A dangling dual vertex. Each entry names an edge and the side of that edge
// the vertex sits on: +1 where the left face would be, -1 for the right one.
struct BoundaryCell {
  std::vector<SignedEdge> edges;
};

struct CellComplex {
  int num_vertices = 0;
  std::vector<std::array<int, 2>> edges;            // tail, head
  std::vector<std::vector<SignedEdge>> faces;       // CCW boundary cycles
  std::vector<BoundaryCell> boundary;
};

// Quad (x, y, x', y'), counterclockwise; side[k] joins v[k] and v[k+1].
struct Quad {
  std::array<int, 4> v{};
  std::array<int, 4> side{};
};

// Diamond edge, canonically oriented from its primal to its dual end.
struct DiamondEdge {
  int p = -1;
  int d = -1;
  std::array<int, 2> quads{-1, -1};
};

struct Corner {
  int quad = -1;
  int k = -1;
};

// The double Lambda = Gamma u Gamma* together with its diamond.
//
// Lambda-edge numbering: edge q is the primal diagonal (x -> x') of quad q and
// edge Q + q its dual diagonal (y -> y').  Lambda_2 is indexed by vertices: the
// face v* exists when v is interior (its ring of quads closes).
struct DoubleMap {
  std::vector<Kind> kind;
  std::vector<char> is_interior;
  std::vector<std::vector<Corner>> rings;   // counterclockwise
  std::vector<int> origin;                  // index among vertices of its own kind
  std::vector<Quad> quads;
  std::vector<DiamondEdge> dedges;
  std::vector<double> rho;                  // per Lambda-edge
  std::vector<double> len;                  // per Lambda-edge, empty when absent
  double modulus = 1.0;                     // rho(a) rho(a*) = 1 / modulus

  int num_vertices() const { return static_cast<int>(kind.size()); }
  int num_quads() const { return static_cast<int>(quads.size()); }
  int num_edges() const { return 2 * num_quads(); }
  int num_dedges() const { return static_cast<int>(dedges.size()); }
  bool interior(int v) const { return is_interior[v] != 0; }

  int quad_of(int e) const { return e < num_quads() ? e : e - num_quads(); }
  int partner(int e) const { return e < num_quads() ? e + num_quads() : e - num_quads(); }
  Kind edge_kind(int e) const { return e < num_quads() ? Kind::primal : Kind::dual; }
  int tail(int e) const {
    const Quad& q = quads[quad_of(e)];
    return e < num_quads() ? q.v[0] : q.v[1];
  }
  int head(int e) const {
    const Quad& q = quads[quad_of(e)];
    return e < num_quads() ? q.v[2] : q.v[3];
  }
  bool has_lengths() const { return !len.empty(); }
  int count(Kind k) const;
  std::vector<int> vertices_of(Kind k) const;
  bool closed() const;

  // Lambda-edge through corner k of quad q (the diagonal incident to it).
  int diagonal_at(int q, int k) const { return (k % 2 == 0) ? q : q + num_quads(); }
  // d-edge orientation relative to the CCW traversal of quad q at side k.
  int side_sign(int /*q*/, int k) const { return (k % 2 == 0) ? 1 : -1; }

  // Oriented boundary of the Lambda-face v* (v interior).
  std::vector<SignedEdge> face_boundary(int v) const;
  // Lambda-edges incident to v with +1 when v is the tail.
  std::vector<SignedEdge> star(int v) const;
};

struct TopologyReport {
  int euler = 0;
  int genus = 0;
  int genus_homology = -1;        // from the GF(2) cycle space of Gamma, closed case
  int boundary_components = 0;
  bool connected = false;
  bool closed = false;
  int vertices = 0, edges = 0, faces = 0;
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

struct TripleGraph {
  int num_vertices = 0;                       // one per diamond edge
  std::vector<std::array<int, 2>> edges;      // edge 4q+k: side(k-1) -> side(k)
  std::vector<int> cut;                       // Lambda-edge crossed by each edge
  std::vector<std::vector<SignedEdge>> faces; // quad faces, then interior-vertex faces
  std::vector<int> face_vertex;               // -1 for quad faces, else Lambda vertex
  int num_quad_faces = 0;
};

CellComplex build_dual(const CellComplex& g);
DoubleMap build_double(const CellComplex& g, const std::vector<double>& rho,
                       const std::vector<double>& lengths = {});
// Quads listed as (x, y, x', y').  Without explicit side ids, diamond edges are
// identified by their vertex pair.
DoubleMap from_quads(const std::vector<Kind>& kinds, const std::vector<std::array<int, 4>>& quads,
                     const std::vector<double>& rho_primal,
                     const std::vector<std::array<int, 4>>& side_ids = {},
                     const std::vector<double>& lengths = {});
// Gamma (primal) or Gamma* (dual) as a standalone complex.
CellComplex extract(const DoubleMap& m, Kind k);
DoubleMap with_rho(const DoubleMap& m, const std::vector<double>& rho_primal);
// Independent ratios on both diagonals, rho(a) rho(a*) = 1/k.
DoubleMap with_massive_rho(const DoubleMap& m, const std::vector<double>& rho_all, double k);

TopologyReport validate(const CellComplex& g);
TopologyReport validate(const DoubleMap& m);
TripleGraph build_triple(const DoubleMap& m);

// Combinatorial builders.
CellComplex square_grid(int nx, int ny, bool torus);
CellComplex triangular_grid(int nx, int ny, bool torus);
CellComplex cube_surface();

}  // namespace discra
