#pragma once

#include <cmath>
#include <random>
#include <string>

#include "discra/forms.hpp"
#include "discra/mesh.hpp"

namespace fixtures {

using discra::CellComplex;
using discra::DoubleMap;

// Square grid split by a random diagonal in every cell.
inline CellComplex random_triangulation(int nx, int ny, bool torus, std::mt19937_64& rng) {
  CellComplex sq = discra::square_grid(nx, ny, torus);
  CellComplex g;
  g.num_vertices = sq.num_vertices;
  g.edges = sq.edges;
  std::bernoulli_distribution coin(0.5);
  for (const auto& f : sq.faces) {
    // f = h(i,j)+, v(i+1,j)+, h(i,j+1)-, v(i,j)-, corners c0..c3 counterclockwise
    auto start = [&](discra::SignedEdge s) { return s.sign > 0 ? g.edges[s.edge][0] : g.edges[s.edge][1]; };
    int c0 = start(f[0]), c1 = start(f[1]), c2 = start(f[2]), c3 = start(f[3]);
    int d = static_cast<int>(g.edges.size());
    if (coin(rng)) {
      g.edges.push_back({c0, c2});
      g.faces.push_back({f[0], f[1], {d, -1}});
      g.faces.push_back({{d, 1}, f[2], f[3]});
    } else {
      g.edges.push_back({c1, c3});
      g.faces.push_back({f[0], {d, 1}, f[3]});
      g.faces.push_back({f[1], f[2], {d, -1}});
    }
  }
  return g;
}

struct RandomMap {
  DoubleMap map;
  std::string label;
};

// Small double maps of assorted shape with rho drawn from [0.2, 5].
inline RandomMap random_double_map(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, 5), size(2, 4);
  std::uniform_real_distribution<double> logr(std::log(0.2), std::log(5.0));
  CellComplex g;
  std::string label;
  int nx = size(rng), ny = size(rng);
  switch (pick(rng)) {
    case 0: g = discra::square_grid(nx, ny, true); label = "square torus"; break;
    case 1: g = discra::triangular_grid(nx, ny, true); label = "triangular torus"; break;
    case 2: g = discra::square_grid(nx, ny, false); label = "square patch"; break;
    case 3: g = random_triangulation(nx, ny, true, rng); label = "random triangulated torus"; break;
    case 4: g = random_triangulation(nx, ny, false, rng); label = "random triangulated patch"; break;
    default: g = discra::cube_surface(); label = "cube"; break;
  }
  std::vector<double> rho(g.edges.size());
  for (double& r : rho) r = std::exp(logr(rng));
  return {discra::build_double(g, rho), label + " " + std::to_string(nx) + "x" + std::to_string(ny)};
}

inline int lambda_cells(const DoubleMap& m) {
  int faces = 0;
  for (int v = 0; v < m.num_vertices(); ++v) faces += m.interior(v) ? 1 : 0;
  return m.num_vertices() + m.num_edges() + faces;
}

inline discra::Cochain random_cochain(const DoubleMap& m, int degree, discra::Carrier c, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  discra::Cochain out = discra::zeros(m, degree, c);
  for (int i = 0; i < out.v.size(); ++i) out.v[i] = discra::cplx(n(rng), n(rng));
  if (degree == 2 && c == discra::Carrier::lambda)
    for (int v = 0; v < m.num_vertices(); ++v)
      if (!m.interior(v)) out.v[v] = 0.0;
  return out;
}

// Flat coordinate on the double of square_grid(nx, ny, false) with unit steps: primal
// vertices on the integer grid, faces at cell centres, boundary cells mirrored outside.
inline discra::Cochain square_patch_z(const DoubleMap& m, int nx, int /*ny*/) {
  using discra::cplx;
  discra::Cochain z = discra::zeros(m, 0, discra::Carrier::lambda);
  const int nV = m.count(discra::Kind::primal);
  for (int v = 0; v < nV; ++v) z.v[v] = cplx(v % (nx + 1), v / (nx + 1));
  for (int q = 0; q < m.num_quads(); ++q) {
    const auto& Qd = m.quads[q];
    cplx a = z.v[Qd.v[0]], b = z.v[Qd.v[2]];
    cplx mid = 0.5 * (a + b), half = 0.5 * cplx(0, 1) * (b - a);
    z.v[Qd.v[1]] = mid - half;
    z.v[Qd.v[3]] = mid + half;
  }
  return z;
}

}  // namespace fixtures
