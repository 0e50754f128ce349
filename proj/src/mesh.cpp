#include "discra/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace discra {

namespace {

int end_of(const CellComplex& g, SignedEdge s) { return s.sign > 0 ? g.edges[s.edge][1] : g.edges[s.edge][0]; }
int start_of(const CellComplex& g, SignedEdge s) { return s.sign > 0 ? g.edges[s.edge][0] : g.edges[s.edge][1]; }

std::string str(const std::string& a, long b) {
  std::ostringstream os;
  os << a << b;
  return os.str();
}

TopologyReport check_complex(const CellComplex& g, bool homology);

// Builds dedge incidences, rings and interior flags from quads/sides/kinds.
void finalize(DoubleMap& m) {
  const int Q = m.num_quads();
  const int N = m.num_vertices();
  int ndedge = 0;
  for (const Quad& q : m.quads)
    for (int s : q.side) ndedge = std::max(ndedge, s + 1);
  m.dedges.assign(ndedge, DiamondEdge{});
  for (int qi = 0; qi < Q; ++qi) {
    const Quad& q = m.quads[qi];
    for (int k = 0; k < 4; ++k) {
      if (q.v[k] < 0 || q.v[k] >= N) throw std::invalid_argument(str("quad vertex out of range in quad ", qi));
      Kind want = (k % 2 == 0) ? Kind::primal : Kind::dual;
      if (m.kind[q.v[k]] != want) throw std::invalid_argument(str("quad corners do not alternate primal/dual in quad ", qi));
    }
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b)
        if (q.v[a] == q.v[b]) throw std::invalid_argument(str("degenerate quad with repeated corner: ", qi));
    for (int k = 0; k < 4; ++k) {
      DiamondEdge& de = m.dedges[q.side[k]];
      int p = (k % 2 == 0) ? q.v[k] : q.v[(k + 1) % 4];
      int d = (k % 2 == 0) ? q.v[(k + 1) % 4] : q.v[k];
      if (de.p < 0) {
        de.p = p;
        de.d = d;
      } else if (de.p != p || de.d != d) {
        throw std::invalid_argument(str("diamond edge with inconsistent endpoints: ", q.side[k]));
      }
      int slot = (k % 2 == 0) ? 0 : 1;  // traversed p->d or d->p
      if (de.quads[slot] >= 0) throw std::invalid_argument(str("diamond edge traversed twice in the same direction (unoriented or non-manifold): ", q.side[k]));
      de.quads[slot] = qi;
    }
  }
  for (int s = 0; s < ndedge; ++s)
    if (m.dedges[s].p < 0) throw std::invalid_argument(str("unused diamond edge id: ", s));

  std::vector<std::vector<Corner>> corners(N);
  for (int qi = 0; qi < Q; ++qi)
    for (int k = 0; k < 4; ++k) corners[m.quads[qi].v[k]].push_back({qi, k});

  auto across = [&](Corner c, int side_k) -> Corner {
    const DiamondEdge& de = m.dedges[m.quads[c.quad].side[side_k]];
    int oq = de.quads[0] == c.quad ? de.quads[1] : de.quads[0];
    if (oq < 0) return {-1, -1};
    int v = m.quads[c.quad].v[c.k];
    for (int k = 0; k < 4; ++k)
      if (m.quads[oq].v[k] == v) return {oq, k};
    return {-1, -1};
  };

  m.rings.assign(N, {});
  m.is_interior.assign(N, 0);
  for (int v = 0; v < N; ++v) {
    if (corners[v].empty()) continue;
    Corner start = corners[v][0];
    Corner c = start;
    bool closed = false;
    // walk clockwise to find the first corner of an open fan
    for (std::size_t step = 0; step <= corners[v].size(); ++step) {
      Corner prev = across(c, c.k);
      if (prev.quad < 0) break;
      c = prev;
      if (c.quad == start.quad && c.k == start.k) {
        closed = true;
        break;
      }
    }
    std::vector<Corner> ring;
    Corner cur = closed ? start : c;
    for (std::size_t step = 0; step < corners[v].size(); ++step) {
      ring.push_back(cur);
      Corner nxt = across(cur, (cur.k + 3) % 4);
      if (nxt.quad < 0) break;
      if (nxt.quad == ring.front().quad && nxt.k == ring.front().k) break;
      cur = nxt;
    }
    if (ring.size() != corners[v].size())
      throw std::invalid_argument(str("non-manifold vertex (quad fan does not cover all corners): ", v));
    m.rings[v] = std::move(ring);
    m.is_interior[v] = closed ? 1 : 0;
  }
  std::vector<int> seen(2, 0);
  m.origin.assign(N, -1);
  for (int v = 0; v < N; ++v) m.origin[v] = seen[static_cast<int>(m.kind[v])]++;
}

}  // namespace

int DoubleMap::count(Kind k) const {
  return static_cast<int>(std::count(kind.begin(), kind.end(), k));
}

std::vector<int> DoubleMap::vertices_of(Kind k) const {
  std::vector<int> out;
  for (int v = 0; v < num_vertices(); ++v)
    if (kind[v] == k) out.push_back(v);
  return out;
}

bool DoubleMap::closed() const {
  for (char c : is_interior)
    if (!c) return false;
  return true;
}

std::vector<SignedEdge> DoubleMap::face_boundary(int v) const {
  std::vector<SignedEdge> out;
  const int Q = num_quads();
  for (const Corner& c : rings[v]) {
    switch (c.k) {
      case 0: out.push_back({c.quad + Q, +1}); break;
      case 1: out.push_back({c.quad, -1}); break;
      case 2: out.push_back({c.quad + Q, -1}); break;
      default: out.push_back({c.quad, +1}); break;
    }
  }
  return out;
}

std::vector<SignedEdge> DoubleMap::star(int v) const {
  std::vector<SignedEdge> out;
  for (const Corner& c : rings[v]) {
    int e = diagonal_at(c.quad, c.k);
    out.push_back({e, c.k < 2 ? +1 : -1});
  }
  return out;
}

DoubleMap from_quads(const std::vector<Kind>& kinds, const std::vector<std::array<int, 4>>& quads,
                     const std::vector<double>& rho_primal, const std::vector<std::array<int, 4>>& side_ids,
                     const std::vector<double>& lengths) {
  DoubleMap m;
  m.kind = kinds;
  const int Q = static_cast<int>(quads.size());
  if (static_cast<int>(rho_primal.size()) != Q) throw std::invalid_argument("rho must be given for every quad");
  if (!side_ids.empty() && static_cast<int>(side_ids.size()) != Q) throw std::invalid_argument("side ids must be given for every quad");
  m.quads.resize(Q);
  std::map<std::pair<int, int>, int> ids;
  for (int q = 0; q < Q; ++q) {
    m.quads[q].v = quads[q];
    for (int k = 0; k < 4; ++k) {
      if (!side_ids.empty()) {
        m.quads[q].side[k] = side_ids[q][k];
        continue;
      }
      int a = quads[q][k], b = quads[q][(k + 1) % 4];
      std::pair<int, int> key = (k % 2 == 0) ? std::make_pair(a, b) : std::make_pair(b, a);
      auto it = ids.find(key);
      if (it == ids.end()) it = ids.emplace(key, static_cast<int>(ids.size())).first;
      m.quads[q].side[k] = it->second;
    }
  }
  m.rho.resize(2 * Q);
  for (int q = 0; q < Q; ++q) {
    if (!(rho_primal[q] > 0.0) || !std::isfinite(rho_primal[q]))
      throw std::invalid_argument(str("rho must be positive on edge ", q));
    m.rho[q] = rho_primal[q];
    m.rho[q + Q] = 1.0 / rho_primal[q];
  }
  if (!lengths.empty()) {
    if (static_cast<int>(lengths.size()) != 2 * Q) throw std::invalid_argument("lengths must cover primal and dual edges");
    m.len = lengths;
  }
  finalize(m);
  return m;
}

DoubleMap build_double(const CellComplex& g, const std::vector<double>& rho, const std::vector<double>& lengths) {
  TopologyReport rep = check_complex(g, false);
  if (!rep.ok()) throw std::invalid_argument("invalid cell complex: " + rep.violations.front());
  const int nV = g.num_vertices;
  const int nE = static_cast<int>(g.edges.size());
  const int nF = static_cast<int>(g.faces.size());
  if (static_cast<int>(rho.size()) != nE) throw std::invalid_argument("rho missing on some edge");
  for (int e = 0; e < nE; ++e)
    if (!(rho[e] > 0.0) || !std::isfinite(rho[e])) throw std::invalid_argument(str("rho must be positive on edge ", e));

  // face position of each signed edge occurrence
  std::vector<std::array<int, 2>> fpos(nE, {-1, -1}), fidx(nE, {-1, -1});  // [0]: +e (left), [1]: -e (right)
  for (int f = 0; f < nF; ++f)
    for (int k = 0; k < static_cast<int>(g.faces[f].size()); ++k) {
      SignedEdge s = g.faces[f][k];
      int slot = s.sign > 0 ? 0 : 1;
      fidx[s.edge][slot] = f;
      fpos[s.edge][slot] = k;
    }
  // boundary cells, explicit then automatic half-edges
  std::vector<std::array<int, 2>> bidx(nE, {-1, -1});
  std::vector<BoundaryCell> bcells = g.boundary;
  for (int b = 0; b < static_cast<int>(bcells.size()); ++b)
    for (SignedEdge s : bcells[b].edges) bidx[s.edge][s.sign > 0 ? 0 : 1] = b;
  for (int e = 0; e < nE; ++e)
    for (int slot = 0; slot < 2; ++slot)
      if (fidx[e][slot] < 0 && bidx[e][slot] < 0) {
        bidx[e][slot] = static_cast<int>(bcells.size());
        bcells.push_back(BoundaryCell{{SignedEdge{e, slot == 0 ? 1 : -1}}});
      }
  const int nB = static_cast<int>(bcells.size());

  DoubleMap m;
  m.kind.assign(nV + nF + nB, Kind::dual);
  for (int v = 0; v < nV; ++v) m.kind[v] = Kind::primal;

  // corner ids: faces first, then boundary (cell, vertex) pairs
  std::vector<int> corner_base(nF + 1, 0);
  for (int f = 0; f < nF; ++f) corner_base[f + 1] = corner_base[f] + static_cast<int>(g.faces[f].size());
  int next_id = corner_base[nF];
  std::map<std::pair<int, int>, int> bside;
  auto boundary_side = [&](int b, int v) {
    auto key = std::make_pair(b, v);
    auto it = bside.find(key);
    if (it == bside.end()) it = bside.emplace(key, next_id++).first;
    return it->second;
  };
  auto corner = [&](int f, int k) {
    int n = static_cast<int>(g.faces[f].size());
    return corner_base[f] + ((k % n) + n) % n;
  };

  m.quads.resize(nE);
  for (int e = 0; e < nE; ++e) {
    int x = g.edges[e][0], xp = g.edges[e][1];
    Quad& q = m.quads[e];
    q.v[0] = x;
    q.v[2] = xp;
    if (fidx[e][1] >= 0) {
      int R = fidx[e][1], k = fpos[e][1];
      q.v[1] = nV + R;
      q.side[0] = corner(R, k);
      q.side[1] = corner(R, k - 1);
    } else {
      int b = bidx[e][1];
      q.v[1] = nV + nF + b;
      q.side[0] = boundary_side(b, x);
      q.side[1] = boundary_side(b, xp);
    }
    if (fidx[e][0] >= 0) {
      int L = fidx[e][0], k = fpos[e][0];
      q.v[3] = nV + L;
      q.side[2] = corner(L, k);
      q.side[3] = corner(L, k - 1);
    } else {
      int b = bidx[e][0];
      q.v[3] = nV + nF + b;
      q.side[2] = boundary_side(b, xp);
      q.side[3] = boundary_side(b, x);
    }
  }
  m.rho.resize(2 * nE);
  for (int e = 0; e < nE; ++e) {
    m.rho[e] = rho[e];
    m.rho[e + nE] = 1.0 / rho[e];
  }
  if (!lengths.empty()) {
    if (static_cast<int>(lengths.size()) != 2 * nE) throw std::invalid_argument("lengths must cover primal and dual edges");
    m.len = lengths;
  }
  finalize(m);
  return m;
}

CellComplex extract(const DoubleMap& m, Kind k) {
  CellComplex g;
  const int Q = m.num_quads();
  std::vector<int> local(m.num_vertices(), -1);
  for (int v = 0; v < m.num_vertices(); ++v)
    if (m.kind[v] == k) local[v] = g.num_vertices++;
  const int base = (k == Kind::primal) ? 0 : Q;
  g.edges.resize(Q);
  for (int q = 0; q < Q; ++q) g.edges[q] = {local[m.tail(base + q)], local[m.head(base + q)]};
  for (int v = 0; v < m.num_vertices(); ++v) {
    if (m.kind[v] == k) continue;
    if (m.interior(v)) {
      std::vector<SignedEdge> cyc;
      for (SignedEdge s : m.face_boundary(v)) cyc.push_back({s.edge - base, s.sign});
      g.faces.push_back(std::move(cyc));
    } else {
      BoundaryCell b;
      for (const Corner& c : m.rings[v]) {
        // side of the diagonal this corner sits on
        int sgn = 0;
        if (k == Kind::primal) sgn = (c.k == 1) ? -1 : +1;   // y is right of e, y' left
        else sgn = (c.k == 0) ? +1 : -1;                      // x is left of e*, x' right
        b.edges.push_back({c.quad, sgn});
      }
      g.boundary.push_back(std::move(b));
    }
  }
  return g;
}

CellComplex build_dual(const CellComplex& g) {
  std::vector<double> ones(g.edges.size(), 1.0);
  return extract(build_double(g, ones), Kind::dual);
}

DoubleMap with_rho(const DoubleMap& m, const std::vector<double>& rho_primal) {
  const int Q = m.num_quads();
  if (static_cast<int>(rho_primal.size()) != Q) throw std::invalid_argument("rho missing on some edge");
  DoubleMap out = m;
  out.modulus = 1.0;
  out.len.clear();
  for (int q = 0; q < Q; ++q) {
    if (!(rho_primal[q] > 0.0) || !std::isfinite(rho_primal[q])) throw std::invalid_argument(str("rho must be positive on edge ", q));
    out.rho[q] = rho_primal[q];
    out.rho[q + Q] = 1.0 / rho_primal[q];
  }
  return out;
}

DoubleMap with_massive_rho(const DoubleMap& m, const std::vector<double>& rho_all, double k) {
  if (static_cast<int>(rho_all.size()) != m.num_edges()) throw std::invalid_argument("rho missing on some edge");
  if (!(k > 0.0 && k <= 1.0)) throw std::invalid_argument("modulus must lie in (0, 1]");
  DoubleMap out = m;
  out.rho = rho_all;
  out.modulus = k;
  out.len.clear();
  for (int e = 0; e < m.num_edges(); ++e)
    if (!(rho_all[e] > 0.0)) throw std::invalid_argument(str("rho must be positive on edge ", e));
  return out;
}

namespace {

// Rank over GF(2) of the face-edge incidence matrix.
int gf2_rank(int ncols, const std::vector<std::vector<int>>& rows) {
  const int W = (ncols + 63) / 64;
  std::vector<std::vector<std::uint64_t>> mat;
  for (const auto& r : rows) {
    std::vector<std::uint64_t> bits(W, 0);
    for (int c : r) bits[c / 64] ^= (std::uint64_t{1} << (c % 64));
    mat.push_back(std::move(bits));
  }
  int rank = 0;
  for (int col = 0; col < ncols && rank < static_cast<int>(mat.size()); ++col) {
    int piv = -1;
    for (int r = rank; r < static_cast<int>(mat.size()); ++r)
      if (mat[r][col / 64] >> (col % 64) & 1u) { piv = r; break; }
    if (piv < 0) continue;
    std::swap(mat[piv], mat[rank]);
    for (int r = 0; r < static_cast<int>(mat.size()); ++r)
      if (r != rank && (mat[r][col / 64] >> (col % 64) & 1u))
        for (int w = 0; w < W; ++w) mat[r][w] ^= mat[rank][w];
    ++rank;
  }
  return rank;
}

int components(int n, const std::vector<std::array<int, 2>>& edges) {
  std::vector<int> parent(n);
  for (int i = 0; i < n; ++i) parent[i] = i;
  auto find = [&](int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  int c = n;
  for (auto e : edges) {
    int a = find(e[0]), b = find(e[1]);
    if (a != b) { parent[a] = b; --c; }
  }
  return c;
}

}  // namespace

namespace {

TopologyReport check_complex(const CellComplex& g, bool homology) {
  TopologyReport r;
  const int nV = g.num_vertices, nE = static_cast<int>(g.edges.size()), nF = static_cast<int>(g.faces.size());
  r.vertices = nV;
  r.edges = nE;
  r.faces = nF;
  bool indices_ok = true;
  for (int e = 0; e < nE; ++e)
    for (int s = 0; s < 2; ++s)
      if (g.edges[e][s] < 0 || g.edges[e][s] >= nV) {
        r.violations.push_back(str("edge endpoint out of range on edge ", e));
        indices_ok = false;
      }
  std::vector<std::array<int, 2>> use(nE, {0, 0});
  for (int f = 0; f < nF; ++f) {
    const auto& cyc = g.faces[f];
    if (cyc.empty()) {
      r.violations.push_back(str("empty face ", f));
      continue;
    }
    bool ok = true;
    for (SignedEdge s : cyc)
      if (s.edge < 0 || s.edge >= nE || (s.sign != 1 && s.sign != -1)) ok = false;
    if (!ok || !indices_ok) {
      r.violations.push_back(str("dangling edge reference in face ", f));
      continue;
    }
    for (std::size_t k = 0; k < cyc.size(); ++k) {
      if (end_of(g, cyc[k]) != start_of(g, cyc[(k + 1) % cyc.size()])) {
        r.violations.push_back(str("\xe2\x88\x82\xe2\x88\x82 \xe2\x89\xa0 0: boundary of face is not a closed cycle, face ", f));
        break;
      }
    }
    for (SignedEdge s : cyc) use[s.edge][s.sign > 0 ? 0 : 1]++;
  }
  for (int e = 0; e < nE; ++e) {
    if (use[e][0] > 1 || use[e][1] > 1)
      r.violations.push_back(str("edge used twice with the same orientation (unoriented or non-manifold): ", e));
  }
  for (std::size_t b = 0; b < g.boundary.size(); ++b)
    for (SignedEdge s : g.boundary[b].edges) {
      if (s.edge < 0 || s.edge >= nE) {
        r.violations.push_back(str("dangling edge reference in boundary cell ", static_cast<long>(b)));
        continue;
      }
      if (use[s.edge][s.sign > 0 ? 0 : 1] > 0)
        r.violations.push_back(str("boundary cell on a side already bounded by a face, edge ", s.edge));
    }
  if (!r.ok()) return r;

  r.euler = nV - nE + nF;
  std::vector<std::array<int, 2>> bedges;
  int one_sided = 0;
  for (int e = 0; e < nE; ++e)
    if (use[e][0] + use[e][1] < 2) {
      ++one_sided;
      bedges.push_back(g.edges[e]);
    }
  r.closed = (one_sided == 0);
  r.connected = components(nV, g.edges) == 1;
  if (!r.closed) {
    // boundary components = connected components of the one-sided edge graph
    std::vector<int> touched(nV, 0);
    for (auto e : bedges) touched[e[0]] = touched[e[1]] = 1;
    int iso = 0;
    for (int v = 0; v < nV; ++v) iso += touched[v] ? 0 : 1;
    r.boundary_components = components(nV, bedges) - iso;
  }
  r.genus = (2 - r.euler - r.boundary_components) / 2;
  if (homology && r.closed && r.connected && nE <= 4000) {
    std::vector<std::vector<int>> rows;
    for (const auto& cyc : g.faces) {
      std::vector<int> row;
      for (SignedEdge s : cyc) row.push_back(s.edge);
      rows.push_back(row);
    }
    int cyc_rank = nE - nV + 1;
    r.genus_homology = (cyc_rank - gf2_rank(nE, rows)) / 2;
    if (r.genus_homology != r.genus) r.violations.push_back("genus from Euler characteristic disagrees with cycle-space rank");
  }
  return r;
}

}  // namespace

TopologyReport validate(const CellComplex& g) { return check_complex(g, true); }

TopologyReport validate(const DoubleMap& m) {
  TopologyReport r;
  const int N = m.num_vertices(), Q = m.num_quads(), S = m.num_dedges();
  r.vertices = N;
  r.edges = S;
  r.faces = Q;
  r.euler = N - S + Q;
  for (int q = 0; q < Q; ++q)
    for (int k = 0; k < 4; ++k)
      if (m.kind[m.quads[q].v[k]] != ((k % 2 == 0) ? Kind::primal : Kind::dual))
        r.violations.push_back(str("quad corners do not alternate, quad ", q));
  for (int e = 0; e < m.num_edges(); ++e) {
    if (!(m.rho[e] > 0.0)) r.violations.push_back(str("non-positive rho on edge ", e));
  }
  for (int q = 0; q < Q; ++q) {
    double prod = m.rho[q] * m.rho[q + Q] * m.modulus;
    if (std::abs(prod - 1.0) > 1e-9) r.violations.push_back(str("rho(e) rho(e*) differs from 1/k on edge ", q));
    if (m.has_lengths()) {
      double want = m.len[q + Q] / m.len[q];
      if (std::abs(want - m.rho[q]) > 1e-9 * (1.0 + m.rho[q])) r.violations.push_back(str("rho disagrees with length ratio on edge ", q));
    }
  }
  std::vector<std::array<int, 2>> dlinks, blinks;
  for (int s = 0; s < S; ++s) {
    const DiamondEdge& de = m.dedges[s];
    dlinks.push_back({de.p, de.d});
    if (de.quads[0] < 0 || de.quads[1] < 0) blinks.push_back({de.p, de.d});
    if (m.kind[de.p] != Kind::primal || m.kind[de.d] != Kind::dual)
      r.violations.push_back(str("diamond edge does not join primal to dual: ", s));
  }
  r.connected = components(N, dlinks) == 1;
  r.closed = blinks.empty();
  if (!r.closed) {
    std::vector<int> touched(N, 0);
    for (auto e : blinks) touched[e[0]] = touched[e[1]] = 1;
    int iso = 0;
    for (int v = 0; v < N; ++v) iso += touched[v] ? 0 : 1;
    r.boundary_components = components(N, blinks) - iso;
  }
  r.genus = (2 - r.euler - r.boundary_components) / 2;
  if (r.closed && r.connected && Q <= 4000) {
    CellComplex g = extract(m, Kind::primal);
    TopologyReport gr = validate(g);
    r.genus_homology = gr.genus_homology;
    if (gr.genus_homology >= 0 && gr.genus_homology != r.genus)
      r.violations.push_back("genus from Euler characteristic disagrees with cycle-space rank");
  }
  return r;
}

TripleGraph build_triple(const DoubleMap& m) {
  TripleGraph t;
  const int Q = m.num_quads();
  t.num_vertices = m.num_dedges();
  t.edges.resize(4 * Q);
  t.cut.resize(4 * Q);
  for (int q = 0; q < Q; ++q) {
    const Quad& qd = m.quads[q];
    for (int k = 0; k < 4; ++k) {
      t.edges[4 * q + k] = {qd.side[(k + 3) % 4], qd.side[k]};
      t.cut[4 * q + k] = m.diagonal_at(q, k);
    }
    t.faces.push_back({{4 * q + 1, 1}, {4 * q + 2, 1}, {4 * q + 3, 1}, {4 * q + 0, 1}});
    t.face_vertex.push_back(-1);
  }
  t.num_quad_faces = Q;
  for (int v = 0; v < m.num_vertices(); ++v) {
    if (!m.interior(v)) continue;
    std::vector<SignedEdge> cyc;
    for (const Corner& c : m.rings[v]) cyc.push_back({4 * c.quad + c.k, -1});
    t.faces.push_back(std::move(cyc));
    t.face_vertex.push_back(v);
  }
  return t;
}

CellComplex square_grid(int nx, int ny, bool torus) {
  if (nx < (torus ? 2 : 1) || ny < (torus ? 2 : 1)) throw std::invalid_argument("grid too small");
  CellComplex g;
  const int vx = torus ? nx : nx + 1, vy = torus ? ny : ny + 1;
  auto vid = [&](int i, int j) { return ((i % vx) + vx) % vx + vx * (((j % vy) + vy) % vy); };
  g.num_vertices = vx * vy;
  // horizontal edges h(i,j) for i < nx, j < vy; vertical v(i,j) for i < vx, j < ny
  auto hid = [&](int i, int j) { return (torus ? ((i % nx) + nx) % nx : i) + nx * (torus ? ((j % ny) + ny) % ny : j); };
  const int nh = nx * vy;
  auto vvid = [&](int i, int j) { return nh + (torus ? ((i % nx) + nx) % nx : i) + vx * (torus ? ((j % ny) + ny) % ny : j); };
  g.edges.resize(nh + vx * ny);
  for (int j = 0; j < vy; ++j)
    for (int i = 0; i < nx; ++i) g.edges[hid(i, j)] = {vid(i, j), vid(i + 1, j)};
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < vx; ++i) g.edges[vvid(i, j)] = {vid(i, j), vid(i, j + 1)};
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      g.faces.push_back({{hid(i, j), 1}, {vvid(i + 1, j), 1}, {hid(i, j + 1), -1}, {vvid(i, j), -1}});
  return g;
}

CellComplex triangular_grid(int nx, int ny, bool torus) {
  CellComplex g = square_grid(nx, ny, torus);
  const int vx = torus ? nx : nx + 1, vy = torus ? ny : ny + 1;
  auto vid = [&](int i, int j) { return ((i % vx) + vx) % vx + vx * (((j % vy) + vy) % vy); };
  const int nh = nx * vy;
  auto hid = [&](int i, int j) { return (torus ? ((i % nx) + nx) % nx : i) + nx * (torus ? ((j % ny) + ny) % ny : j); };
  auto vvid = [&](int i, int j) { return nh + (torus ? ((i % nx) + nx) % nx : i) + vx * (torus ? ((j % ny) + ny) % ny : j); };
  g.faces.clear();
  // diagonal d(i,j): (i+1, j) -> (i, j+1)
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      int d = static_cast<int>(g.edges.size());
      g.edges.push_back({vid(i + 1, j), vid(i, j + 1)});
      g.faces.push_back({{hid(i, j), 1}, {d, 1}, {vvid(i, j), -1}});
      g.faces.push_back({{vvid(i + 1, j), 1}, {hid(i, j + 1), -1}, {d, -1}});
    }
  return g;
}

CellComplex cube_surface() {
  const std::vector<std::vector<int>> cycles = {{0, 2, 3, 1}, {4, 5, 7, 6}, {0, 1, 5, 4},
                                                {2, 6, 7, 3}, {0, 4, 6, 2}, {1, 3, 7, 5}};
  CellComplex g;
  g.num_vertices = 8;
  std::map<std::pair<int, int>, int> ids;
  for (const auto& cyc : cycles) {
    std::vector<SignedEdge> face;
    for (std::size_t k = 0; k < cyc.size(); ++k) {
      int a = cyc[k], b = cyc[(k + 1) % cyc.size()];
      auto it = ids.find({b, a});
      if (it != ids.end()) {
        face.push_back({it->second, -1});
      } else {
        int id = static_cast<int>(g.edges.size());
        ids[{a, b}] = id;
        g.edges.push_back({a, b});
        face.push_back({id, 1});
      }
    }
    g.faces.push_back(std::move(face));
  }
  return g;
}

}  // namespace discra
