#include "discra/dirac.hpp"

#include <Eigen/SVD>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace discra {

namespace {

constexpr double kPi = std::numbers::pi;

struct Adj {
  int to;
  int edge;
  int dir;   // +1 when walking the edge in its stored orientation
};

std::vector<std::vector<Adj>> adjacency(const TripleGraph& t) {
  std::vector<std::vector<Adj>> adj(t.num_vertices);
  for (int e = 0; e < static_cast<int>(t.edges.size()); ++e) {
    adj[t.edges[e][0]].push_back({t.edges[e][1], e, 1});
    adj[t.edges[e][1]].push_back({t.edges[e][0], e, -1});
  }
  return adj;
}

int start_of(const TripleGraph& t, SignedEdge s) { return s.sign > 0 ? t.edges[s.edge][0] : t.edges[s.edge][1]; }

double reduce_centered(double x, double period) {
  // into [-period/2, period/2)
  double r = std::fmod(x + 0.5 * period, period);
  if (r < 0) r += period;
  return r - 0.5 * period;
}

}  // namespace

TreeCotree tree_cotree(const TripleGraph& t) {
  TreeCotree tc;
  const int V = t.num_vertices, E = static_cast<int>(t.edges.size()), F = static_cast<int>(t.faces.size());
  if (V == 0) throw std::invalid_argument("empty triple graph");
  auto adj = adjacency(t);
  std::vector<char> in_tree(E, 0), seen(V, 0);
  std::deque<int> queue{0};
  seen[0] = 1;
  while (!queue.empty()) {
    int a = queue.front();
    queue.pop_front();
    for (const Adj& n : adj[a])
      if (!seen[n.to]) {
        seen[n.to] = 1;
        in_tree[n.edge] = 1;
        tc.tree.push_back(n.edge);
        queue.push_back(n.to);
      }
  }
  for (int v = 0; v < V; ++v)
    if (!seen[v]) throw std::invalid_argument("triple graph is not connected");

  // faces on each side of every edge; the outer node F collects boundary edges
  std::vector<std::vector<int>> sides(E);
  for (int f = 0; f < F; ++f)
    for (const SignedEdge& s : t.faces[f]) sides[s.edge].push_back(f);
  tc.closed = true;
  for (int e = 0; e < E; ++e) {
    if (sides[e].size() > 2) throw std::invalid_argument("triple graph edge on more than two faces");
    if (sides[e].size() < 2) tc.closed = false;
  }
  const int nodes = tc.closed ? F : F + 1;
  std::vector<std::vector<std::pair<int, int>>> dual(nodes);
  for (int e = 0; e < E; ++e) {
    if (in_tree[e]) continue;
    int a = sides[e].size() > 0 ? sides[e][0] : F;
    int b = sides[e].size() > 1 ? sides[e][1] : F;
    if (a == b) continue;   // an edge with the outer face on both sides stays a loop
    dual[a].push_back({b, e});
    dual[b].push_back({a, e});
  }
  std::vector<char> in_cotree(E, 0), reached(nodes, 0);
  const int root = tc.closed ? 0 : F;
  queue = {root};
  reached[root] = 1;
  while (!queue.empty()) {
    int a = queue.front();
    queue.pop_front();
    for (auto [b, e] : dual[a])
      if (!reached[b]) {
        reached[b] = 1;
        in_cotree[e] = 1;
        tc.cotree.push_back(e);
        queue.push_back(b);
      }
  }
  for (int e = 0; e < E; ++e)
    if (!in_tree[e] && !in_cotree[e]) tc.extra.push_back(e);
  return tc;
}

SpinStructure build_spin_structure(const TripleGraph& t, const std::vector<int>& mu) {
  TreeCotree tc = tree_cotree(t);
  if (mu.size() != tc.extra.size())
    throw std::invalid_argument("basis not spanning: expected " + std::to_string(tc.extra.size()) +
                                " values on basis cycles, got " + std::to_string(mu.size()));
  SpinStructure s;
  s.base = t;
  s.tree = tc.tree;
  s.extra = tc.extra;
  s.mu = mu;
  s.closed = tc.closed;
  s.genus = tc.closed ? static_cast<int>(tc.extra.size()) / 2 : 0;
  const int E = static_cast<int>(t.edges.size()), F = static_cast<int>(t.faces.size());
  s.flip.assign(E, 0);
  std::vector<char> known(E, 1);
  for (int e : tc.cotree) known[e] = 0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu[i] != 0 && mu[i] != 1) throw std::invalid_argument("basis values must be 0 or 1");
    s.flip[tc.extra[i]] = static_cast<std::uint8_t>(mu[i]);
  }

  // peel the cotree from its leaves: a face with one undetermined edge fixes it
  std::vector<int> open(F, 0);
  std::vector<std::vector<int>> faces_of(E);
  for (int f = 0; f < F; ++f)
    for (const SignedEdge& se : t.faces[f]) {
      faces_of[se.edge].push_back(f);
      if (!known[se.edge]) ++open[f];
    }
  std::deque<int> ready;
  for (int f = 0; f < F; ++f)
    if (open[f] == 1) ready.push_back(f);
  int remaining = static_cast<int>(tc.cotree.size());
  while (!ready.empty() && remaining > 0) {
    int f = ready.front();
    ready.pop_front();
    if (open[f] != 1) continue;
    int parity = 0, free_edge = -1;
    for (const SignedEdge& se : t.faces[f]) {
      if (known[se.edge]) parity ^= s.flip[se.edge];
      else free_edge = se.edge;
    }
    s.flip[free_edge] = static_cast<std::uint8_t>(parity ^ 1);
    known[free_edge] = 1;
    --remaining;
    for (int g : faces_of[free_edge])
      if (--open[g] == 1) ready.push_back(g);
  }
  if (remaining > 0) throw std::logic_error("cotree peeling stalled");
  for (int f = 0; f < F; ++f)
    if (face_flip_parity(s, f) != 1)
      throw std::invalid_argument("face " + std::to_string(f) + " lifts trivially; no spin structure with these values");
  return s;
}

SpinStructure build_spin_structure(const DoubleMap& m, const std::vector<int>& mu) {
  return build_spin_structure(build_triple(m), mu);
}

std::vector<SpinStructure> enumerate_spin_structures(const DoubleMap& m) {
  TripleGraph t = build_triple(m);
  const int n = static_cast<int>(tree_cotree(t).extra.size());
  if (n > 16) throw std::invalid_argument("too many basis cycles to enumerate");
  std::vector<SpinStructure> out;
  for (int bits = 0; bits < (1 << n); ++bits) {
    std::vector<int> mu(n);
    for (int i = 0; i < n; ++i) mu[i] = (bits >> i) & 1;
    out.push_back(build_spin_structure(t, mu));
  }
  return out;
}

int face_flip_parity(const SpinStructure& s, int face) {
  int p = 0;
  for (const SignedEdge& se : s.base.faces[face]) p ^= s.flip[se.edge];
  return p;
}

int lifted_cycle_length(const SpinStructure& s, int face) {
  // explicit cover: vertex 2 xi + sheet, edge e lifts to (2a + c, 2b + (c ^ flip))
  const TripleGraph& t = s.base;
  const auto& cyc = t.faces[face];
  const int start = 2 * start_of(t, cyc[0]);
  int at = start, steps = 0;
  do {
    const SignedEdge& se = cyc[steps % cyc.size()];
    const int a = start_of(t, se);
    if (at / 2 != a) throw std::logic_error("face boundary is not a cycle");
    const int b = se.sign > 0 ? t.edges[se.edge][1] : t.edges[se.edge][0];
    at = 2 * b + ((at % 2) ^ s.flip[se.edge]);
    ++steps;
  } while (at != start && steps <= 4 * static_cast<int>(cyc.size()));
  return steps;
}

std::optional<std::vector<int>> gauge_between(const SpinStructure& a, const SpinStructure& b) {
  const TripleGraph& t = a.base;
  if (t.edges.size() != b.base.edges.size()) return std::nullopt;
  auto adj = adjacency(t);
  std::vector<int> g(t.num_vertices, -1);
  for (int r = 0; r < t.num_vertices; ++r) {
    if (g[r] >= 0) continue;
    g[r] = 0;
    std::deque<int> queue{r};
    while (!queue.empty()) {
      int x = queue.front();
      queue.pop_front();
      for (const Adj& n : adj[x]) {
        int want = g[x] ^ a.flip[n.edge] ^ b.flip[n.edge];
        if (g[n.to] < 0) {
          g[n.to] = want;
          queue.push_back(n.to);
        } else if (g[n.to] != want) {
          return std::nullopt;
        }
      }
    }
  }
  return g;
}

bool isomorphic(const SpinStructure& a, const SpinStructure& b) { return gauge_between(a, b).has_value(); }

int holonomy(const SpinStructure& s, const std::vector<SignedEdge>& cycle) {
  int h = 0;
  for (const SignedEdge& se : cycle) h ^= s.flip[se.edge];
  return h;
}

Spinor Spinor::from_upper(const std::vector<cplx>& upper) {
  Spinor z;
  z.v.resize(2 * upper.size());
  for (std::size_t i = 0; i < upper.size(); ++i) {
    z.v[2 * i] = upper[i];
    z.v[2 * i + 1] = -upper[i];
  }
  return z;
}

Spinor Spinor::regauged(const std::vector<int>& g) const {
  Spinor z = *this;
  for (int i = 0; i < size(); ++i)
    if (g[i]) std::swap(z.v[2 * i], z.v[2 * i + 1]);
  return z;
}

double equivariance_defect(const Spinor& z) {
  double scale = 0.0, worst = 0.0;
  for (const cplx& c : z.v) scale = std::max(scale, std::abs(c));
  for (int i = 0; i < z.size(); ++i) worst = std::max(worst, std::abs(z.at(i, 0) + z.at(i, 1)));
  return scale > 0 ? worst / scale : 0.0;
}

HalfAngleSystem half_angles(const DoubleMap& m, const AngleSystem& angles) {
  HalfAngleSystem h;
  h.theta.resize(4 * m.num_quads());
  for (int q = 0; q < m.num_quads(); ++q)
    for (int k = 0; k < 4; ++k) h.theta[4 * q + k] = 0.5 * angles.phi[q][k];
  return h;
}

std::array<cplx, 8> face_lift(const DoubleMap& m, const SpinStructure& s, const Spinor& z, int q) {
  const Quad& Qd = m.quads[q];
  std::array<cplx, 8> out{};
  int sheet = 0;
  for (int j = 0; j < 8; ++j) {
    out[j] = z.at(Qd.side[(j + 3) % 4], sheet);
    sheet ^= s.flip[4 * q + (j % 4)];
  }
  return out;
}

namespace {

void require_equivariant(const Spinor& z, int n, const char* what) {
  if (z.size() != n)
    throw std::invalid_argument(std::string("malformed spinor: ") + what + " has " + std::to_string(z.size()) +
                                " base vertices, expected " + std::to_string(n));
  double d = equivariance_defect(z);
  if (d > 1e-12) throw std::invalid_argument(std::string("malformed spinor: ") + what + " is not equivariant");
}

double max_abs(const Spinor& z) {
  double s = 0.0;
  for (const cplx& c : z.v) s = std::max(s, std::abs(c));
  return s;
}

}  // namespace

DiracResidual dirac_residual(const DoubleMap& m, const SpinStructure& s, const Spinor& z) {
  require_equivariant(z, s.base.num_vertices, "zeta");
  DiracResidual r;
  const double scale = std::max(max_abs(z), std::numeric_limits<double>::min());
  const cplx I(0, 1);
  for (int q = 0; q < m.num_quads(); ++q) {
    auto Z = face_lift(m, s, z, q);
    for (int j = 0; j < 4; ++j) {
      const double rho = m.rho[m.diagonal_at(q, j)];
      double sym = std::abs(Z[j + 2] - I * Z[j]) / scale;
      double dd = std::abs(Z[j] - std::sqrt(1 + rho * rho) * Z[j + 1] + rho * Z[j + 2]) / scale;
      if (sym > r.symmetry) r.symmetry = sym, r.worst_symmetry = q;
      if (dd > r.dotsenko) r.dotsenko = dd, r.worst_dotsenko = q;
    }
  }
  return r;
}

std::array<cplx, 6> dotsenko_orbit(double rho_a, double rho_dual, cplx z1, cplx z2) {
  std::array<cplx, 6> z{z1, z2};
  for (int j = 0; j < 4; ++j) {
    const double r = (j % 2 == 0) ? rho_a : rho_dual;
    z[j + 2] = (std::sqrt(1 + r * r) * z[j + 1] - z[j]) / r;
  }
  return z;
}

DiracConstruction construct_dirac_spinor(const DoubleMap& m, const AngleSystem& angles, int base, double tol) {
  DiracConstruction c;
  const TripleGraph t = build_triple(m);
  if (base < 0 || base >= t.num_vertices) throw std::invalid_argument("base point out of range");
  if (static_cast<int>(angles.phi.size()) != m.num_quads()) throw std::invalid_argument("angle system size mismatch");
  c.theta = half_angles(m, angles);

  for (int q = 0; q < m.num_quads(); ++q)
    for (int k = 0; k < 2; ++k)
      if (std::abs(angles.phi[q][k] + angles.phi[q][k + 1] - kPi) > tol) {
        c.witness_quad = q;
        c.reason = "diamond " + std::to_string(q) + " is not a rhombus: phi(a) + phi(a*) != pi";
        return c;
      }

  const int V = t.num_vertices, E = static_cast<int>(t.edges.size());
  auto adj = adjacency(t);
  std::vector<cplx> zeta(V, 0.0);
  std::vector<int> parent_edge(V, -1), parent(V, -1), depth(V, -1);
  std::vector<char> in_tree(E, 0);
  c.spin.base = t;
  c.spin.flip.assign(E, 0);
  zeta[base] = 1.0;
  depth[base] = 0;
  std::deque<int> queue{base};
  while (!queue.empty()) {
    int a = queue.front();
    queue.pop_front();
    for (const Adj& n : adj[a]) {
      if (depth[n.to] >= 0) continue;
      depth[n.to] = depth[a] + 1;
      parent[n.to] = a;
      parent_edge[n.to] = n.edge;
      in_tree[n.edge] = 1;
      c.spin.tree.push_back(n.edge);
      zeta[n.to] = zeta[a] * std::polar(1.0, n.dir * c.theta.theta[n.edge]);
      queue.push_back(n.to);
    }
  }
  for (int v = 0; v < V; ++v)
    if (depth[v] < 0) throw std::invalid_argument("triple graph is not connected");

  for (int e = 0; e < E; ++e) {
    if (in_tree[e]) continue;
    const int a = t.edges[e][0], b = t.edges[e][1];
    const cplx ratio = zeta[a] * std::polar(1.0, c.theta.theta[e]) / zeta[b];
    const double plus = std::abs(ratio - 1.0), minus = std::abs(ratio + 1.0);
    c.max_phase_mismatch = std::max(c.max_phase_mismatch, std::min(plus, minus));
    if (std::min(plus, minus) > tol) {
      // fundamental cycle: e followed by the tree path from b back to a
      std::vector<int> up_a, up_b;
      int x = a, y = b;
      while (depth[x] > depth[y]) up_a.push_back(parent_edge[x]), x = parent[x];
      while (depth[y] > depth[x]) up_b.push_back(parent_edge[y]), y = parent[y];
      while (x != y) {
        up_a.push_back(parent_edge[x]), x = parent[x];
        up_b.push_back(parent_edge[y]), y = parent[y];
      }
      c.witness_cycle = {e};
      c.witness_cycle.insert(c.witness_cycle.end(), up_b.begin(), up_b.end());
      c.witness_cycle.insert(c.witness_cycle.end(), up_a.rbegin(), up_a.rend());
      c.reason = "path dependence around a cycle through upsilon edge " + std::to_string(e) +
                 " (holonomy is not +-1)";
      return c;
    }
    c.spin.flip[e] = minus < plus ? 1 : 0;
  }

  for (int f = 0; f < static_cast<int>(t.faces.size()); ++f) {
    if (face_flip_parity(c.spin, f) == 1) continue;
    if (t.face_vertex[f] >= 0) {
      c.witness_vertex = t.face_vertex[f];
      c.reason = "angle sum at vertex " + std::to_string(c.witness_vertex) + " is 0 mod 4 pi";
    } else {
      c.witness_quad = f;
      c.reason = "diamond " + std::to_string(f) + " lifts trivially";
    }
    return c;
  }

  // record the basis values of the structure found, relative to the tree/cotree basis
  TreeCotree tc = tree_cotree(t);
  c.spin.closed = tc.closed;
  c.spin.extra = tc.extra;
  c.spin.genus = tc.closed ? static_cast<int>(tc.extra.size()) / 2 : 0;
  if (!tc.extra.empty()) {
    // gauge so that flips vanish on the reference tree, then read mu off the extra edges
    std::vector<char> ref(E, 0);
    for (int e : tc.tree) ref[e] = 1;
    std::vector<int> g(V, -1);
    g[0] = 0;
    std::deque<int> qq{0};
    while (!qq.empty()) {
      int a = qq.front();
      qq.pop_front();
      for (const Adj& n : adj[a])
        if (ref[n.edge] && g[n.to] < 0) {
          g[n.to] = g[a] ^ c.spin.flip[n.edge];
          qq.push_back(n.to);
        }
    }
    for (int e : tc.extra) c.spin.mu.push_back(c.spin.flip[e] ^ g[t.edges[e][0]] ^ g[t.edges[e][1]]);
  }

  c.spinor = Spinor::from_upper(zeta);
  c.ok = true;
  return c;
}

DiracExistence dirac_exists(const DoubleMap& m, int base, double tol) {
  DiracExistence r;
  const int Q = m.num_quads(), E = m.num_edges();
  r.phi.resize(E);
  for (int a = 0; a < E; ++a) {
    // e^{i phi(a)/2} = (rho(a*) + i) / sqrt(1 + rho(a*)^2)
    const double rd = m.rho[m.partner(a)];
    r.phi[a] = 2.0 * std::arg(cplx(rd, 1.0));
  }
  for (int q = 0; q < Q; ++q) r.max_rhombus_error = std::max(r.max_rhombus_error, std::abs(r.phi[q] + r.phi[q + Q] - kPi));

  r.vertex_phase_error.assign(m.num_vertices(), std::numeric_limits<double>::quiet_NaN());
  double worst = 0.0;
  for (int v = 0; v < m.num_vertices(); ++v) {
    if (!m.interior(v)) continue;
    double s = 0.0;
    for (const Corner& c : m.rings[v]) s += 0.5 * r.phi[m.diagonal_at(c.quad, c.k)];
    const double err = std::abs(std::polar(1.0, s) + 1.0);
    r.vertex_phase_error[v] = err;
    if (err > worst) worst = err, r.witness_vertex = err > tol ? v : r.witness_vertex;
  }

  AngleSystem angles;
  angles.phi.resize(Q);
  for (int q = 0; q < Q; ++q)
    for (int k = 0; k < 4; ++k) angles.phi[q][k] = r.phi[m.diagonal_at(q, k)];

  if (r.max_rhombus_error > tol) {
    r.reason = "phi(a) + phi(a*) != pi (rho(a) rho(a*) != 1)";
    return r;
  }
  if (r.witness_vertex >= 0) {
    r.reason = "exp(i sum phi/2) != -1 at vertex " + std::to_string(r.witness_vertex);
    return r;
  }
  r.construction = construct_dirac_spinor(m, angles, base, tol);
  r.exists = r.construction.ok;
  if (!r.exists) {
    r.reason = r.construction.reason;
    r.witness_vertex = r.construction.witness_vertex;
  }
  return r;
}

Eigen::MatrixXcd dotsenko_space(const DoubleMap& m, const SpinStructure& s, double tol) {
  const int N = s.base.num_vertices, Q = m.num_quads();
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(4 * Q, N);
  for (int q = 0; q < Q; ++q) {
    const Quad& Qd = m.quads[q];
    std::array<int, 6> id{};
    std::array<double, 6> sg{};
    int sheet = 0;
    for (int j = 0; j < 6; ++j) {
      id[j] = Qd.side[(j + 3) % 4];
      sg[j] = sheet ? -1.0 : 1.0;
      sheet ^= s.flip[4 * q + (j % 4)];
    }
    for (int j = 0; j < 4; ++j) {
      const double rho = m.rho[m.diagonal_at(q, j)];
      const int row = 4 * q + j;
      A(row, id[j]) += sg[j];
      A(row, id[j + 1]) -= std::sqrt(1 + rho * rho) * sg[j + 1];
      A(row, id[j + 2]) += rho * sg[j + 2];
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cut = tol * std::max(1.0, sv.size() ? sv[0] : 1.0);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) rank += sv[i] > cut ? 1 : 0;
  return svd.matrixV().rightCols(N - rank);
}

SpinorForm spinor_form(const DoubleMap& m, const SpinStructure& s, const Spinor& z, const Spinor& w, double tol) {
  const int N = s.base.num_vertices, Q = m.num_quads();
  require_equivariant(z, N, "zeta");
  require_equivariant(w, N, "zeta'");
  SpinorForm out;
  std::vector<cplx> F(N);
  for (int x = 0; x < N; ++x) F[x] = z.at(x, 0) * w.at(x, 0);
  Eigen::VectorXcd v(2 * Q);
  for (int q = 0; q < Q; ++q) {
    const auto& sd = m.quads[q].side;
    v[q] = 0.5 * (F[sd[1]] - F[sd[0]] + F[sd[2]] - F[sd[3]]);
    v[Q + q] = 0.5 * (F[sd[3]] - F[sd[0]] + F[sd[2]] - F[sd[1]]);
  }
  out.form = make_cochain(1, Carrier::lambda, v);

  DiracResidual rz = dirac_residual(m, s, z), rw = dirac_residual(m, s, w);
  out.symmetric = {rz.symmetry <= tol, rw.symmetry <= tol};
  out.dotsenko = {rz.dotsenko <= tol, rw.dotsenko <= tol};
  out.predicted_closed = (out.symmetric[0] && out.symmetric[1]) || (out.dotsenko[0] && out.dotsenko[1]);
  out.predicted_holomorphic = out.symmetric[0] && out.dotsenko[0] && out.dotsenko[1];

  const double scale = std::max(v.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  Cochain dw = coboundary(m, out.form);
  for (int x = 0; x < m.num_vertices(); ++x)
    if (m.interior(x)) out.closed_residual = std::max(out.closed_residual, std::abs(dw.v[x]) / scale);
  Cochain st = hodge_star(m, out.form);
  const cplx I(0, 1);
  for (int a = 0; a < 2 * Q; ++a) out.type_residual = std::max(out.type_residual, std::abs(st.v[a] + I * v[a]) / scale);
  out.closed = out.closed_residual <= tol;
  out.holomorphic = out.closed && out.type_residual <= tol;
  return out;
}

std::vector<cplx> ratio_to_dZ(const DoubleMap& m, const PlanarEmbedding& emb, const Cochain& form, bool conjugate) {
  const int Q = m.num_quads();
  std::vector<cplx> r(2 * Q);
  for (int q = 0; q < Q; ++q) {
    auto c = emb.quad(m, q);
    cplx dp = c[2] - c[0], dd = c[3] - c[1];
    if (conjugate) dp = std::conj(dp), dd = -std::conj(dd);   // d(eps conj Z)
    r[q] = form.v[q] / dp;
    r[Q + q] = form.v[Q + q] / dd;
  }
  return r;
}

MassiveParams MassiveParams::from_modulus(double k) {
  if (!(k > 0.0 && k <= 1.0)) throw std::invalid_argument("modulus k must lie in (0, 1]");
  MassiveParams p;
  p.k = k;
  p.kp = std::sqrt(std::max(0.0, 1.0 - k * k));
  p.I = complete_I(p.kp);
  return p;
}

double elliptic_half_angle(double phi, double k) {
  if (!(k > 0.0 && k <= 1.0)) throw std::invalid_argument("modulus k must lie in (0, 1]");
  if (!(phi >= 0.0 && phi <= kPi)) throw std::invalid_argument("phi must lie in [0, pi]");
  const double kp2 = std::max(0.0, 1.0 - k * k);
  if (kp2 == 0.0) return 0.5 * phi;   // Delta' = 1
  if (kp2 >= 1.0 && phi >= kPi) throw std::domain_error("u diverges at phi = pi when k' = 1");
  auto f = [kp2](double t) {
    const double s = std::sin(t);
    return 1.0 / std::sqrt(1.0 - kp2 * s * s);
  };
  double err = 0.0;
  double u = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, 0.5 * phi, 10, 1e-13, &err);
  if (err > 1e-12) throw std::runtime_error("elliptic quadrature did not reach 1e-12");
  return u;
}

double elliptic_half_angle_agm(double phi, double k) {
  if (!(k > 0.0 && k <= 1.0)) throw std::invalid_argument("modulus k must lie in (0, 1]");
  const double m = std::max(0.0, 1.0 - k * k), psi = 0.5 * phi;
  if (m == 0.0) return psi;
  if (m >= 1.0) {
    // AGM(1, 0) degenerates; the integrand is 1 / cos
    if (psi >= 0.5 * kPi) throw std::domain_error("u diverges at phi = pi when k' = 1");
    return std::atanh(std::sin(psi));
  }
  // tan(p_{n+1} - p_n) = (b_n / a_n) tan p_n on the continuous branch, F = p_N / (2^N a_N)
  double a = 1.0, b = std::sqrt(1.0 - m), p = psi, scale = 1.0;
  for (int n = 0; n < 64 && std::abs(a - b) > 1e-16 * a; ++n) {
    const double s = std::sin(p), c = std::cos(p);
    p = 2.0 * p - std::atan((a - b) * s * c / (a * c * c + b * s * s));
    const double an = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = an;
    scale *= 2.0;
  }
  return p / (scale * a);
}

double complete_I(double kp) {
  if (!(kp >= 0.0 && kp < 1.0)) throw std::domain_error("complete integral needs 0 <= k' < 1");
  double a = 1.0, b = std::sqrt(1.0 - kp * kp);
  for (int n = 0; n < 64 && std::abs(a - b) > 1e-16 * a; ++n) {
    const double an = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = an;
  }
  return kPi / (2.0 * a);
}

MassiveReport massive_flatness(const DoubleMap& m, double k, double tol) {
  MassiveReport r;
  r.params = MassiveParams::from_modulus(k);
  const int Q = m.num_quads(), E = m.num_edges();
  for (int q = 0; q < Q; ++q) {
    const double err = std::abs(m.rho[q] * m.rho[q + Q] * k - 1.0);
    if (err > r.max_modulus_error) r.max_modulus_error = err, r.offending_quad = q;
  }
  if (r.max_modulus_error > 1e-9) {
    r.precondition_ok = false;
    return r;
  }
  r.offending_quad = -1;
  const double I = r.params.I;
  r.u.resize(E);
  for (int a = 0; a < E; ++a) r.u[a] = elliptic_half_angle(2.0 * std::atan(m.rho[a]), k);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  r.face_residual.assign(m.num_vertices(), nan);
  r.vertex_residual.assign(m.num_vertices(), nan);
  for (int v = 0; v < m.num_vertices(); ++v) {
    if (!m.interior(v)) continue;
    double fs = 0.0, vs = 0.0;
    for (const SignedEdge& s : m.face_boundary(v)) fs += I - r.u[s.edge];
    for (const SignedEdge& s : m.star(v)) vs += r.u[s.edge];
    r.face_residual[v] = reduce_centered(fs - I, 4.0 * I);
    r.vertex_residual[v] = reduce_centered(vs - I, 4.0 * I);
    r.max_face = std::max(r.max_face, std::abs(r.face_residual[v]));
    r.max_vertex = std::max(r.max_vertex, std::abs(r.vertex_residual[v]));
  }
  r.flat = r.max_face <= tol && r.max_vertex <= tol;
  return r;
}

}  // namespace discra
