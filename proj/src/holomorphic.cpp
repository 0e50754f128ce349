#include "discra/holomorphic.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <numbers>
#include <queue>
#include <set>
#include <stdexcept>

namespace discra {

namespace {

constexpr double kPi = std::numbers::pi;
const cplx kI(0.0, 1.0);

double maxabs(const Eigen::VectorXcd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// Lambda-edge joining a and b, or -1.
int edge_between(const DoubleMap& m, int a, int b) {
  for (SignedEdge s : m.star(a)) {
    int w = s.sign > 0 ? m.head(s.edge) : m.tail(s.edge);
    if (w == b) return s.edge;
  }
  return -1;
}

// Sign of partner(e) in the boundary of the face v*, v an endpoint of e.
int partner_sign(const DoubleMap& m, int v, int e) {
  int s = m.tail(e) == v ? 1 : -1;
  return m.edge_kind(e) == Kind::primal ? s : -s;
}

std::vector<int> path_edges(const DoubleMap& m, const std::vector<int>& path) {
  std::set<int> seen(path.begin(), path.end());
  if (seen.size() != path.size()) throw std::invalid_argument("path is not simple");
  std::vector<int> edges;
  for (std::size_t j = 0; j + 1 < path.size(); ++j) {
    int e = edge_between(m, path[j], path[j + 1]);
    if (e < 0) throw std::invalid_argument("consecutive path vertices are not joined by a Lambda-edge");
    edges.push_back(e);
  }
  return edges;
}

Cochain one_plus_istar(const DoubleMap& m, const Cochain& w) {
  Cochain s = hodge_star(m, w);
  Cochain out = w;
  out.v += kI * s.v;
  return out;
}

void fill_diagnostics(const DoubleMap& m, MeromorphicForm& mf, HolonomyKind kind) {
  Cochain s = hodge_star(m, mf.form);
  mf.type_residual = maxabs(s.v + kI * mf.form.v);
  Cochain d = coboundary(m, mf.form);
  mf.closed_residual = 0.0;
  for (int v = 0; v < m.num_vertices(); ++v)
    if (m.interior(v) && std::find(mf.poles.begin(), mf.poles.end(), v) == mf.poles.end())
      mf.closed_residual = std::max(mf.closed_residual, std::abs(d.v[v]));
  mf.residues.clear();
  for (int p : mf.poles) mf.residues.push_back(residue(m, mf.form, p));
  std::vector<int> excl;
  for (int e : mf.cut) excl.push_back(m.partner(e));
  mf.holonomy_residual = 0.0;
  for (Kind k : {Kind::primal, Kind::dual})
    for (const auto& loop : probe_loops(m, k, excl)) {
      cplx h = holonomy(mf.form, loop);
      double bad = kind == HolonomyKind::imaginary ? std::abs(h.real()) / (1 + std::abs(h.imag()))
                                                   : std::abs(h.imag()) / (1 + std::abs(h.real()));
      mf.holonomy_residual = std::max(mf.holonomy_residual, bad);
    }
}

// Shortest path through interior vertices of the same kind from v to a boundary vertex.
std::vector<int> path_to_boundary(const DoubleMap& m, int v) {
  std::vector<int> prev(m.num_vertices(), -2);
  std::queue<int> todo;
  todo.push(v);
  prev[v] = -1;
  while (!todo.empty()) {
    int u = todo.front();
    todo.pop();
    if (!m.interior(u)) {
      std::vector<int> p;
      for (int w = u; w >= 0; w = prev[w]) p.push_back(w);
      std::reverse(p.begin(), p.end());
      return p;
    }
    for (SignedEdge s : m.star(u)) {
      int w = s.sign > 0 ? m.head(s.edge) : m.tail(s.edge);
      if (prev[w] != -2) continue;
      prev[w] = u;
      todo.push(w);
    }
  }
  throw std::invalid_argument("no boundary vertex reachable");
}

}  // namespace

CRReport check_holomorphic(const DoubleMap& m, const Cochain& f) {
  CRReport r;
  const int Q = m.num_quads();
  r.per_quad.resize(Q);
  for (int q = 0; q < Q; ++q) {
    const Quad& qu = m.quads[q];
    cplx res = f.v[qu.v[3]] - f.v[qu.v[1]] - kI * m.rho[q] * (f.v[qu.v[2]] - f.v[qu.v[0]]);
    r.per_quad[q] = std::abs(res);
    if (r.per_quad[q] > r.max_residual || r.worst_quad < 0) {
      r.max_residual = r.per_quad[q];
      r.worst_quad = q;
    }
  }
  return r;
}

CRReport check_holomorphic_form(const DoubleMap& m, const Cochain& alpha, const std::vector<int>& skip) {
  CRReport r;
  Cochain d = coboundary(m, alpha);
  Cochain s = hodge_star(m, alpha);
  const int Q = m.num_quads();
  r.per_quad.assign(Q, 0.0);
  for (int q = 0; q < Q; ++q)
    r.per_quad[q] = std::max(std::abs(s.v[q] + kI * alpha.v[q]), std::abs(s.v[q + Q] + kI * alpha.v[q + Q]));
  for (int v = 0; v < m.num_vertices(); ++v) {
    if (!m.interior(v) || std::find(skip.begin(), skip.end(), v) != skip.end()) continue;
    double a = std::abs(d.v[v]);
    for (const Corner& c : m.rings[v]) r.per_quad[c.quad] = std::max(r.per_quad[c.quad], a);
  }
  for (int q = 0; q < Q; ++q)
    if (r.per_quad[q] > r.max_residual || r.worst_quad < 0) r.max_residual = r.per_quad[q], r.worst_quad = q;
  return r;
}

cplx residue(const DoubleMap& m, const Cochain& alpha, int x) {
  if (x < 0 || x >= m.num_vertices() || !m.interior(x)) throw std::invalid_argument("residue needs an interior vertex");
  cplx s = 0.0;
  for (SignedEdge e : m.face_boundary(x)) s += static_cast<double>(e.sign) * alpha.v[e.edge];
  return s / (2.0 * kPi * kI);
}

cplx holonomy(const Cochain& alpha, const std::vector<SignedEdge>& loop) {
  cplx s = 0.0;
  for (SignedEdge e : loop) s += static_cast<double>(e.sign) * alpha.v[e.edge];
  return s;
}

std::vector<std::vector<SignedEdge>> probe_loops(const DoubleMap& m, Kind k, const std::vector<int>& excluded) {
  std::vector<char> bad(m.num_edges(), 0);
  for (int e : excluded) bad[e] = 1;
  const int N = m.num_vertices();
  std::vector<SignedEdge> up(N, {-1, 0});   // edge to the parent, sign for walking parent -> child
  std::vector<int> depth(N, -1);
  std::vector<char> tree(m.num_edges(), 0);
  for (int root = 0; root < N; ++root) {
    if (m.kind[root] != k || depth[root] >= 0) continue;
    depth[root] = 0;
    std::queue<int> todo;
    todo.push(root);
    while (!todo.empty()) {
      int u = todo.front();
      todo.pop();
      for (SignedEdge s : m.star(u)) {
        if (bad[s.edge]) continue;
        int w = s.sign > 0 ? m.head(s.edge) : m.tail(s.edge);
        if (depth[w] >= 0) continue;
        depth[w] = depth[u] + 1;
        up[w] = s;
        tree[s.edge] = 1;
        todo.push(w);
      }
    }
  }
  auto parent = [&](int w) { return up[w].sign > 0 ? m.tail(up[w].edge) : m.head(up[w].edge); };
  std::vector<std::vector<SignedEdge>> loops;
  for (int e = 0; e < m.num_edges(); ++e) {
    if (m.edge_kind(e) != k || bad[e] || tree[e]) continue;
    int a = m.tail(e), b = m.head(e);
    if (depth[a] < 0 || depth[b] < 0) continue;
    // loop: e from a to b, then b up to the common ancestor and back down to a
    std::vector<SignedEdge> from_b, from_a;
    while (a != b) {
      if (depth[b] >= depth[a]) {
        from_b.push_back({up[b].edge, -up[b].sign});
        b = parent(b);
      } else {
        from_a.push_back(up[a]);
        a = parent(a);
      }
    }
    std::vector<SignedEdge> loop{{e, 1}};
    loop.insert(loop.end(), from_b.begin(), from_b.end());
    loop.insert(loop.end(), from_a.rbegin(), from_a.rend());
    loops.push_back(std::move(loop));
  }
  return loops;
}

MeromorphicForm meromorphic_form(const DoubleMap& m, const std::vector<int>& poles, const std::vector<int>& path,
                                 HolonomyKind kind) {
  if (poles.empty() || poles.size() > 2) throw std::invalid_argument("one or two poles expected");
  for (int p : poles)
    if (p < 0 || p >= m.num_vertices() || !m.interior(p)) throw std::invalid_argument("poles must be interior vertices");
  if (path.empty() || path.front() != poles[0]) throw std::invalid_argument("path must start at the first pole");
  const int x = poles[0];
  const Kind k = m.kind[x];
  for (int v : path)
    if (m.kind[v] != k) throw std::invalid_argument("path leaves the complex of the pole");
  if (poles.size() == 2) {
    if (path.back() != poles[1]) throw std::invalid_argument("path must end at the second pole");
  } else {
    if (m.interior(path.back())) throw std::invalid_argument("path must end on the boundary");
  }
  for (std::size_t j = 1; j + 1 < path.size(); ++j)
    if (!m.interior(path[j])) throw std::invalid_argument("path touches the boundary before its end");

  MeromorphicForm mf;
  mf.poles = poles;
  mf.cut = path_edges(m, path);

  if (kind == HolonomyKind::imaginary) {
    Cochain rhs = zeros(m, 0, Carrier::lambda);
    rhs.v[x] = -2.0 * kPi;
    if (poles.size() == 2) rhs.v[poles[1]] = 2.0 * kPi;
    std::vector<int> fixed = boundary_vertices(m, k);
    if (fixed.empty() && poles.size() == 1) throw std::invalid_argument("a single pole needs a boundary");
    Cochain f = solve_poisson(m, k, rhs, fixed);
    mf.form = one_plus_istar(m, coboundary(m, f));
  } else {
    Cochain J = zeros(m, 1, Carrier::lambda);
    int c = partner_sign(m, path[0], mf.cut[0]);
    J.v[m.partner(mf.cut[0])] = static_cast<double>(c) * 2.0 * kPi * kI;
    for (std::size_t j = 1; j < mf.cut.size(); ++j) {
      int v = path[j];
      c = -c * partner_sign(m, v, mf.cut[j - 1]) * partner_sign(m, v, mf.cut[j]);
      J.v[m.partner(mf.cut[j])] = static_cast<double>(c) * 2.0 * kPi * kI;
    }
    // minimise sum rho |dh + J|^2 over h on the opposite complex: L h = -d^T W J
    Cochain rhs = zeros(m, 0, Carrier::lambda);
    for (int e = 0; e < m.num_edges(); ++e) {
      if (J.v[e] == cplx(0.0)) continue;
      cplx w = m.rho[e] * J.v[e];
      rhs.v[m.head(e)] -= w;
      rhs.v[m.tail(e)] += w;
    }
    Cochain h = solve_poisson(m, other(k), rhs, {});
    Cochain w = coboundary(m, h);
    w.v += J.v;
    mf.form = one_plus_istar(m, w);
  }
  cplx r = residue(m, mf.form, x);
  mf.form.v /= r;
  fill_diagnostics(m, mf, kind);
  return mf;
}

PhiAB phi_ab(const DoubleMap& m, const std::vector<int>& loop_a, const std::vector<int>& loop_b) {
  if (!m.closed()) throw std::invalid_argument("phi_ab needs a closed surface");
  if (loop_a.size() < 2 || loop_b.size() < 2) throw std::invalid_argument("loops are too short");
  auto closed_edges = [&](const std::vector<int>& loop) {
    std::vector<int> p = loop;
    p.push_back(loop.front());
    std::vector<int> es;
    for (std::size_t j = 0; j + 1 < p.size(); ++j) {
      int e = edge_between(m, p[j], p[j + 1]);
      if (e < 0) throw std::invalid_argument("loop vertices are not joined by Lambda-edges");
      es.push_back(e);
    }
    std::set<int> s(loop.begin(), loop.end());
    if (s.size() != loop.size()) throw std::invalid_argument("loop is not simple");
    return es;
  };
  std::vector<int> ea = closed_edges(loop_a), eb = closed_edges(loop_b);
  if (m.kind[loop_a[0]] == m.kind[loop_b[0]]) throw std::invalid_argument("A and B must lie in opposite complexes");
  int crossings = 0;
  for (int e : ea)
    if (std::find(eb.begin(), eb.end(), m.partner(e)) != eb.end()) ++crossings;
  if (crossings != 1) throw std::invalid_argument("A and B must have exactly one pair of dual edges");

  const std::size_t n = loop_a.size(), mid = n / 2;
  const int x = loop_a[0], y = loop_a[mid];
  std::vector<int> p1(loop_a.begin(), loop_a.begin() + mid + 1);
  std::vector<int> p2(loop_a.begin() + mid, loop_a.end());
  p2.push_back(x);
  MeromorphicForm b1 = meromorphic_form(m, {x, y}, p1, HolonomyKind::real);
  MeromorphicForm b2 = meromorphic_form(m, {y, x}, p2, HolonomyKind::real);
  PhiAB out;
  out.form = b1.form;
  out.form.v = (b1.form.v + b2.form.v) / (2.0 * kPi * kI);
  std::vector<SignedEdge> bl;
  std::vector<int> pb = loop_b;
  pb.push_back(loop_b.front());
  for (std::size_t j = 0; j + 1 < pb.size(); ++j) {
    int e = eb[j];
    bl.push_back({e, m.tail(e) == pb[j] ? 1 : -1});
  }
  out.period_b = holonomy(out.form, bl);
  if (out.period_b.real() < 0) {
    out.form.v = -out.form.v;
    out.period_b = -out.period_b;
  }
  std::vector<int> excl;
  for (int e : ea) excl.push_back(m.partner(e));
  for (Kind k : {Kind::primal, Kind::dual})
    for (const auto& loop : probe_loops(m, k, excl)) {
      cplx h = holonomy(out.form, loop);
      out.holonomy_residual = std::max(out.holonomy_residual, std::abs(h.real()) / (1 + std::abs(h.imag())));
    }
  return out;
}

CauchyKernel cauchy_kernel(const DoubleMap& m, int dedge) {
  TopologyReport top = validate(m);
  if (!top.ok() || top.euler != 1 || top.boundary_components != 1)
    throw std::invalid_argument("the Cauchy kernel needs a disc");
  if (dedge < 0 || dedge >= m.num_dedges()) throw std::invalid_argument("diamond edge out of range");
  const DiamondEdge& de = m.dedges[dedge];
  if (de.quads[0] < 0 || de.quads[1] < 0 || !m.interior(de.p) || !m.interior(de.d))
    throw std::invalid_argument("(x, y) must be an interior diamond edge");
  CauchyKernel K;
  K.dedge = dedge;
  K.x = de.p;
  K.y = de.d;
  K.rect = {de.quads[0], de.quads[1]};
  const int Q = m.num_quads();

  MeromorphicForm ax = meromorphic_form(m, {K.x}, path_to_boundary(m, K.x), HolonomyKind::imaginary);
  MeromorphicForm ay = meromorphic_form(m, {K.y}, path_to_boundary(m, K.y), HolonomyKind::imaginary);
  K.mu = ax.form;
  K.mu.v += ay.form.v;

  // tau: a chain of quads from rect[0] out of D, avoiding rect[1]
  std::vector<int> prev(Q, -2), via(Q, -1);
  std::queue<int> todo;
  todo.push(K.rect[0]);
  prev[K.rect[0]] = -1;
  prev[K.rect[1]] = -3;
  int last = -1, exit_side = -1;
  while (!todo.empty() && last < 0) {
    int q = todo.front();
    todo.pop();
    for (int k = 0; k < 4 && last < 0; ++k) {
      const DiamondEdge& e = m.dedges[m.quads[q].side[k]];
      int o = e.quads[0] == q ? e.quads[1] : e.quads[0];
      if (o < 0) {
        last = q;
        exit_side = k;
      } else if (prev[o] == -2) {
        prev[o] = q;
        via[o] = k;
        todo.push(o);
      }
    }
  }
  if (last < 0) throw std::invalid_argument("no way out of D from (x, y)");
  K.tau = zeros(m, 1, Carrier::diamond);
  K.tau.v[m.quads[last].side[exit_side]] = m.side_sign(last, exit_side);
  for (int q = last; prev[q] >= 0; q = prev[q]) {
    int p = prev[q], k = via[q];
    K.tau.v[m.quads[p].side[k]] = m.side_sign(p, k);
  }

  // phi: primitive of r = mu - 2 i pi A tau, R diagonals removed
  Cochain r = K.mu;
  r.v -= 2.0 * kPi * kI * average(m, K.tau).v;
  std::vector<char> skip(m.num_edges(), 0);
  for (int q : K.rect) skip[q] = skip[q + Q] = 1;
  K.phi = zeros(m, 0, Carrier::lambda);
  std::vector<char> seen(m.num_vertices(), 0);
  for (int start : {K.x, K.y}) {
    seen[start] = 1;
    std::queue<int> bfs;
    bfs.push(start);
    while (!bfs.empty()) {
      int u = bfs.front();
      bfs.pop();
      for (SignedEdge s : m.star(u)) {
        if (skip[s.edge]) continue;
        int w = s.sign > 0 ? m.head(s.edge) : m.tail(s.edge);
        if (seen[w]) continue;
        seen[w] = 1;
        K.phi.v[w] = K.phi.v[u] + static_cast<double>(s.sign) * r.v[s.edge];
        bfs.push(w);
      }
    }
  }
  for (int v = 0; v < m.num_vertices(); ++v)
    if (!seen[v]) throw std::invalid_argument("removing R disconnects the double");
  for (int e = 0; e < m.num_edges(); ++e)
    if (!skip[e])
      K.consistency = std::max(K.consistency, std::abs(K.phi.v[m.head(e)] - K.phi.v[m.tail(e)] - r.v[e]));
  K.consistency /= 1.0 + maxabs(K.phi.v);

  Cochain pd = K.phi;
  pd.carrier = Carrier::diamond;
  K.nu = coboundary(m, pd);
  K.nu.v += 2.0 * kPi * kI * K.tau.v;
  K.nu.v[dedge] = 0.0;

  std::vector<int> all(Q);
  for (int q = 0; q < Q; ++q) all[q] = q;
  for (SignedEdge s : region_boundary(m, all)) K.boundary_holonomy += static_cast<double>(s.sign) * K.nu.v[s.edge];
  return K;
}

CauchyReport cauchy_integral(const DoubleMap& m, const CauchyKernel& k, const Cochain& f) {
  CauchyReport r;
  const int Q = m.num_quads();
  std::vector<int> all(Q);
  for (int q = 0; q < Q; ++q) all[q] = q;
  for (SignedEdge s : region_boundary(m, all)) {
    const DiamondEdge& de = m.dedges[s.edge];
    r.contour += static_cast<double>(s.sign) * 0.5 * (f.v[de.p] + f.v[de.d]) * k.nu.v[s.edge];
  }
  Cochain fl = f;
  fl.carrier = Carrier::lambda;
  Cochain w = hetero_wedge(m, d_second(m, fl), k.mu);
  r.area = 0.5 * w.v.sum();
  r.point = 2.0 * kPi * kI * 0.5 * (f.v[k.x] + f.v[k.y]);
  r.residual = r.contour - r.area - r.point;
  return r;
}

Cochain dagger(const DoubleMap& m, const Cochain& f) {
  if (f.degree != 0) throw std::invalid_argument("dagger acts on functions");
  Cochain out = f;
  for (int v = 0; v < m.num_vertices(); ++v) out.v[v] = (m.kind[v] == Kind::primal ? 1.0 : -1.0) * std::conj(f.v[v]);
  return out;
}

PathIntegral integrate_diamond(const DoubleMap& m, const Cochain& g, const Cochain& z, int z0) {
  const int N = m.num_vertices();
  std::vector<std::vector<int>> adj(N);
  for (int s = 0; s < m.num_dedges(); ++s) {
    adj[m.dedges[s].p].push_back(s);
    adj[m.dedges[s].d].push_back(s);
  }
  auto step = [&](int s) {
    const DiamondEdge& e = m.dedges[s];
    return 0.5 * (g.v[e.p] + g.v[e.d]) * (z.v[e.d] - z.v[e.p]);
  };
  PathIntegral out;
  out.f = zeros(m, 0, Carrier::lambda);
  std::vector<char> seen(N, 0);
  seen[z0] = 1;
  std::queue<int> todo;
  todo.push(z0);
  while (!todo.empty()) {
    int u = todo.front();
    todo.pop();
    for (int s : adj[u]) {
      const DiamondEdge& e = m.dedges[s];
      int w = e.p == u ? e.d : e.p;
      if (seen[w]) continue;
      seen[w] = 1;
      out.f.v[w] = out.f.v[u] + (e.p == u ? step(s) : -step(s));
      todo.push(w);
    }
  }
  for (int v = 0; v < N; ++v)
    if (!seen[v]) throw std::invalid_argument("diamond is not connected");
  double scale = 1.0 + maxabs(out.f.v);
  for (int s = 0; s < m.num_dedges(); ++s) {
    const DiamondEdge& e = m.dedges[s];
    out.path_residual = std::max(out.path_residual, std::abs(out.f.v[e.d] - out.f.v[e.p] - step(s)) / scale);
  }
  return out;
}

Derivative derivative(const DoubleMap& m, const Cochain& f, const Cochain& z, double delta, int z0) {
  if (!(delta > 0)) throw std::invalid_argument("derivative needs a positive rhombus side");
  PathIntegral G = integrate_diamond(m, dagger(m, f), z, z0);
  Derivative d;
  d.fprime = dagger(m, G.f);
  d.fprime.v *= 4.0 / (delta * delta);
  d.path_residual = G.path_residual;
  double scale = 1.0 + maxabs(f.v);
  for (const DiamondEdge& e : m.dedges) {
    cplx lhs = f.v[e.d] - f.v[e.p];
    cplx rhs = 0.5 * (d.fprime.v[e.p] + d.fprime.v[e.d]) * (z.v[e.d] - z.v[e.p]);
    d.residual = std::max(d.residual, std::abs(lhs - rhs) / scale);
  }
  return d;
}

PathIntegral z_power(const DoubleMap& m, const Cochain& z, int k, int z0, PowerScaling s) {
  if (k < 0) throw std::invalid_argument("negative power");
  PathIntegral out;
  out.f = zeros(m, 0, Carrier::lambda);
  out.f.v.setOnes();
  for (int j = 1; j <= k; ++j) {
    Cochain g = out.f;
    g.v *= s == PowerScaling::literal ? 1.0 / j : static_cast<double>(j);
    PathIntegral next = integrate_diamond(m, g, z, z0);
    next.path_residual = std::max(next.path_residual, out.path_residual);
    out = std::move(next);
  }
  return out;
}

MinimalPolynomial minimal_polynomial(const DoubleMap& m, const Cochain& z, int z0, const std::vector<int>& quads,
                                     int max_degree) {
  std::set<int> vs;
  for (int q : quads)
    for (int v : m.quads[q].v) vs.insert(v);
  std::vector<int> U(vs.begin(), vs.end());
  const int n = static_cast<int>(U.size());
  if (max_degree < 0) max_degree = n;
  Eigen::MatrixXcd E(n, max_degree + 1);
  PathIntegral p;
  p.f = zeros(m, 0, Carrier::lambda);
  p.f.v.setOnes();
  for (int k = 0; k <= max_degree; ++k) {
    if (k > 0) {
      Cochain g = p.f;
      g.v /= static_cast<double>(k);
      p = integrate_diamond(m, g, z, z0);
    }
    for (int i = 0; i < n; ++i) E(i, k) = p.f.v[U[i]];
  }
  Eigen::VectorXd scale(max_degree + 1);
  Eigen::MatrixXcd En = E;
  for (int k = 0; k <= max_degree; ++k) {
    scale[k] = E.col(k).norm();
    if (scale[k] > 0) En.col(k) /= scale[k];
  }
  MinimalPolynomial out;
  auto rank_of = [&](int cols) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(En.leftCols(cols));
    const auto& sv = svd.singularValues();
    int r = 0;
    for (int i = 0; i < sv.size(); ++i)
      if (sv[i] > 1e-8 * sv[0]) ++r;
    return r;
  };
  out.rank = rank_of(max_degree + 1);
  for (int d = 1; d <= max_degree; ++d) {
    if (rank_of(d + 1) == d + 1) continue;
    Eigen::VectorXcd c = En.leftCols(d).completeOrthogonalDecomposition().solve(En.col(d));
    out.degree = d;
    out.coefficients.resize(d);
    for (int j = 0; j < d; ++j) out.coefficients[j] = scale[j] > 0 ? -c[j] * scale[d] / scale[j] : 0.0;
    Eigen::VectorXcd res = E.col(d);
    for (int j = 0; j < d; ++j) res += out.coefficients[j] * E.col(j);
    out.residual = maxabs(res) / std::max(1e-300, maxabs(E.col(d)));
    break;
  }
  return out;
}

}  // namespace discra
