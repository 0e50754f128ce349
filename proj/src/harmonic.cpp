#include "discra/harmonic.hpp"

#include <Eigen/SVD>
#include <numeric>
#include <queue>
#include <stdexcept>

namespace discra {

namespace {

struct UnionFind {
  std::vector<int> p;
  explicit UnionFind(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
  int find(int a) { return p[a] == a ? a : p[a] = find(p[a]); }
  void unite(int a, int b) { p[find(a)] = find(b); }
};

double maxabs(const Eigen::VectorXcd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

void require_closed(const DoubleMap& m, const char* what) {
  if (!m.closed()) throw std::invalid_argument(std::string(what) + ": surface has a boundary");
}

}  // namespace

WeightedGraph graph_of(const DoubleMap& m, Kind k, std::vector<int>* global) {
  std::vector<int> local(m.num_vertices(), -1), glob;
  for (int v = 0; v < m.num_vertices(); ++v)
    if (m.kind[v] == k) {
      local[v] = static_cast<int>(glob.size());
      glob.push_back(v);
    }
  WeightedGraph g;
  g.n = static_cast<int>(glob.size());
  const int Q = m.num_quads();
  for (int q = 0; q < Q; ++q) {
    int e = k == Kind::primal ? q : q + Q;
    g.edges.push_back({local[m.tail(e)], local[m.head(e)]});
    g.w.push_back(m.rho[e]);
  }
  if (global) *global = std::move(glob);
  return g;
}

Eigen::SparseMatrix<double> laplacian_matrix(const WeightedGraph& g) {
  std::vector<Eigen::Triplet<double>> t;
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    int a = g.edges[e][0], b = g.edges[e][1];
    double w = g.w[e];
    t.emplace_back(a, a, w);
    t.emplace_back(b, b, w);
    t.emplace_back(a, b, -w);
    t.emplace_back(b, a, -w);
  }
  Eigen::SparseMatrix<double> L(g.n, g.n);
  L.setFromTriplets(t.begin(), t.end());
  return L;
}

Cochain laplacian(const DoubleMap& m, const Cochain& f) {
  if (f.degree != 0) throw std::invalid_argument("laplacian: function expected");
  Cochain out = zeros(m, 0, Carrier::lambda);
  for (int e = 0; e < m.num_edges(); ++e) {
    int t = m.tail(e), h = m.head(e);
    cplx d = m.rho[e] * (f.v[t] - f.v[h]);
    out.v[t] += d;
    out.v[h] -= d;
  }
  return out;
}

Cochain laplacian_composed(const DoubleMap& m, const Cochain& f) {
  if (f.degree != 0) throw std::invalid_argument("laplacian_composed: function expected");
  // d of the 2-form *f vanishes, leaving -*d*d f; defined where the face x* exists
  Cochain g = f;
  g.carrier = Carrier::lambda;
  Cochain r = hodge_star(m, coboundary(m, hodge_star(m, coboundary(m, g))));
  r.v = -r.v;
  return r;
}

GraphSolution solve_dirichlet(const WeightedGraph& g, const std::vector<int>& marked, const std::vector<cplx>& values,
                              SolverKind kind) {
  if (marked.empty()) throw std::invalid_argument("Dirichlet problem needs a non-empty boundary set");
  if (marked.size() != values.size()) throw std::invalid_argument("boundary values do not match the marked set");
  std::vector<int> pos(g.n, -1);
  std::vector<char> is_marked(g.n, 0);
  for (int v : marked) {
    if (v < 0 || v >= g.n) throw std::invalid_argument("marked vertex out of range");
    is_marked[v] = 1;
  }
  UnionFind uf(g.n);
  for (auto e : g.edges) uf.unite(e[0], e[1]);
  std::vector<char> anchored(g.n, 0);
  for (int v : marked) anchored[uf.find(v)] = 1;
  for (int v = 0; v < g.n; ++v)
    if (!anchored[uf.find(v)]) throw std::invalid_argument("a connected component carries no boundary vertex");

  int ni = 0;
  for (int v = 0; v < g.n; ++v)
    if (!is_marked[v]) pos[v] = ni++;
  Eigen::VectorXcd f = Eigen::VectorXcd::Zero(g.n);
  for (std::size_t i = 0; i < marked.size(); ++i) f[marked[i]] = values[i];

  std::vector<Eigen::Triplet<double>> t;
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(ni);
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    int a = g.edges[e][0], b = g.edges[e][1];
    double w = g.w[e];
    if (a == b) continue;
    for (int s = 0; s < 2; ++s) {
      int u = s ? b : a, v = s ? a : b;
      if (pos[u] < 0) continue;
      t.emplace_back(pos[u], pos[u], w);
      if (pos[v] >= 0) t.emplace_back(pos[u], pos[v], -w);
      else rhs[pos[u]] += w * f[v];
    }
  }
  GraphSolution out;
  if (ni > 0) {
    Eigen::SparseMatrix<double> A(ni, ni);
    A.setFromTriplets(t.begin(), t.end());
    Eigen::VectorXd xr = solve_spd(A, rhs.real(), kind, &out.re);
    Eigen::VectorXd xi = solve_spd(A, rhs.imag(), kind, &out.im);
    for (int v = 0; v < g.n; ++v)
      if (pos[v] >= 0) f[v] = cplx(xr[pos[v]], xi[pos[v]]);
  }
  Eigen::VectorXcd Lf = laplacian_matrix(g).cast<cplx>() * f;
  double r = 0.0, wmax = 0.0;
  for (double w : g.w) wmax = std::max(wmax, w);
  for (int v = 0; v < g.n; ++v)
    if (!is_marked[v]) r = std::max(r, std::abs(Lf[v]));
  out.residual = r / std::max(1.0, maxabs(f) * wmax);
  out.f = std::move(f);
  return out;
}

std::vector<int> boundary_vertices(const DoubleMap& m, Kind k) {
  std::vector<int> b;
  for (int v = 0; v < m.num_vertices(); ++v)
    if (m.kind[v] == k && !m.interior(v)) b.push_back(v);
  return b;
}

HarmonicSolution solve_dirichlet(const DoubleMap& m, Kind k, const BoundaryValues& bd, SolverKind kind) {
  std::vector<int> glob;
  WeightedGraph g = graph_of(m, k, &glob);
  std::vector<int> local(m.num_vertices(), -1);
  for (int i = 0; i < g.n; ++i) local[glob[i]] = i;
  std::vector<int> marked;
  for (int v : bd.vertices) {
    if (v < 0 || v >= m.num_vertices() || m.kind[v] != k)
      throw std::invalid_argument("boundary vertex not in the requested complex");
    marked.push_back(local[v]);
  }
  GraphSolution s = solve_dirichlet(g, marked, bd.values, kind);
  HarmonicSolution out;
  out.f = zeros(m, 0, Carrier::lambda);
  for (int i = 0; i < g.n; ++i) out.f.v[glob[i]] = s.f[i];
  out.residual = s.residual;
  out.report = s.re;
  out.report.iterations += s.im.iterations;
  out.report.residual = std::max(s.re.residual, s.im.residual);
  return out;
}

NeumannSolution solve_neumann(const DoubleMap& m, const NeumannData& data, SolverKind kind) {
  TopologyReport top = validate(m);
  if (!top.ok() || top.euler != 1 || top.boundary_components != 1)
    throw std::invalid_argument("Neumann problem is only supported on discs");
  const int Q = m.num_quads();
  const int y0 = data.y0;
  if (y0 < 0 || y0 >= m.num_vertices() || m.kind[y0] != Kind::dual || m.interior(y0))
    throw std::invalid_argument("y0 must be a boundary dual vertex");
  if (data.alpha.degree != 1 || data.alpha.carrier != Carrier::lambda || data.alpha.v.size() != m.num_edges())
    throw std::invalid_argument("Neumann data must be a Lambda 1-form");
  std::vector<SignedEdge> st = m.star(y0);
  if (st.size() != 1) throw std::invalid_argument("y0 must carry exactly one half-edge");
  const int e0 = m.quad_of(st[0].edge);  // primal boundary edge dual to the half-edge at y0

  // boundary primal edges: one side is a boundary dual vertex
  std::vector<int> bedges;
  for (int q = 0; q < Q; ++q)
    if (!m.interior(m.quads[q].v[1]) || !m.interior(m.quads[q].v[3])) bedges.push_back(q);

  // integrate i*alpha along the boundary of Gamma, skipping e0
  auto istar = [&](int q) { return cplx(0, 1) * (-m.rho[q + Q]) * data.alpha.v[q + Q]; };
  std::vector<std::vector<std::pair<int, int>>> adj(m.num_vertices());
  for (int q : bedges)
    if (q != e0) {
      adj[m.tail(q)].push_back({q, m.head(q)});
      adj[m.head(q)].push_back({q, m.tail(q)});
    }
  BoundaryValues bd;
  std::vector<cplx> fb(m.num_vertices(), 0.0);
  std::vector<char> seen(m.num_vertices(), 0);
  int start = m.tail(e0);
  std::queue<int> todo;
  todo.push(start);
  seen[start] = 1;
  while (!todo.empty()) {
    int v = todo.front();
    todo.pop();
    bd.vertices.push_back(v);
    bd.values.push_back(fb[v]);
    for (auto [q, w] : adj[v]) {
      if (seen[w]) continue;
      seen[w] = 1;
      fb[w] = fb[v] + (m.tail(q) == v ? istar(q) : -istar(q));
      todo.push(w);
    }
  }
  for (int v : boundary_vertices(m, Kind::primal))
    if (!seen[v]) throw std::invalid_argument("boundary of Gamma is not a single cycle");

  HarmonicSolution F = solve_dirichlet(m, Kind::primal, bd, kind);

  // integrate i*dF over Gamma*
  NeumannSolution out;
  out.conjugate = F.f;
  out.f = zeros(m, 0, Carrier::lambda);
  auto df = [&](int q) { return cplx(0, 1) * m.rho[q] * (F.f.v[m.head(q)] - F.f.v[m.tail(q)]); };
  std::vector<std::vector<std::pair<int, int>>> dadj(m.num_vertices());
  for (int q = 0; q < Q; ++q) {
    dadj[m.tail(q + Q)].push_back({q, m.head(q + Q)});
    dadj[m.head(q + Q)].push_back({q, m.tail(q + Q)});
  }
  std::fill(seen.begin(), seen.end(), 0);
  seen[y0] = 1;
  out.f.v[y0] = data.f0;
  todo.push(y0);
  double closure = 0.0;
  while (!todo.empty()) {
    int v = todo.front();
    todo.pop();
    for (auto [q, w] : dadj[v]) {
      cplx next = out.f.v[v] + (m.tail(q + Q) == v ? df(q) : -df(q));
      if (!seen[w]) {
        seen[w] = 1;
        out.f.v[w] = next;
        todo.push(w);
      } else {
        closure = std::max(closure, std::abs(out.f.v[w] - next));
      }
    }
  }
  double scale = 1.0 + maxabs(out.f.v);
  for (int q : bedges) {
    int e = q + Q;
    cplx d = out.f.v[m.head(e)] - out.f.v[m.tail(e)];
    double r = std::abs(d - data.alpha.v[e]);
    if (q == e0) out.flux_residual = r;
    else out.data_residual = std::max(out.data_residual, r);
  }
  Cochain lap = laplacian(m, out.f);
  double h = closure;
  for (int v = 0; v < m.num_vertices(); ++v)
    if (m.kind[v] == Kind::dual && m.interior(v)) h = std::max(h, std::abs(lap.v[v]));
  out.harmonic_residual = h / scale;
  return out;
}

Cochain solve_poisson(const DoubleMap& m, Kind k, const Cochain& rhs, const std::vector<int>& fixed, SolverKind kind) {
  Cochain out = zeros(m, 0, Carrier::lambda);
  std::vector<int> glob;
  WeightedGraph g = graph_of(m, k, &glob);
  if (g.n == 0) return out;
  std::vector<int> local(m.num_vertices(), -1);
  for (int i = 0; i < g.n; ++i) local[glob[i]] = i;
  std::vector<char> is_fixed(g.n, 0);
  for (int v : fixed) {
    if (v < 0 || v >= m.num_vertices() || m.kind[v] != k) throw std::invalid_argument("fixed vertex not in the complex");
    is_fixed[local[v]] = 1;
  }
  UnionFind uf(g.n);
  for (auto e : g.edges) uf.unite(e[0], e[1]);
  std::vector<char> anchored(g.n, 0);
  for (int v = 0; v < g.n; ++v)
    if (is_fixed[v]) anchored[uf.find(v)] = 1;
  for (int v = 0; v < g.n; ++v)
    if (!anchored[uf.find(v)]) {
      anchored[uf.find(v)] = 1;
      is_fixed[v] = 1;
    }
  std::vector<int> pos(g.n, -1);
  int ni = 0;
  for (int v = 0; v < g.n; ++v)
    if (!is_fixed[v]) pos[v] = ni++;
  if (ni == 0) return out;
  std::vector<Eigen::Triplet<double>> t;
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    int a = g.edges[e][0], b = g.edges[e][1];
    if (a == b) continue;
    for (int s = 0; s < 2; ++s) {
      int u = s ? b : a, v = s ? a : b;
      if (pos[u] < 0) continue;
      t.emplace_back(pos[u], pos[u], g.w[e]);
      if (pos[v] >= 0) t.emplace_back(pos[u], pos[v], -g.w[e]);
    }
  }
  Eigen::SparseMatrix<double> A(ni, ni);
  A.setFromTriplets(t.begin(), t.end());
  Eigen::VectorXcd b(ni);
  for (int v = 0; v < g.n; ++v)
    if (pos[v] >= 0) b[pos[v]] = rhs.v[glob[v]];
  Eigen::VectorXd xr = solve_spd(A, b.real(), kind), xi = solve_spd(A, b.imag(), kind);
  for (int v = 0; v < g.n; ++v)
    if (pos[v] >= 0) out.v[glob[v]] = cplx(xr[pos[v]], xi[pos[v]]);
  return out;
}

Cochain solve_closed_laplacian(const DoubleMap& m, const Cochain& rhs, SolverKind kind) {
  Cochain out = solve_poisson(m, Kind::primal, rhs, {}, kind);
  out.v += solve_poisson(m, Kind::dual, rhs, {}, kind).v;
  return out;
}

namespace {

// Projection of a 0-form or Lambda 2-form onto per-complex constants.
Eigen::VectorXcd kind_means(const DoubleMap& m, const Eigen::VectorXcd& v) {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(v.size());
  for (Kind k : {Kind::primal, Kind::dual}) {
    cplx s = 0.0;
    int n = 0;
    for (int i = 0; i < m.num_vertices(); ++i)
      if (m.kind[i] == k) s += v[i], ++n;
    if (n == 0) continue;
    for (int i = 0; i < m.num_vertices(); ++i)
      if (m.kind[i] == k) out[i] = s / static_cast<double>(n);
  }
  return out;
}

Cochain exact_part(const DoubleMap& m, const Cochain& a) {
  Cochain b = zeros(m, 0, Carrier::lambda);
  for (int e = 0; e < m.num_edges(); ++e) {
    cplx w = m.rho[e] * a.v[e];
    b.v[m.head(e)] += w;
    b.v[m.tail(e)] -= w;
  }
  // normal equations d^T W d f = d^T W a, and d^T W d is the Laplacian
  Cochain f = solve_closed_laplacian(m, b);
  return coboundary(m, f);
}

}  // namespace

HodgeSplit hodge_decompose(const DoubleMap& m, const Cochain& c) {
  require_closed(m, "hodge_decompose");
  if (c.carrier != Carrier::lambda) throw std::invalid_argument("hodge_decompose: Lambda cochain expected");
  HodgeSplit h{zeros(m, c.degree, Carrier::lambda), zeros(m, c.degree, Carrier::lambda),
               zeros(m, c.degree, Carrier::lambda)};
  if (c.degree == 0) {
    h.harmonic.v = kind_means(m, c.v);
    h.coexact.v = c.v - h.harmonic.v;
  } else if (c.degree == 2) {
    h.harmonic.v = kind_means(m, c.v);
    h.exact.v = c.v - h.harmonic.v;
  } else {
    h.exact = exact_part(m, c);
    Cochain s = exact_part(m, hodge_star(m, c));
    h.coexact = hodge_star(m, s);
    h.coexact.v = -h.coexact.v;
    h.harmonic.v = c.v - h.exact.v - h.coexact.v;
  }
  return h;
}

namespace {

SubspaceBasis kernel_basis(const DoubleMap& m, const Eigen::MatrixXcd& M) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const int cols = static_cast<int>(M.cols());
  SubspaceBasis out;
  double top = sv.size() ? sv[0] : 1.0;
  out.cutoff = 1e-9 * top;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv[i] > out.cutoff) ++rank;
    if (sv[i] > out.cutoff / 10 && sv[i] < 10 * out.cutoff) out.ambiguous = true;
  }
  for (int i = static_cast<int>(sv.size()) - 1; i >= 0; --i) out.singular_values.push_back(sv[i]);
  for (int j = rank; j < cols; ++j) {
    Cochain c = make_cochain(1, Carrier::lambda, svd.matrixV().col(j));
    for (const Cochain& b : out.basis) c.v -= inner_product(m, c, b) * b.v;
    double n = std::sqrt(inner_product(m, c, c).real());
    c.v /= n;
    out.basis.push_back(c);
  }
  return out;
}

}  // namespace

SubspaceBasis harmonic_basis(const DoubleMap& m) {
  require_closed(m, "harmonic_basis");
  const int E = m.num_edges(), V = m.num_vertices();
  Eigen::MatrixXcd d = operator_matrix(V, E, [&](const Eigen::VectorXcd& x) -> Eigen::VectorXcd {
    return coboundary(m, make_cochain(1, Carrier::lambda, x)).v;
  });
  Eigen::MatrixXcd ds = operator_matrix(V, E, [&](const Eigen::VectorXcd& x) -> Eigen::VectorXcd {
    return codifferential(m, make_cochain(1, Carrier::lambda, x)).v;
  });
  Eigen::MatrixXcd M(2 * V, E);
  M << d, ds;
  return kernel_basis(m, M);
}

SubspaceBasis holomorphic_basis(const DoubleMap& m) {
  require_closed(m, "holomorphic_basis");
  const int E = m.num_edges(), V = m.num_vertices();
  Eigen::MatrixXcd d = operator_matrix(V, E, [&](const Eigen::VectorXcd& x) -> Eigen::VectorXcd {
    return coboundary(m, make_cochain(1, Carrier::lambda, x)).v;
  });
  Eigen::MatrixXcd s = operator_matrix(E, E, [&](const Eigen::VectorXcd& x) -> Eigen::VectorXcd {
    return hodge_star(m, make_cochain(1, Carrier::lambda, x)).v + cplx(0, 1) * x;
  });
  Eigen::MatrixXcd M(V + E, E);
  M << d, s;
  return kernel_basis(m, M);
}

cplx weyl_residual(const DoubleMap& m, const Cochain& f, const Cochain& g) {
  if (f.degree != 0 || g.degree != 0) throw std::invalid_argument("weyl_residual: functions expected");
  for (int v = 0; v < m.num_vertices(); ++v) {
    if (g.v[v] == cplx(0.0)) continue;
    bool ok = m.interior(v);
    for (SignedEdge s : m.star(v)) {
      int w = s.sign > 0 ? m.head(s.edge) : m.tail(s.edge);
      ok = ok && m.interior(w);
    }
    if (!ok) throw std::invalid_argument("weyl_residual: support of g touches the boundary");
  }
  Cochain lg = laplacian(m, g);
  cplx s = 0.0;
  for (int v = 0; v < m.num_vertices(); ++v)
    if (m.interior(v)) s += f.v[v] * lg.v[v];
  return s;
}

std::vector<SignedEdge> region_boundary(const DoubleMap& m, const std::vector<int>& quads) {
  std::vector<char> in(m.num_quads(), 0);
  for (int q : quads) in[q] = 1;
  std::vector<SignedEdge> out;
  for (int q : quads)
    for (int k = 0; k < 4; ++k) {
      const DiamondEdge& de = m.dedges[m.quads[q].side[k]];
      int other = de.quads[0] == q ? de.quads[1] : de.quads[0];
      if (other < 0 || !in[other]) out.push_back({m.quads[q].side[k], m.side_sign(q, k)});
    }
  return out;
}

GreenReport green_identity_residual(const DoubleMap& m, const std::vector<int>& quads, const Cochain& f,
                                    const Cochain& g, const Cochain& bf, const Cochain& bg) {
  GreenReport r;
  Cochain fd = f, gd = g;
  fd.carrier = gd.carrier = Carrier::diamond;
  Cochain a1 = wedge(m, fd, coboundary(m, bg)), a2 = wedge(m, gd, coboundary(m, bf));
  for (int q : quads) r.area += a1.v[q] - a2.v[q];
  for (SignedEdge s : region_boundary(m, quads)) {
    const DiamondEdge& de = m.dedges[s.edge];
    cplx af = 0.5 * (f.v[de.p] + f.v[de.d]), ag = 0.5 * (g.v[de.p] + g.v[de.d]);
    r.contour += static_cast<double>(s.sign) * (af * bg.v[s.edge] - ag * bf.v[s.edge]);
  }
  r.residual = r.area - r.contour;
  return r;
}

GreenReport green_identity_residual(const DoubleMap& m, const std::vector<int>& quads, const Cochain& f,
                                    const Cochain& g) {
  Cochain fl = f, gl = g;
  fl.carrier = gl.carrier = Carrier::lambda;
  BInverse bf = pseudo_inverse_A(m, hodge_star(m, coboundary(m, fl)));
  BInverse bg = pseudo_inverse_A(m, hodge_star(m, coboundary(m, gl)));
  GreenReport r = green_identity_residual(m, quads, f, g, bf.form, bg.form);
  r.b_residual = std::max(bf.residual, bg.residual);
  r.reliable = r.b_residual <= 1e-9 * (1.0 + maxabs(f.v) + maxabs(g.v));
  return r;
}

}  // namespace discra
