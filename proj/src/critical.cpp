#include "discra/critical.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace discra {

namespace {

constexpr double kPi = std::numbers::pi;

double cross(cplx a, cplx b) { return a.real() * b.imag() - a.imag() * b.real(); }
double dot(cplx a, cplx b) { return a.real() * b.real() + a.imag() * b.imag(); }

// Interior angle at c[k], in (0, 2 pi).
double corner_angle(const std::array<cplx, 4>& c, int k) {
  cplx a = c[(k + 3) % 4] - c[k], b = c[(k + 1) % 4] - c[k];
  double t = std::arg(a / b);
  if (t <= 0.0) t += 2.0 * kPi;
  return t;
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

}  // namespace

const char* criticality_name(Criticality c) {
  switch (c) {
    case Criticality::critical: return "critical";
    case Criticality::semi_critical: return "semi-critical";
    default: return "none";
  }
}

std::array<cplx, 4> PlanarEmbedding::quad(const DoubleMap& m, int q) const {
  if (!corners.empty()) return corners[q];
  const Quad& Qd = m.quads[q];
  return {pos[Qd.v[0]], pos[Qd.v[1]], pos[Qd.v[2]], pos[Qd.v[3]]};
}

std::vector<double> quad_residuals(const DoubleMap& m, const PlanarEmbedding& emb) {
  const int Q = m.num_quads();
  std::vector<double> r(Q);
  for (int q = 0; q < Q; ++q) {
    auto c = emb.quad(m, q);
    double lo = 1e300, hi = 0.0;
    for (int k = 0; k < 4; ++k) {
      double s = std::abs(c[(k + 1) % 4] - c[k]);
      lo = std::min(lo, s), hi = std::max(hi, s);
    }
    cplx d0 = c[2] - c[0], d1 = c[3] - c[1];
    double orth = std::abs(std::real(d0 * std::conj(d1))) / (std::abs(d0) * std::abs(d1));
    double ratio = std::abs(std::abs(d1) / std::abs(d0) - m.rho[q]) / m.rho[q];
    r[q] = std::max({(hi - lo) / hi, orth, ratio});
  }
  return r;
}

ClassifyReport classify_map(const DoubleMap& m, const PlanarEmbedding& emb, double tol) {
  if (emb.corners.empty() && static_cast<int>(emb.pos.size()) != m.num_vertices())
    throw std::invalid_argument("embedding does not cover every vertex");
  const int Q = m.num_quads();
  ClassifyReport rep;
  rep.angles.phi.resize(Q);
  double smin = std::numeric_limits<double>::infinity(), smax = 0.0;
  std::vector<int> bad_semi;
  std::string first_reason;
  std::vector<std::array<double, 4>> sides(Q);
  for (int q = 0; q < Q; ++q) {
    auto c = emb.quad(m, q);
    cplx d1 = c[2] - c[0], d2 = c[3] - c[1];
    double l1 = std::abs(d1), l2 = std::abs(d2);
    double area = cross(d1, d2);
    if (l1 * l2 == 0.0 || std::abs(area) <= 1e-14 * l1 * l2) throw std::invalid_argument("degenerate quad " + std::to_string(q));
    double cosang = std::abs(dot(d1, d2)) / (l1 * l2);
    double ratio_err;
    if (m.has_lengths())
      ratio_err = std::max(std::abs(l1 / m.len[q] - 1.0), std::abs(l2 / m.len[q + Q] - 1.0));
    else
      ratio_err = std::abs(l2 / (l1 * m.rho[q]) - 1.0);
    rep.max_orthogonality = std::max(rep.max_orthogonality, cosang);
    rep.max_ratio_error = std::max(rep.max_ratio_error, ratio_err);
    std::string why;
    if (area < 0.0) why = "quad " + std::to_string(q) + " is not direct";
    else if (cosang > tol) why = "quad " + std::to_string(q) + " has diagonals at cos " + fmt(cosang);
    else if (ratio_err > tol) why = "quad " + std::to_string(q) + " diagonal lengths off by " + fmt(ratio_err);
    if (!why.empty()) {
      bad_semi.push_back(q);
      if (first_reason.empty()) first_reason = why;
    }
    for (int k = 0; k < 4; ++k) {
      rep.angles.phi[q][k] = corner_angle(c, k);
      sides[q][k] = std::abs(c[(k + 1) % 4] - c[k]);
      smin = std::min(smin, sides[q][k]);
      smax = std::max(smax, sides[q][k]);
    }
  }
  rep.side_spread = Q ? (smax - smin) / smax : 0.0;
  rep.angles.delta = smax;

  rep.conic.assign(m.num_vertices(), std::numeric_limits<double>::quiet_NaN());
  for (int v = 0; v < m.num_vertices(); ++v) {
    if (!m.interior(v)) continue;
    double t = 0.0;
    for (const Corner& c : m.rings[v]) t += rep.angles.phi[c.quad][c.k];
    rep.conic[v] = t;
    if (std::abs(t - 2.0 * kPi) > tol) rep.non_flat.push_back(v);
    double r = std::fmod(t - 2.0 * kPi, 4.0 * kPi);
    if (r >= 2.0 * kPi) r -= 4.0 * kPi;
    if (r < -2.0 * kPi) r += 4.0 * kPi;
    if (std::abs(r) > tol) rep.spin_obstructed.push_back(v);
  }

  if (!bad_semi.empty()) {
    rep.verdict = Criticality::none;
    rep.violating_quads = bad_semi;
    rep.reason = first_reason;
  } else if (rep.side_spread > tol) {
    rep.verdict = Criticality::semi_critical;
    for (int q = 0; q < Q; ++q)
      for (int k = 0; k < 4; ++k)
        if (std::abs(sides[q][k] - sides[0][0]) > tol * smax) {
          rep.violating_quads.push_back(q);
          break;
        }
    rep.reason = "diamond sides spread " + fmt(rep.side_spread);
  } else {
    rep.verdict = Criticality::critical;
    rep.angles.delta = 0.5 * (smin + smax);
  }
  return rep;
}

Development develop(const DoubleMap& m, double delta) {
  const int Q = m.num_quads();
  Development out;
  out.emb.corners.assign(Q, {});
  std::vector<char> placed(Q, 0);
  auto angle = [&](int q, int k) {
    double a = 2.0 * std::atan(m.rho[q]);
    return k % 2 == 0 ? a : kPi - a;
  };
  // complete a rhombus from the corners k and k+1
  auto complete = [&](int q, int k, cplx a, cplx b) {
    std::array<cplx, 4> c;
    c[k] = a;
    c[(k + 1) % 4] = b;
    cplx u = b - a;
    cplx w = u * std::polar(1.0, kPi - angle(q, (k + 1) % 4));
    c[(k + 2) % 4] = b + w;
    c[(k + 3) % 4] = a + w;
    return c;
  };
  const double tol = 1e-9 * delta;
  std::vector<cplx> trans;
  for (int start = 0; start < Q; ++start) {
    if (placed[start]) continue;
    double h = angle(start, 0) / 2.0;
    out.emb.corners[start] = complete(start, 0, 0.0, std::polar(delta, -h));
    placed[start] = 1;
    std::deque<int> queue{start};
    while (!queue.empty()) {
      int q = queue.front();
      queue.pop_front();
      const auto& c = out.emb.corners[q];
      for (int k = 0; k < 4; ++k) {
        const DiamondEdge& de = m.dedges[m.quads[q].side[k]];
        for (int q2 : de.quads) {
          if (q2 < 0) continue;
          for (int k2 = 0; k2 < 4; ++k2) {
            if (m.quads[q2].side[k2] != m.quads[q].side[k] || (q2 == q && k2 == k)) continue;
            if (m.quads[q2].v[k2] != m.quads[q].v[(k + 1) % 4]) continue;
            cplx a = c[(k + 1) % 4], b = c[k];
            if (!placed[q2]) {
              out.emb.corners[q2] = complete(q2, k2, a, b);
              placed[q2] = 1;
              queue.push_back(q2);
            } else {
              cplx d0 = out.emb.corners[q2][k2] - a, d1 = out.emb.corners[q2][(k2 + 1) % 4] - b;
              out.rotation_defect = std::max(out.rotation_defect, std::abs(d0 - d1));
              if (std::abs(d0) > tol) trans.push_back(d0);
            }
          }
        }
      }
    }
  }
  out.emb.pos.assign(m.num_vertices(), cplx(std::numeric_limits<double>::quiet_NaN(), 0.0));
  std::vector<char> seen(m.num_vertices(), 0);
  for (int q = 0; q < Q; ++q)
    for (int k = 0; k < 4; ++k) {
      int v = m.quads[q].v[k];
      if (!seen[v]) {
        seen[v] = 1;
        out.emb.pos[v] = out.emb.corners[q][k];
      } else if (std::abs(out.emb.pos[v] - out.emb.corners[q][k]) > tol) {
        out.single_valued = false;
      }
    }
  // deduplicate translations up to sign
  for (cplx t : trans) {
    if (t.real() < -tol || (std::abs(t.real()) <= tol && t.imag() < 0)) t = -t;
    bool dup = false;
    for (cplx s : out.translations)
      if (std::abs(s - t) <= 1e3 * tol) dup = true;
    if (!dup) out.translations.push_back(t);
  }
  if (out.rotation_defect <= tol && !out.translations.empty()) {
    std::vector<cplx> ts = out.translations;
    std::sort(ts.begin(), ts.end(), [](cplx a, cplx b) { return std::abs(a) < std::abs(b); });
    cplx t1 = ts[0], t2 = 0.0;
    for (cplx t : ts)
      if (std::abs(cross(t1, t)) > 1e-6 * std::abs(t1) * std::abs(t)) {
        t2 = t;
        break;
      }
    if (t2 != 0.0) {
      if (cross(t1, t2) < 0) t2 = -t2;
      out.emb.periods = {t1, t2};
    }
  }
  return out;
}

namespace {

void check_angle(double a, const char* what) {
  if (!(a > 0.0 && a < kPi)) throw std::invalid_argument(std::string(what) + " must lie in (0, pi), got " + fmt(a));
}

}  // namespace

Lattice lattice_from_complex(const CellComplex& g, const std::vector<double>& rho, bool torus) {
  Lattice L;
  L.primal = g;
  L.map = build_double(g, rho);
  Development D = develop(L.map);
  if (D.rotation_defect > 1e-9) throw std::logic_error("lattice parameters are not flat");
  if (torus && D.emb.periods.size() != 2) throw std::logic_error("torus development found no periods");
  L.emb = D.emb;
  if (!torus) L.emb.corners.clear();
  const int Q = L.map.num_quads();
  std::vector<double> len(2 * Q);
  for (int q = 0; q < Q; ++q) {
    auto c = D.emb.corners[q];
    len[q] = std::abs(c[2] - c[0]);
    len[q + Q] = std::abs(c[3] - c[1]);
  }
  L.map.len = len;
  return L;
}

Lattice rectangular_period2(const std::array<double, 4>& rho, int nx, int ny, bool torus) {
  double s = 0.0;
  for (double r : rho) {
    if (!(r > 0.0)) throw std::invalid_argument("rectangular_period2: rho must be positive");
    s += std::atan(r);
  }
  if (std::abs(s - kPi) > 1e-12)
    throw std::invalid_argument("rectangular_period2 needs arctan rho_1 + arctan rho_2 + arctan rho_3 + arctan rho_4 = pi, got " +
                                fmt(s));
  bool period_one = rho[0] == rho[2] && rho[1] == rho[3];
  if (torus && !period_one && (nx % 2 || ny % 2))
    throw std::invalid_argument("rectangular_period2 on a torus needs even extents");
  CellComplex g = square_grid(nx, ny, torus);
  const int vx = torus ? nx : nx + 1, vy = torus ? ny : ny + 1;
  const int nh = nx * vy;
  std::vector<double> r(g.edges.size());
  for (int e = 0; e < static_cast<int>(g.edges.size()); ++e) {
    if (e < nh) {
      int i = e % nx, j = e / nx;
      r[e] = (i + j) % 2 == 0 ? rho[0] : rho[2];
    } else {
      int i = (e - nh) % vx, j = (e - nh) / vx;
      r[e] = (i + j) % 2 == 0 ? rho[1] : rho[3];
    }
  }
  return lattice_from_complex(g, r, torus);
}

Lattice square_lattice(double alpha, int nx, int ny, bool torus) {
  check_angle(alpha, "square lattice angle");
  double t = std::tan(alpha / 2.0);
  return rectangular_period2({1.0, t, 1.0, 1.0 / t}, nx, ny, torus);
}

Lattice triangular_lattice(double alpha, double beta, int nx, int ny, bool torus) {
  check_angle(alpha, "triangular lattice angle alpha");
  check_angle(beta, "triangular lattice angle beta");
  check_angle(kPi - alpha - beta, "triangular lattice angle pi - alpha - beta");
  CellComplex g = triangular_grid(nx, ny, torus);
  const int vx = torus ? nx : nx + 1, vy = torus ? ny : ny + 1;
  const int nh = nx * vy, nv = vx * ny;
  const double a = std::tan(alpha / 2.0), b = std::tan(beta / 2.0), c = std::tan((kPi - alpha - beta) / 2.0);
  std::vector<double> r(g.edges.size());
  for (int e = 0; e < static_cast<int>(g.edges.size()); ++e) r[e] = e < nh ? a : (e < nh + nv ? b : c);
  return lattice_from_complex(g, r, torus);
}

Lattice square_diamond(int n, double delta) {
  if (n < 1 || !(delta > 0.0)) throw std::invalid_argument("square_diamond needs n >= 1 and delta > 0");
  const int w = n + 1;
  auto id = [&](int i, int j) { return i + w * j; };
  std::vector<Kind> kinds(w * w);
  std::vector<cplx> pos(w * w);
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) {
      kinds[id(i, j)] = (i + j) % 2 == 0 ? Kind::primal : Kind::dual;
      pos[id(i, j)] = delta * cplx(i, j);
    }
  std::vector<std::array<int, 4>> quads;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      if ((i + j) % 2 == 0)
        quads.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
      else
        quads.push_back({id(i + 1, j), id(i + 1, j + 1), id(i, j + 1), id(i, j)});
    }
  std::vector<double> len(2 * quads.size(), delta * std::sqrt(2.0));
  Lattice L;
  L.map = from_quads(kinds, quads, std::vector<double>(quads.size(), 1.0), {}, len);
  L.emb.pos = pos;
  L.primal = extract(L.map, Kind::primal);
  return L;
}

namespace {

double orient(cplx a, cplx b, cplx c) { return cross(b - a, c - a); }

// > 0 when d lies inside the circle through the counterclockwise a, b, c
double incircle(cplx a, cplx b, cplx c, cplx d) {
  cplx A = a - d, B = b - d, C = c - d;
  double a2 = std::norm(A), b2 = std::norm(B), c2 = std::norm(C);
  return A.real() * (B.imag() * c2 - b2 * C.imag()) - A.imag() * (B.real() * c2 - b2 * C.real()) +
         a2 * (B.real() * C.imag() - B.imag() * C.real());
}

cplx circumcenter(cplx a, cplx b, cplx c) {
  cplx B = b - a, C = c - a;
  double d = 2.0 * cross(B, C);
  double bx = std::norm(B), cx = std::norm(C);
  return a + cplx((C.imag() * bx - B.imag() * cx) / d, (B.real() * cx - C.real() * bx) / d);
}

}  // namespace

VoronoiResult voronoi_delaunay(const std::vector<cplx>& points) {
  const int n = static_cast<int>(points.size());
  if (n < 3) throw std::invalid_argument("voronoi_delaunay needs at least 3 points");
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto lex = [&](int a, int b) {
    if (points[a].real() != points[b].real()) return points[a].real() < points[b].real();
    return points[a].imag() < points[b].imag();
  };
  std::sort(order.begin(), order.end(), lex);
  for (int i = 0; i + 1 < n; ++i)
    if (points[order[i]] == points[order[i + 1]]) throw std::invalid_argument("duplicate input points");
  double scale = 0.0;
  for (const cplx& p : points) scale = std::max(scale, std::abs(p - points[order[0]]));
  const double eps = 1e-12 * scale * scale;

  // sweep triangulation in lexicographic order
  int first = -1;
  for (int i = 2; i < n; ++i)
    if (std::abs(orient(points[order[0]], points[order[1]], points[order[i]])) > eps) {
      first = i;
      break;
    }
  if (first < 0) throw std::invalid_argument("input points are collinear");
  std::vector<std::array<int, 3>> tris;
  {
    int p = order[first];
    double o = orient(points[order[0]], points[order[first - 1]], points[p]);
    for (int i = 0; i + 1 < first; ++i) {
      int a = order[i], b = order[i + 1];
      if (o > 0) tris.push_back({a, b, p});
      else tris.push_back({b, a, p});
    }
  }
  // hull as a counterclockwise cycle
  std::vector<int> hull;
  {
    int p = order[first];
    double o = orient(points[order[0]], points[order[first - 1]], points[p]);
    if (o > 0) {
      for (int i = 0; i < first; ++i) hull.push_back(order[i]);
      hull.push_back(p);
    } else {
      hull.push_back(p);
      for (int i = first - 1; i >= 0; --i) hull.push_back(order[i]);
    }
  }
  for (int idx = first + 1; idx < n; ++idx) {
    int p = order[idx];
    const int h = static_cast<int>(hull.size());
    std::vector<char> vis(h, 0);
    for (int i = 0; i < h; ++i) vis[i] = orient(points[hull[i]], points[hull[(i + 1) % h]], points[p]) < -eps;
    int s = -1;
    for (int i = 0; i < h; ++i)
      if (vis[i] && !vis[(i + h - 1) % h]) s = i;
    if (s < 0) throw std::logic_error("sweep lost the hull");
    std::vector<int> nh;
    int i = s;
    while (vis[i]) {
      tris.push_back({hull[(i + 1) % h], hull[i], p});
      i = (i + 1) % h;
    }
    // hull[s] .. hull[i] were the visible chain; keep its endpoints
    for (int j = i; j != s; j = (j + 1) % h) nh.push_back(hull[j]);
    nh.push_back(hull[s]);
    nh.push_back(p);
    hull = nh;
  }

  // Lawson flips; cocircular ties keep the current diagonal
  std::map<std::pair<int, int>, int> owner;
  auto reg = [&](int t) {
    for (int k = 0; k < 3; ++k) owner[{tris[t][k], tris[t][(k + 1) % 3]}] = t;
  };
  for (int t = 0; t < static_cast<int>(tris.size()); ++t) reg(t);
  std::vector<std::pair<int, int>> stack;
  for (const auto& kv : owner) stack.push_back(kv.first);
  while (!stack.empty()) {
    auto [a, b] = stack.back();
    stack.pop_back();
    auto i1 = owner.find({a, b}), i2 = owner.find({b, a});
    if (i1 == owner.end() || i2 == owner.end()) continue;
    int t1 = i1->second, t2 = i2->second;
    int c = -1, d = -1;
    for (int k = 0; k < 3; ++k) {
      if (tris[t1][k] != a && tris[t1][k] != b) c = tris[t1][k];
      if (tris[t2][k] != a && tris[t2][k] != b) d = tris[t2][k];
    }
    double L = std::max({std::abs(points[a] - points[d]), std::abs(points[b] - points[d]), std::abs(points[c] - points[d])});
    if (incircle(points[a], points[b], points[c], points[d]) <= 1e-10 * L * L * L * L) continue;
    for (int t : {t1, t2})
      for (int k = 0; k < 3; ++k) owner.erase({tris[t][k], tris[t][(k + 1) % 3]});
    tris[t1] = {c, a, d};
    tris[t2] = {d, b, c};
    reg(t1);
    reg(t2);
    stack.push_back({a, d});
    stack.push_back({d, b});
    stack.push_back({b, c});
    stack.push_back({c, a});
  }

  VoronoiResult out;
  out.triangles = tris;
  const int T = static_cast<int>(tris.size());
  std::vector<cplx> cc(T);
  for (int t = 0; t < T; ++t) cc[t] = circumcenter(points[tris[t][0]], points[tris[t][1]], points[tris[t][2]]);
  std::vector<int> parent(T);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
  for (const auto& kv : owner) {
    auto [a, b] = kv.first;
    if (a > b) continue;
    auto it = owner.find({b, a});
    if (it == owner.end()) continue;
    int t1 = kv.second, t2 = it->second;
    double L = std::abs(points[a] - points[b]);
    if (std::abs(cc[t1] - cc[t2]) <= 1e-9 * L) {
      out.merged_edges.push_back({a, b});
      parent[find(t1)] = find(t2);
    }
  }
  // faces: boundary cycles of each merged group
  std::map<int, int> group_face;
  std::vector<std::map<int, int>> next;
  std::vector<cplx> centre;
  for (int t = 0; t < T; ++t) {
    int r = find(t);
    if (!group_face.count(r)) {
      group_face[r] = static_cast<int>(next.size());
      next.emplace_back();
      centre.push_back(cc[r]);
    }
    int f = group_face[r];
    for (int k = 0; k < 3; ++k) {
      int a = tris[t][k], b = tris[t][(k + 1) % 3];
      auto it = owner.find({b, a});
      if (it != owner.end() && find(it->second) == r) continue;
      next[f][a] = b;
    }
  }
  CellComplex g;
  g.num_vertices = n;
  std::map<std::pair<int, int>, int> eid;
  for (auto& nx : next) {
    std::vector<SignedEdge> cyc;
    int start = nx.begin()->first, a = start;
    do {
      int b = nx.at(a);
      auto key = std::make_pair(std::min(a, b), std::max(a, b));
      auto it = eid.find(key);
      if (it == eid.end()) {
        it = eid.emplace(key, static_cast<int>(g.edges.size())).first;
        g.edges.push_back({key.first, key.second});
      }
      cyc.push_back({it->second, a < b ? 1 : -1});
      a = b;
    } while (a != start);
    g.faces.push_back(cyc);
  }
  const int nE = static_cast<int>(g.edges.size());
  const int nF = static_cast<int>(g.faces.size());

  // dual positions: circumcentres, and for hull edges a point on the outer mediatrix
  std::vector<int> left(nE, -1), right(nE, -1);
  for (int f = 0; f < nF; ++f)
    for (SignedEdge s : g.faces[f]) (s.sign > 0 ? left : right)[s.edge] = f;
  std::vector<cplx> outer(nE);
  for (int e = 0; e < nE; ++e) {
    if (left[e] >= 0 && right[e] >= 0) continue;
    int f = left[e] >= 0 ? left[e] : right[e];
    cplx a = points[g.edges[e][0]], b = points[g.edges[e][1]];
    if (left[e] < 0) std::swap(a, b);   // now the face lies to the left of a -> b
    cplx mid = 0.5 * (a + b), nrm = (b - a) * cplx(0, -1) / std::abs(b - a);
    double s = dot(centre[f] - mid, nrm);
    double t = s < 0.0 ? -s : s + 0.5 * std::abs(b - a);
    outer[e] = mid + t * nrm;
  }
  std::vector<double> rho(nE), len(2 * nE);
  for (int e = 0; e < nE; ++e) {
    cplx y = right[e] >= 0 ? centre[right[e]] : outer[e];
    cplx yp = left[e] >= 0 ? centre[left[e]] : outer[e];
    len[e] = std::abs(points[g.edges[e][1]] - points[g.edges[e][0]]);
    len[e + nE] = std::abs(yp - y);
    rho[e] = len[e + nE] / len[e];
  }
  out.map = build_double(g, rho, len);
  out.delaunay = g;
  out.emb.pos.assign(out.map.num_vertices(), 0.0);
  for (int v = 0; v < n; ++v) out.emb.pos[v] = points[v];
  for (int f = 0; f < nF; ++f) out.emb.pos[n + f] = centre[f];
  for (int e = 0; e < nE; ++e) {
    const Quad& q = out.map.quads[e];
    if (q.v[1] >= n + nF) out.emb.pos[q.v[1]] = outer[e];
    if (q.v[3] >= n + nF) out.emb.pos[q.v[3]] = outer[e];
  }
  return out;
}

Refined refine(const DoubleMap& m, const PlanarEmbedding& emb) {
  const int N = m.num_vertices(), Q = m.num_quads(), S = m.num_dedges();
  if (emb.corners.empty() && static_cast<int>(emb.pos.size()) != N) throw std::invalid_argument("refine needs an embedded map");
  std::vector<Kind> kinds(N + Q + S, Kind::primal);
  for (int s = 0; s < S; ++s) kinds[N + Q + s] = Kind::dual;
  std::vector<std::array<int, 4>> quads(4 * Q), sides(4 * Q);
  std::vector<double> rho(4 * Q), len(8 * Q);
  std::vector<std::array<cplx, 4>> corners(4 * Q);
  std::vector<cplx> pos(N + Q + S);
  for (int v = 0; v < N && v < static_cast<int>(emb.pos.size()); ++v) pos[v] = emb.pos[v];
  for (int q = 0; q < Q; ++q) {
    const Quad& Qd = m.quads[q];
    auto c = emb.quad(m, q);
    cplx o = 0.25 * (c[0] + c[1] + c[2] + c[3]);
    pos[N + q] = o;
    for (int k = 0; k < 4; ++k) {
      int km = (k + 3) % 4;
      cplx mk = 0.5 * (c[k] + c[(k + 1) % 4]), mm = 0.5 * (c[km] + c[k]);
      pos[N + Q + Qd.side[k]] = mk;
      if (!emb.corners.empty()) pos[Qd.v[k]] = c[k];
      int r = 4 * q + k;
      quads[r] = {Qd.v[k], N + Q + Qd.side[k], N + q, N + Q + Qd.side[km]};
      sides[r] = {2 * Qd.side[k] + k % 2, 2 * S + 4 * q + k, 2 * S + 4 * q + km, 2 * Qd.side[km] + k % 2};
      corners[r] = {c[k], mk, o, mm};
      len[r] = std::abs(o - c[k]);
      len[r + 4 * Q] = std::abs(mm - mk);
      rho[r] = len[r + 4 * Q] / len[r];
    }
  }
  Refined out;
  out.map = from_quads(kinds, quads, rho, sides, len);
  out.emb.pos = pos;
  if (!emb.corners.empty()) out.emb.corners = corners;
  out.emb.periods = emb.periods;
  return out;
}

Cochain coordinate(const DoubleMap& m, const PlanarEmbedding& emb) {
  if (emb.torus() || static_cast<int>(emb.pos.size()) != m.num_vertices())
    throw std::invalid_argument("coordinate needs a planar embedding");
  Cochain z = zeros(m, 0, Carrier::lambda);
  for (int v = 0; v < m.num_vertices(); ++v) z.v[v] = emb.pos[v];
  return z;
}

double min_corner_angle(const std::array<cplx, 4>& c) {
  double a = 2.0 * kPi;
  for (int k = 0; k < 4; ++k) a = std::min(a, corner_angle(c, k));
  return a;
}

double quad_path_ratio(const std::array<cplx, 4>& c, double s, double t) {
  std::array<double, 5> acc{0.0};
  for (int k = 0; k < 4; ++k) acc[k + 1] = acc[k] + std::abs(c[(k + 1) % 4] - c[k]);
  const double P = acc[4];
  auto point = [&](double u) {
    double x = (u - std::floor(u)) * P;
    int k = 0;
    while (k < 3 && x > acc[k + 1]) ++k;
    double seg = acc[k + 1] - acc[k];
    return c[k] + (c[(k + 1) % 4] - c[k]) * ((x - acc[k]) / seg);
  };
  double d = std::abs(s - t);
  d = std::min(d - std::floor(d), 1.0 - (d - std::floor(d)));
  double ell = d * P;
  if (ell <= 0.0) return 1.0;
  return std::abs(point(s) - point(t)) / ell;
}

ConvergenceReport convergence_test(const DoubleMap& m, const PlanarEmbedding& emb, int levels,
                                   const FamilyBuilder& build, const std::function<cplx(cplx)>& target, double eta) {
  if (levels < 3) throw std::invalid_argument("convergence_test needs at least 3 levels");
  if (emb.torus()) throw std::invalid_argument("convergence_test works on planar patches");
  ConvergenceReport rep;
  const int N0 = m.num_vertices();
  DoubleMap cur = m;
  PlanarEmbedding ce = emb;
  for (int l = 0; l < levels; ++l) {
    if (l > 0) {
      Refined r = refine(cur, ce);
      cur = std::move(r.map);
      ce = std::move(r.emb);
    }
    double dmax = 0.0;
    for (int q = 0; q < cur.num_quads(); ++q) {
      auto c = ce.quad(cur, q);
      if (min_corner_angle(c) < eta) throw std::invalid_argument("quad " + std::to_string(q) + " has a corner below eta");
      for (int k = 0; k < 4; ++k) dmax = std::max(dmax, std::abs(c[(k + 1) % 4] - c[k]));
    }
    Eigen::VectorXcd f = build(cur, ce, l);
    double err = 0.0;
    for (int v = 0; v < N0; ++v) err = std::max(err, std::abs(f[v] - target(ce.pos[v])));
    rep.levels.push_back({dmax, cur.num_vertices(), err});
  }
  for (int l = 0; l + 1 < levels; ++l) {
    double a = rep.levels[l].error, b = rep.levels[l + 1].error;
    double r = a > 0.0 ? b / a : (b > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    rep.ratios.push_back(r);
    rep.max_ratio = std::max(rep.max_ratio, r);
  }
  return rep;
}

double coupling_from_rho(double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");
  return 0.5 * std::asinh(rho);
}

double rho_from_coupling(double K) {
  if (!(K > 0.0)) throw std::invalid_argument("coupling must be positive");
  return std::sinh(2.0 * K);
}

std::vector<double> couplings(const std::vector<double>& rho) {
  std::vector<double> K(rho.size());
  std::transform(rho.begin(), rho.end(), K.begin(), coupling_from_rho);
  return K;
}

std::vector<double> rhos(const std::vector<double>& K) {
  std::vector<double> r(K.size());
  std::transform(K.begin(), K.end(), r.begin(), rho_from_coupling);
  return r;
}

IsingReport ising_criticality(const DoubleMap& m, double tol) {
  IsingReport rep;
  rep.flatness.assign(m.num_vertices(), std::numeric_limits<double>::quiet_NaN());
  for (int v = 0; v < m.num_vertices(); ++v) {
    if (!m.interior(v)) continue;
    std::vector<double> r;
    double s = 0.0;
    for (SignedEdge e : m.star(v)) {
      r.push_back(m.rho[e.edge]);
      s += std::atan(m.rho[e.edge]);
    }
    rep.flatness[v] = s - kPi;
    if (rep.worst_vertex < 0 || std::abs(rep.flatness[v]) > rep.max_residual) {
      rep.max_residual = std::abs(rep.flatness[v]);
      rep.worst_vertex = v;
    }
    const int d = static_cast<int>(r.size());
    auto periodic = [&](int p) {
      for (int i = 0; i + p < d; ++i)
        if (std::abs(r[i] - r[i + p]) > tol * std::max(r[i], r[i + p])) return false;
      return true;
    };
    ClosedFormCheck c;
    c.vertex = v;
    if (d == 3) {
      c.form = "hexagonal";
      c.residual = r[0] * r[1] * r[2] - (r[0] + r[1] + r[2]);
    } else if (d == 4 && periodic(2)) {
      c.form = "square";
      c.residual = r[0] * r[1] - 1.0;
    } else if (d == 6 && periodic(3)) {
      // product equals sum on the dual (hexagonal) ratios
      double a = 1.0 / r[0], b = 1.0 / r[1], e = 1.0 / r[2];
      c.form = "triangular";
      c.residual = a * b * e - (a + b + e);
    } else {
      continue;
    }
    rep.max_closed_form = std::max(rep.max_closed_form, std::abs(c.residual));
    rep.closed_forms.push_back(c);
  }
  rep.critical = rep.max_residual <= tol;
  return rep;
}

IsingReport ising_criticality(const DoubleMap& m, const std::vector<double>& K, double tol) {
  if (static_cast<int>(K.size()) != m.num_quads()) throw std::invalid_argument("one coupling per primal edge required");
  return ising_criticality(with_rho(m, rhos(K)), tol);
}

}  // namespace discra
