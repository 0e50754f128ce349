#include <algorithm>
#include <numbers>
#include <numeric>
#include <set>

#include "doctest.h"
#include "discra/holomorphic.hpp"
#include "fixtures.hpp"

using namespace discra;

namespace {

const cplx I(0, 1);
constexpr double kPi = std::numbers::pi;

double maxabs(const Eigen::VectorXcd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

DoubleMap patch(int nx, int ny, std::vector<double> rho = {}) {
  CellComplex g = square_grid(nx, ny, false);
  if (rho.empty()) rho.assign(g.edges.size(), 1.0);
  return build_double(g, rho);
}

DoubleMap torus(int n, std::mt19937_64* rng = nullptr) {
  CellComplex g = square_grid(n, n, true);
  std::vector<double> rho(g.edges.size(), 1.0);
  if (rng) {
    std::uniform_real_distribution<double> u(std::log(0.2), std::log(5.0));
    for (double& r : rho) r = std::exp(u(*rng));
  }
  return build_double(g, rho);
}

int vid(int nx, int i, int j) { return i + (nx + 1) * j; }

// A diamond edge from the primal vertex p to a dual vertex, both interior.
int interior_dedge(const DoubleMap& m, int p) {
  for (int s = 0; s < m.num_dedges(); ++s)
    if (m.dedges[s].p == p && m.interior(m.dedges[s].d) && m.dedges[s].quads[0] >= 0 && m.dedges[s].quads[1] >= 0)
      return s;
  return -1;
}

}  // namespace

TEST_CASE("Cauchy-Riemann residuals") {
  const int n = 4;
  DoubleMap m = patch(n, n);
  Cochain z = fixtures::square_patch_z(m, n, n);
  Cochain c = zeros(m, 0, Carrier::lambda);
  c.v.setConstant(cplx(1, 2));
  CHECK(check_holomorphic(m, c).max_residual == 0.0);
  CHECK(check_holomorphic(m, z).max_residual < 1e-12);
  Cochain zb = z;
  zb.v = z.v.conjugate();
  // one face: conj(i a) - i conj(a) = -2i conj(a), twice the diagonal length
  CRReport r = check_holomorphic(m, zb);
  for (double x : r.per_quad) CHECK(x == doctest::Approx(2.0));
  // holomorphic implies harmonic
  Cochain lap = laplacian(m, z);
  for (int v = 0; v < m.num_vertices(); ++v)
    if (m.interior(v)) CHECK(std::abs(lap.v[v]) < 1e-10);
  // type (1,0): pi(0,1) dZ = 0
  CHECK(maxabs(type_project(m, coboundary(m, z), TypeTag::antiholomorphic).v) < 1e-12);
  CHECK(check_holomorphic_form(m, coboundary(m, z)).max_residual < 1e-12);
}

TEST_CASE("residues") {
  std::mt19937_64 rng(2);
  for (std::uint64_t s = 0; s < 10; ++s) {
    auto rm = fixtures::random_double_map(s);
    const DoubleMap& m = rm.map;
    Cochain f = fixtures::random_cochain(m, 0, Carrier::lambda, rng);
    Cochain df = coboundary(m, f);
    Cochain a = fixtures::random_cochain(m, 1, Carrier::lambda, rng);
    Cochain b = fixtures::random_cochain(m, 1, Carrier::lambda, rng);
    cplx total = 0.0;
    for (int v = 0; v < m.num_vertices(); ++v) {
      if (!m.interior(v)) continue;
      CHECK(std::abs(residue(m, df, v)) < 1e-12 * (1 + maxabs(f.v)));
      Cochain lin = a;
      lin.v = cplx(2, -1) * a.v + cplx(0.5, 3) * b.v;
      cplx expect = cplx(2, -1) * residue(m, a, v) + cplx(0.5, 3) * residue(m, b, v);
      CHECK(std::abs(residue(m, lin, v) - expect) < 1e-12);
      total += residue(m, a, v);
    }
    if (m.closed()) CHECK(std::abs(total) < 1e-12);
  }
  DoubleMap p = patch(2, 2);
  CHECK_THROWS(residue(p, zeros(p, 1, Carrier::lambda), 0));
}

TEST_CASE("meromorphic forms with one pole on a disc") {
  std::mt19937_64 rng(8);
  CellComplex g = square_grid(6, 6, false);
  std::vector<double> rho(g.edges.size());
  std::uniform_real_distribution<double> u(0.5, 2.0);
  for (double& r : rho) r = u(rng);
  DoubleMap m = build_double(g, rho);
  const int x = vid(6, 3, 3);
  std::vector<int> path{x, vid(6, 4, 3), vid(6, 5, 3), vid(6, 6, 3)};
  for (HolonomyKind kind : {HolonomyKind::imaginary, HolonomyKind::real}) {
    MeromorphicForm mf = meromorphic_form(m, {x}, path, kind);
    CHECK(std::abs(mf.residues[0] - 1.0) < 1e-10);
    CHECK(mf.type_residual < 1e-12);
    CHECK(mf.closed_residual < 1e-10);
    CHECK(mf.holonomy_residual < 1e-9);
    // loop around the pole
    cplx h = holonomy(mf.form, m.face_boundary(x));
    CHECK(std::abs(h - 2.0 * kPi * I) < 1e-9);
  }
  // dual pole
  const int nV = 49;
  const int y = nV + 2 + 6 * 2;  // face (2, 2)
  // faces (2,1), (2,0), then the boundary cell below h(2,0)
  std::vector<int> dpath{y, y - 6, y - 12, nV + 36 + 2};
  MeromorphicForm md = meromorphic_form(m, {y}, dpath, HolonomyKind::real);
  CHECK(std::abs(md.residues[0] - 1.0) < 1e-10);
  CHECK(md.holonomy_residual < 1e-9);
}

TEST_CASE("meromorphic forms with two poles") {
  std::mt19937_64 rng(12);
  DoubleMap m = torus(4, &rng);
  const int x = 0, xp = 2;
  std::vector<int> path{0, 1, 2};
  for (HolonomyKind kind : {HolonomyKind::imaginary, HolonomyKind::real}) {
    MeromorphicForm a = meromorphic_form(m, {x, xp}, path, kind);
    CHECK(std::abs(a.residues[0] - 1.0) < 1e-10);
    CHECK(std::abs(a.residues[1] + 1.0) < 1e-10);
    CHECK(std::abs(a.residues[0] + a.residues[1]) < 1e-12);
    CHECK(a.type_residual < 1e-12);
    CHECK(a.closed_residual < 1e-10);
    CHECK(a.holonomy_residual < 1e-9);
    cplx total = 0.0;
    for (int v = 0; v < m.num_vertices(); ++v) total += residue(m, a.form, v);
    CHECK(std::abs(total) < 1e-12);
    // uniqueness: a second construction through the other solver path agrees
    MeromorphicForm b = meromorphic_form(m, {x, xp}, path, kind);
    CHECK(maxabs(a.form.v - b.form.v) < 1e-9);
  }
  CHECK_THROWS(meromorphic_form(m, {0}, {0, 1}, HolonomyKind::imaginary));
  CHECK_THROWS(meromorphic_form(m, {0, 2}, {0, 1, 0, 2}, HolonomyKind::real));
  CHECK_THROWS(meromorphic_form(m, {0, 2}, {0, 5, 2}, HolonomyKind::real));
}

TEST_CASE("holomorphic form with prescribed periods") {
  std::mt19937_64 rng(19);
  for (int n = 3; n <= 4; ++n) {
    DoubleMap m = torus(n, n == 4 ? &rng : nullptr);
    const int nV = n * n;
    std::vector<int> A, B;
    for (int j = 0; j < n; ++j) A.push_back(n * j);   // meridian through (0, j)
    for (int i = 0; i < n; ++i) B.push_back(nV + i);  // faces (i, 0)
    PhiAB phi = phi_ab(m, A, B);
    CHECK(std::abs(phi.period_b.real() - 1.0) < 1e-9);
    CHECK(phi.holonomy_residual < 1e-9);
    CHECK(check_holomorphic_form(m, phi.form).max_residual < 1e-10);
    CHECK(maxabs(coboundary(m, phi.form).v) < 1e-10);
    // contractible loop
    CHECK(std::abs(holonomy(phi.form, m.face_boundary(nV + 1))) < 1e-10);
    // it lies in the holomorphic basis span
    SubspaceBasis hb = holomorphic_basis(m);
    Eigen::VectorXcd rest = phi.form.v;
    for (const Cochain& b : hb.basis) rest -= inner_product(m, phi.form, b) * b.v;
    CHECK(maxabs(rest) < 1e-8);
  }
  DoubleMap m = torus(3);
  CHECK_THROWS(phi_ab(m, {0, 3, 6}, {0, 1, 2}));
}

TEST_CASE("Cauchy kernel and integral formula") {
  const int n = 6;
  std::mt19937_64 rng(21);
  for (int variant = 0; variant < 2; ++variant) {
    CellComplex g = square_grid(n, n, false);
    std::vector<double> rho(g.edges.size(), 1.0);
    if (variant == 1) {
      std::uniform_real_distribution<double> u(0.4, 2.5);
      for (double& r : rho) r = u(rng);
    }
    DoubleMap m = build_double(g, rho);
    int s = interior_dedge(m, vid(n, 3, 3));
    REQUIRE(s >= 0);
    CauchyKernel K = cauchy_kernel(m, s);
    CHECK(K.consistency < 1e-10);
    CHECK(std::abs(K.boundary_holonomy - 2.0 * kPi * I) < 1e-9);
    // A nu = mu off R
    Cochain an = average(m, K.nu);
    const int Q = m.num_quads();
    for (int e = 0; e < m.num_edges(); ++e) {
      int q = m.quad_of(e);
      if (q == K.rect[0] || q == K.rect[1]) continue;
      CHECK(std::abs(an.v[e] - K.mu.v[e]) < 1e-10);
    }
    // closed on quads outside R
    Cochain dn = coboundary(m, K.nu);
    for (int q = 0; q < Q; ++q)
      if (q != K.rect[0] && q != K.rect[1]) CHECK(std::abs(dn.v[q]) < 1e-10);

    Cochain one = zeros(m, 0, Carrier::lambda);
    one.v.setOnes();
    CHECK(std::abs(cauchy_integral(m, K, one).contour - 2.0 * kPi * I) < 1e-9);
    for (int t = 0; t < 5; ++t) {
      Cochain f = fixtures::random_cochain(m, 0, Carrier::lambda, rng);
      CauchyReport r = cauchy_integral(m, K, f);
      CHECK(std::abs(r.residual) < 1e-9);
      Cochain fe = f;
      fe.v += cplx(0.7, -2.0) * epsilon(m).v;
      CHECK(std::abs(cauchy_integral(m, K, fe).contour - r.contour) < 1e-10);
    }
    if (variant == 0) {
      Cochain z = fixtures::square_patch_z(m, n, n);
      Cochain z2 = z;
      z2.v = z.v.cwiseProduct(z.v);
      for (const Cochain& f : {z, z2}) {
        CauchyReport r = cauchy_integral(m, K, f);
        cplx avg = 0.5 * (f.v[K.x] + f.v[K.y]);
        CHECK(std::abs(r.contour / (2.0 * kPi * I) - avg) < 1e-9);
      }
    }
  }
  DoubleMap t = torus(3);
  CHECK_THROWS(cauchy_kernel(t, 0));
}

TEST_CASE("dagger and derivative") {
  const int n = 8;
  DoubleMap m = patch(n, n);
  Cochain z = fixtures::square_patch_z(m, n, n);
  const double delta = std::sqrt(0.5);
  const int z0 = vid(n, 4, 4);
  Cochain one = zeros(m, 0, Carrier::lambda);
  one.v.setOnes();
  CHECK(maxabs(dagger(m, one).v - epsilon(m).v) == 0.0);
  CHECK(maxabs(dagger(m, epsilon(m)).v - one.v) == 0.0);
  CHECK(maxabs(dagger(m, dagger(m, z)).v - z.v) == 0.0);
  CHECK(check_holomorphic(m, dagger(m, z)).max_residual < 1e-12);

  Derivative dz = derivative(m, z, z, delta, z0);
  CHECK(dz.residual < 1e-10);
  CHECK(dz.path_residual < 1e-12);
  // z' = 1 up to a multiple of epsilon
  cplx c = dz.fprime.v[z0] - 1.0;
  CHECK(maxabs(dz.fprime.v - one.v - c * epsilon(m).v) < 1e-10);
  CHECK(std::abs(c + 1.0) < 1e-12);

  Derivative dc = derivative(m, one, z, delta, z0);
  CHECK(maxabs(dc.fprime.v) < 1e-12);

  PathIntegral z2 = z_power(m, z, 2, z0, PowerScaling::continuum);
  Derivative d2 = derivative(m, z2.f, z, delta, z0);
  CHECK(d2.residual < 1e-10);
  // the derivative of Z^2 (continuum scaling) is 2 Z^1 modulo epsilon
  PathIntegral z1 = z_power(m, z, 1, z0);
  Eigen::VectorXcd diff = d2.fprime.v - 2.0 * z1.f.v;
  cplx c2 = diff[z0];
  CHECK(maxabs(diff - c2 * epsilon(m).v) < 1e-9);
}

TEST_CASE("powers of Z") {
  const int n = 6;
  DoubleMap m = patch(n, n);
  Cochain z = fixtures::square_patch_z(m, n, n);
  const int z0 = vid(n, 0, 0);
  PathIntegral p0 = z_power(m, z, 0, z0);
  CHECK(maxabs(p0.f.v - Eigen::VectorXcd::Ones(m.num_vertices())) == 0.0);
  for (PowerScaling s : {PowerScaling::literal, PowerScaling::continuum}) {
    PathIntegral p1 = z_power(m, z, 1, z0, s);
    CHECK(maxabs(p1.f.v - (z.v.array() - z.v[z0]).matrix()) < 1e-12);
  }
  for (int k = 2; k <= 5; ++k) {
    PathIntegral pk = z_power(m, z, k, z0);
    CHECK(pk.path_residual < 1e-12);
    CHECK(check_holomorphic(m, pk.f).max_residual < 1e-9);
  }
  // two-path oracle for Z^2 at a lattice point: walk right then up, and up then right
  PathIntegral p2 = z_power(m, z, 2, z0);
  auto walk = [&](const std::vector<int>& verts) {
    cplx acc = 0.0;
    for (std::size_t i = 0; i + 1 < verts.size(); ++i) {
      cplx a = z.v[verts[i]] - z.v[z0], b = z.v[verts[i + 1]] - z.v[z0];
      acc += 0.5 * 0.5 * (a + b) * (b - a);
    }
    return acc;
  };
  // diamond steps alternate primal corner and cell centre
  const int nV = (n + 1) * (n + 1);
  std::vector<int> right_up{vid(n, 0, 0), nV + 0, vid(n, 1, 1), nV + 1 + n * 1, vid(n, 2, 2)};
  std::vector<int> up_right{vid(n, 0, 0), nV + 0, vid(n, 1, 1), nV + 0 + n * 1, vid(n, 1, 2)};
  cplx w1 = walk(right_up);
  CHECK(w1 == p2.f.v[vid(n, 2, 2)]);
  cplx w2 = walk(up_right);
  CHECK(std::abs(w2 - p2.f.v[vid(n, 1, 2)]) < 1e-15);
  // Z^2 with literal scaling is exactly (Z - Z(z0))^2 / 4
  Eigen::VectorXcd sq = (z.v.array() - z.v[z0]).square().matrix() / 4.0;
  CHECK(maxabs(p2.f.v - sq) < 1e-12);
}

TEST_CASE("minimal polynomial") {
  const int n = 6;
  DoubleMap m = patch(n, n);
  Cochain z = fixtures::square_patch_z(m, n, n);
  const int z0 = vid(n, 3, 3);
  MinimalPolynomial one = minimal_polynomial(m, z, z0, {0});
  CHECK(one.degree >= 1);
  CHECK(one.degree <= 4);
  CHECK(one.rank <= 4);
  CHECK(one.residual < 1e-8);
  int prev = 0;
  for (int r = 1; r <= 3; ++r) {
    std::vector<int> quads;
    for (int q = 0; q < m.num_quads(); ++q) {
      bool in = true;
      for (int v : m.quads[q].v)
        if (std::abs(z.v[v] - z.v[z0]) > r + 0.01) in = false;
      if (in) quads.push_back(q);
    }
    MinimalPolynomial p = minimal_polynomial(m, z, z0, quads);
    std::set<int> verts;
    for (int q : quads)
      for (int v : m.quads[q].v) verts.insert(v);
    CHECK(p.rank <= static_cast<int>(verts.size()));
    REQUIRE(p.degree > 0);
    CHECK(p.degree >= prev);
    CHECK(p.residual < 1e-8);
    prev = p.degree;
  }
}
