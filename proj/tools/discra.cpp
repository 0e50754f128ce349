// discra: command-line front end.  JSON report on stdout, one-line summary on
// stderr.  Exit codes: 0 pass, 1 verdict fail, 2 input error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <random>

#include "discra/dirac.hpp"
#include "discra/harmonic.hpp"
#include "discra/holomorphic.hpp"
#include "discra/io.hpp"

using namespace discra;
using json = nlohmann::ordered_json;

namespace {

constexpr double kPi = std::numbers::pi;

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

json cj(cplx z) { return json::array({z.real(), z.imag()}); }

double finite_max(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v)
    if (std::isfinite(x)) m = std::max(m, x);
  return m;
}

json report(const std::string& command) { return json{{"report_version", 1}, {"command", command}}; }

int finish(json r, bool pass, const std::string& summary) {
  r["pass"] = pass;
  std::cout << r.dump(1) << "\n";
  std::cerr << "discra " << r["command"].get<std::string>() << ": " << summary << (pass ? "" : " [FAIL]") << "\n";
  return pass ? 0 : 1;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << text;
}

// Mesh documents go to a file when one is named, else to stdout with the
// report version added on top.
int emit_mesh(const std::string& command, const std::string& out, const MeshFile& f, json extra) {
  std::string text = write_mesh(f);
  if (out.empty()) {
    json doc = json::parse(text);
    json top = report(command);
    for (auto& [k, v] : doc.items()) top[k] = v;
    std::cout << top.dump(1) << "\n";
    std::cerr << "discra " << command << ": " << f.map.num_quads() << " edges written to stdout\n";
    return 0;
  }
  write_file(out, text);
  json r = report(command);
  r["output"] = out;
  r["vertices"] = f.complex.num_vertices;
  r["edges"] = static_cast<int>(f.complex.edges.size());
  r["faces"] = static_cast<int>(f.complex.faces.size());
  r["topology"] = f.torus ? "torus" : "planar";
  for (auto& [k, v] : extra.items()) r[k] = v;
  return finish(r, true, std::to_string(f.complex.edges.size()) + " edges written to " + out);
}

struct Loaded {
  MeshFile file;
  PlanarEmbedding emb;
  bool developed = false;
};

Loaded load(const std::string& path, bool need_embedding) {
  Loaded L;
  L.file = read_mesh(path);
  L.emb = L.file.emb;
  if (need_embedding && L.emb.pos.empty() && L.emb.corners.empty()) {
    Development D = develop(L.file.map);
    L.emb = D.emb;
    if (!L.file.torus) L.emb.corners.clear();
    L.developed = true;
  }
  return L;
}

// Test functions of the position.
cplx builtin(const std::string& name, cplx z) {
  if (name == "x") return z.real();
  if (name == "y") return z.imag();
  if (name == "z") return z;
  if (name == "z2") return z * z;
  if (name == "re-z2") return (z * z).real();
  if (name == "one") return 1.0;
  throw InputError("unknown function " + name + " (x, y, z, z2, re-z2, one)");
}

Cochain sample(const DoubleMap& m, const PlanarEmbedding& emb, const std::string& name) {
  if (emb.torus()) throw InputError("test functions need a planar embedding");
  Cochain f = zeros(m, 0, Carrier::lambda);
  for (int v = 0; v < m.num_vertices(); ++v) f.v[v] = builtin(name, emb.pos[v]);
  return f;
}

Kind parse_kind(const std::string& s) { return s == "dual" ? Kind::dual : Kind::primal; }

Criticality parse_level(const std::string& s) {
  if (s == "none") return Criticality::none;
  if (s == "semi-critical") return Criticality::semi_critical;
  return Criticality::critical;
}

// Planar: the interior vertex of the given kind closest to the centroid.
int central_vertex(const DoubleMap& m, const PlanarEmbedding& emb, Kind k) {
  cplx c = 0.0;
  for (cplx z : emb.pos) c += z;
  c /= static_cast<double>(emb.pos.size());
  int best = -1;
  for (int v = 0; v < m.num_vertices(); ++v)
    if (m.kind[v] == k && m.interior(v) && (best < 0 || std::abs(emb.pos[v] - c) < std::abs(emb.pos[best] - c)))
      best = v;
  if (best < 0) throw InputError("no interior vertex");
  return best;
}

json classify_json(const ClassifyReport& c) {
  json r;
  r["verdict"] = criticality_name(c.verdict);
  r["reason"] = c.reason;
  r["violating_quads"] = c.violating_quads;
  r["max_orthogonality"] = c.max_orthogonality;
  r["max_ratio_error"] = c.max_ratio_error;
  r["side_spread"] = c.side_spread;
  r["flat"] = c.flat();
  r["non_flat"] = c.non_flat;
  r["spin_compatible"] = c.spin_compatible();
  r["spin_obstructed"] = c.spin_obstructed;
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"discrete Riemann surfaces: meshes, harmonic and holomorphic forms, criticality, Dirac spinors"};
  app.require_subcommand(1);

  double tol = 1e-9;
  if (const char* env = std::getenv("DISCRA_TOLERANCE")) {
    char* end = nullptr;
    double t = std::strtod(env, &end);
    if (end == env || *end || !(t > 0.0)) {
      std::cerr << "discra: DISCRA_TOLERANCE must be a positive number\n";
      return 2;
    }
    tol = t;
  }
  app.add_option("--tol", tol, "verdict tolerance (default 1e-9, or DISCRA_TOLERANCE)")->check(CLI::PositiveNumber);
  std::uint64_t seed = 0;

  std::function<int()> run;
  std::string mesh_path, out;
  auto mesh_opt = [&](CLI::App* sub) { sub->add_option("mesh", mesh_path, "mesh JSON file")->required(); };
  auto out_opt = [&](CLI::App* sub, const char* what) { sub->add_option("-o,--out", out, what); };

  // generate
  auto* gen = app.add_subcommand("generate", "write a lattice or Voronoi mesh");
  std::string lattice, topology = "planar";
  double rho = 1.0, alpha = kPi / 3, beta = kPi / 3, delta = 1.0;
  std::vector<double> rhos;
  int nx = 4, ny = 4, n = 4, points = 20;
  std::vector<std::string> perturb;
  gen->add_option("--lattice", lattice, "lattice family")
      ->required()
      ->check(CLI::IsMember({"square", "rectangular", "triangular", "hexagonal", "diamond", "voronoi"}));
  gen->add_option("--rho", rho, "square: ratio on vertical edges")->check(CLI::PositiveNumber);
  gen->add_option("--rhos", rhos, "rectangular: rho_1 .. rho_4")->expected(4);
  gen->add_option("--alpha", alpha, "triangular/hexagonal: rhombus angle on horizontal edges");
  gen->add_option("--beta", beta, "triangular/hexagonal: rhombus angle on vertical edges");
  gen->add_option("--nx", nx)->check(CLI::PositiveNumber);
  gen->add_option("--ny", ny)->check(CLI::PositiveNumber);
  gen->add_option("--n", n, "diamond: grid size")->check(CLI::PositiveNumber);
  gen->add_option("--delta", delta, "diamond: mesh size")->check(CLI::PositiveNumber);
  gen->add_option("--points", points, "voronoi: number of random sites")->check(CLI::Range(3, 100000));
  gen->add_option("--seed", seed, "voronoi: seed for the random sites");
  gen->add_option("--topology", topology)->check(CLI::IsMember({"planar", "torus"}));
  gen->add_option("--perturb", perturb, "EDGE:FACTOR, multiply rho on a primal edge (drops lengths)");
  out_opt(gen, "output mesh (default stdout)");
  gen->callback([&] {
    run = [&]() -> int {
      const bool torus = topology == "torus";
      DoubleMap m;
      PlanarEmbedding emb;
      if (lattice == "square") {
        Lattice L = rectangular_period2({1.0, rho, 1.0, 1.0 / rho}, nx, ny, torus);
        m = L.map, emb = L.emb;
      } else if (lattice == "rectangular") {
        if (rhos.size() != 4) throw InputError("--rhos needs four values");
        Lattice L = rectangular_period2({rhos[0], rhos[1], rhos[2], rhos[3]}, nx, ny, torus);
        m = L.map, emb = L.emb;
      } else if (lattice == "triangular" || lattice == "hexagonal") {
        Lattice L = triangular_lattice(alpha, beta, nx, ny, torus);
        if (lattice == "hexagonal") {
          std::vector<double> r(L.map.num_quads());
          for (int q = 0; q < L.map.num_quads(); ++q) r[q] = 1.0 / L.map.rho[q];
          L = lattice_from_complex(extract(L.map, Kind::dual), r, torus);
        }
        m = L.map, emb = L.emb;
      } else if (lattice == "diamond") {
        if (torus) throw InputError("diamond lattice is planar only");
        Lattice L = square_diamond(n, delta);
        m = L.map, emb = L.emb;
      } else {
        if (torus) throw InputError("voronoi is planar only");
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::vector<cplx> pts(points);
        for (cplx& p : pts) p = cplx(u(rng), u(rng));
        VoronoiResult V = voronoi_delaunay(pts);
        m = V.map, emb = V.emb;
      }
      if (!perturb.empty()) {
        std::vector<double> r(m.rho.begin(), m.rho.begin() + m.num_quads());
        for (const std::string& p : perturb) {
          auto c = p.find(':');
          if (c == std::string::npos) throw InputError("--perturb takes EDGE:FACTOR, got " + p);
          int e = std::stoi(p.substr(0, c));
          double fct = std::stod(p.substr(c + 1));
          if (e < 0 || e >= m.num_quads()) throw InputError("--perturb: no edge " + std::to_string(e));
          r[e] *= fct;
        }
        m = with_rho(m, r);
      }
      json extra{{"lattice", lattice}};
      if (lattice == "voronoi") extra["seed"] = seed;
      return emit_mesh("generate", out, mesh_from_map(m, emb), extra);
    };
  });

  // validate
  auto* val = app.add_subcommand("validate", "check the cell complex and its double");
  mesh_opt(val);
  val->callback([&] {
    run = [&]() -> int {
      MeshFile f = read_mesh(mesh_path, false);
      TopologyReport t = validate(f.complex);
      if (t.ok()) {
        f.map = build_double(f.complex, f.rho, f.lengths);
        TopologyReport d = validate(f.map);
        for (const auto& v : d.violations) t.violations.push_back("double: " + v);
      }
      if (t.ok() && f.torus && !(t.closed && t.genus == 1))
        t.violations.push_back("topology says torus but the complex has genus " + std::to_string(t.genus) +
                               (t.closed ? "" : " and boundary"));
      if (t.ok() && !f.torus && t.closed)
        t.violations.push_back("topology says planar but the complex is closed");
      json r = report("validate");
      r["vertices"] = t.vertices, r["edges"] = t.edges, r["faces"] = t.faces;
      r["euler"] = t.euler, r["genus"] = t.genus, r["genus_homology"] = t.genus_homology;
      r["boundary_components"] = t.boundary_components;
      r["connected"] = t.connected, r["closed"] = t.closed;
      r["violations"] = t.violations;
      return finish(r, t.ok(), t.ok() ? "chi = " + std::to_string(t.euler) + ", genus " + std::to_string(t.genus)
                                      : t.violations.front());
    };
  });

  // classify
  auto* cls = app.add_subcommand("classify", "semi-critical / critical verdict of the embedding");
  mesh_opt(cls);
  std::string require = "critical";
  cls->add_option("--require", require, "verdict needed to pass")
      ->check(CLI::IsMember({"none", "semi-critical", "critical"}));
  cls->callback([&] {
    run = [&]() -> int {
      Loaded L = load(mesh_path, true);
      ClassifyReport c = classify_map(L.file.map, L.emb, tol);
      json r = report("classify");
      r["embedding"] = L.developed ? "developed" : "file";
      r["tolerance"] = tol;
      json cr = classify_json(c);
      for (auto& [k, v] : cr.items()) r[k] = v;
      bool pass = static_cast<int>(c.verdict) >= static_cast<int>(parse_level(require));
      return finish(r, pass, std::string("verdict ") + criticality_name(c.verdict));
    };
  });

  // solve
  auto* sol = app.add_subcommand("solve", "Dirichlet or Neumann problem");
  std::string problem, kind = "primal", fn = "re-z2", values_path;
  int y0 = -1;
  sol->add_option("problem", problem)->required()->check(CLI::IsMember({"dirichlet", "neumann"}));
  mesh_opt(sol);
  sol->add_option("--kind", kind, "dirichlet: complex to solve on")->check(CLI::IsMember({"primal", "dual"}));
  sol->add_option("--g", fn, "boundary data from a function of the position (x, y, z, z2, re-z2, one)");
  sol->add_option("--values", values_path, "dirichlet: 0-cochain file read on the boundary");
  sol->add_option("--y0", y0, "neumann: boundary dual vertex with one half-edge");
  out_opt(sol, "solution cochain file");
  sol->callback([&] {
    run = [&]() -> int {
      Loaded L = load(mesh_path, values_path.empty());
      const DoubleMap& m = L.file.map;
      json r = report("solve");
      r["problem"] = problem;
      Cochain g = values_path.empty() ? sample(m, L.emb, fn)
                                      : parse_cochain(read_text(values_path), m.num_vertices());
      if (problem == "dirichlet") {
        Kind k = parse_kind(kind);
        BoundaryValues bv{boundary_vertices(m, k), {}};
        if (bv.vertices.empty()) throw InputError("no boundary vertices on the " + kind + " complex");
        for (int v : bv.vertices) bv.values.push_back(g.v[v]);
        HarmonicSolution s = solve_dirichlet(m, k, bv);
        r["kind"] = kind;
        r["boundary_vertices"] = static_cast<int>(bv.vertices.size());
        r["residual"] = s.residual;
        r["method"] = s.report.method;
        r["iterations"] = s.report.iterations;
        double dev = 0.0;
        for (int v : m.vertices_of(k)) dev = std::max(dev, std::abs(s.f.v[v] - g.v[v]));
        r["max_deviation_from_data"] = dev;
        if (!out.empty()) write_file(out, write_cochain(s.f));
        return finish(r, s.residual <= tol, "residual " + num(s.residual));
      }
      // forward data: the Dirichlet solution on Gamma* with boundary values g
      BoundaryValues bv{boundary_vertices(m, Kind::dual), {}};
      for (int v : bv.vertices) bv.values.push_back(g.v[v]);
      Cochain h = solve_dirichlet(m, Kind::dual, bv).f;
      if (y0 < 0)
        for (int v : bv.vertices)
          if (m.star(v).size() == 1) {
            y0 = v;
            break;
          }
      NeumannSolution s = solve_neumann(m, NeumannData{y0, h.v[y0], coboundary(m, h)});
      double err = 0.0;
      for (int v : m.vertices_of(Kind::dual)) err = std::max(err, std::abs(s.f.v[v] - h.v[v]));
      r["y0"] = y0;
      r["data_residual"] = s.data_residual;
      r["flux_residual"] = s.flux_residual;
      r["harmonic_residual"] = s.harmonic_residual;
      r["max_error"] = err;
      if (!out.empty()) write_file(out, write_cochain(s.f));
      bool pass = s.data_residual <= tol && s.flux_residual <= tol && s.harmonic_residual <= tol;
      return finish(r, pass, "data residual " + num(s.data_residual));
    };
  });

  // basis
  auto* bas = app.add_subcommand("basis", "holomorphic 1-forms");
  mesh_opt(bas);
  bas->callback([&] {
    run = [&]() -> int {
      MeshFile f = read_mesh(mesh_path);
      TopologyReport t = validate(f.map);
      SubspaceBasis b = holomorphic_basis(f.map);
      json r = report("basis");
      r["dimension"] = b.dimension();
      r["closed"] = t.closed;
      r["genus"] = t.genus;
      if (t.closed) r["expected"] = 2 * t.genus;
      std::vector<double> sv(b.singular_values.begin(),
                             b.singular_values.begin() + std::min<std::size_t>(b.singular_values.size(),
                                                                                b.dimension() + 4));
      r["smallest_singular_values"] = sv;
      r["cutoff"] = b.cutoff;
      r["ambiguous"] = b.ambiguous;
      if (!out.empty()) {
        json forms = json::array();
        for (const Cochain& c : b.basis) forms.push_back(json::parse(write_cochain(c)));
        write_file(out, forms.dump() + "\n");
      }
      bool pass = !b.ambiguous && (!t.closed || b.dimension() == 2 * t.genus);
      return finish(r, pass, "dimension " + std::to_string(b.dimension()));
    };
  });
  out_opt(bas, "basis forms as a JSON array of cochains");

  // cauchy
  auto* cau = app.add_subcommand("cauchy", "Cauchy integral formula on a disc");
  int dedge = -1;
  std::string cfn = "z2";
  mesh_opt(cau);
  cau->add_option("--dedge", dedge, "interior diamond edge (x, y); default near the centre");
  cau->add_option("--g", cfn, "function of the position (x, y, z, z2, re-z2, one)");
  cau->add_option("--values", values_path, "0-cochain file instead of --g");
  cau->callback([&] {
    run = [&]() -> int {
      Loaded L = load(mesh_path, values_path.empty() || dedge < 0);
      const DoubleMap& m = L.file.map;
      if (dedge < 0) {
        if (L.emb.torus()) throw InputError("cauchy needs a disc");
        cplx c = 0.0;
        for (cplx z : L.emb.pos) c += z;
        c /= static_cast<double>(L.emb.pos.size());
        double best = std::numeric_limits<double>::infinity();
        for (int s = 0; s < m.num_dedges(); ++s) {
          const DiamondEdge& d = m.dedges[s];
          if (d.quads[0] < 0 || d.quads[1] < 0 || !m.interior(d.p) || !m.interior(d.d)) continue;
          double dist = std::abs(0.5 * (L.emb.pos[d.p] + L.emb.pos[d.d]) - c);
          if (dist < best) best = dist, dedge = s;
        }
      }
      Cochain f = values_path.empty() ? sample(m, L.emb, cfn) : parse_cochain(read_text(values_path), m.num_vertices());
      CauchyKernel K = cauchy_kernel(m, dedge);
      CauchyReport c = cauchy_integral(m, K, f);
      json r = report("cauchy");
      r["dedge"] = dedge, r["x"] = K.x, r["y"] = K.y;
      r["contour"] = cj(c.contour), r["area"] = cj(c.area), r["point"] = cj(c.point), r["residual"] = cj(c.residual);
      r["kernel_consistency"] = K.consistency;
      bool pass = std::abs(c.residual) <= tol * std::max(1.0, std::abs(c.contour));
      return finish(r, pass, "residual " + num(std::abs(c.residual)));
    };
  });

  // ising
  auto* isg = app.add_subcommand("ising", "Ising couplings and flat criticality");
  bool check = false;
  std::string couplings_path;
  mesh_opt(isg);
  isg->add_flag("--check", check, "fail unless the couplings are critical");
  isg->add_option("--couplings", couplings_path, "JSON {\"K\": [...]} per primal edge, instead of rho");
  isg->callback([&] {
    run = [&]() -> int {
      MeshFile f = read_mesh(mesh_path);
      std::vector<double> K;
      IsingReport I;
      if (couplings_path.empty()) {
        K = couplings(std::vector<double>(f.map.rho.begin(), f.map.rho.begin() + f.map.num_quads()));
        I = ising_criticality(f.map, tol);
      } else {
        json doc;
        try {
          doc = json::parse(read_text(couplings_path));
          K = doc.at("K").get<std::vector<double>>();
        } catch (const json::exception& e) {
          throw InputError(std::string("couplings file: ") + e.what());
        }
        if (static_cast<int>(K.size()) != f.map.num_quads())
          throw InputError("couplings file needs one K per primal edge");
        I = ising_criticality(f.map, K, tol);
      }
      json r = report("ising");
      r["critical"] = I.critical;
      r["max_residual"] = I.max_residual;
      r["worst_vertex"] = I.worst_vertex;
      auto [lo, hi] = std::minmax_element(K.begin(), K.end());
      r["K_min"] = *lo, r["K_max"] = *hi;
      r["couplings"] = K;
      json cf = json::array();
      for (const auto& c : I.closed_forms) cf.push_back({{"vertex", c.vertex}, {"form", c.form}, {"residual", c.residual}});
      r["closed_forms"] = cf;
      r["max_closed_form"] = I.max_closed_form;
      return finish(r, !check || I.critical,
                    std::string("critical: ") + (I.critical ? "true" : "false") + ", K in [" + num(*lo) +
                        ", " + num(*hi) + "]");
    };
  });

  // dirac
  auto* dir = app.add_subcommand("dirac", "Dirac spinors");
  bool exists = false, construct = false, residuals = false;
  int base = 0;
  std::string spinor_path;
  mesh_opt(dir);
  auto* o_ex = dir->add_flag("--exists", exists, "existence test from rho (default)");
  auto* o_co = dir->add_flag("--construct", construct, "construct from the embedding angles");
  auto* o_re = dir->add_flag("--residuals", residuals, "check a spinor file against both equations");
  o_ex->excludes(o_co)->excludes(o_re);
  o_co->excludes(o_re);
  dir->add_option("--base", base, "base diamond edge");
  dir->add_option("--spinor", spinor_path, "spinor file for --residuals");
  out_opt(dir, "spinor output file");
  dir->callback([&] {
    run = [&]() -> int {
      json r = report("dirac");
      if (residuals) {
        if (spinor_path.empty()) throw InputError("--residuals needs --spinor");
        MeshFile f = read_mesh(mesh_path);
        SpinorFile sf = parse_spinor(read_text(spinor_path));
        SpinStructure s;
        s.base = build_triple(f.map);
        if (sf.flip.size() != s.base.edges.size())
          throw InputError("spinor file has " + std::to_string(sf.flip.size()) + " flips, the triple graph " +
                           std::to_string(s.base.edges.size()) + " edges");
        if (sf.spinor.size() != f.map.num_dedges()) throw InputError("spinor size does not match the mesh");
        s.flip = sf.flip;
        std::vector<int> even;
        for (int i = 0; i < static_cast<int>(s.base.faces.size()); ++i)
          if (face_flip_parity(s, i) % 2 == 0) even.push_back(i);
        DiracResidual d = dirac_residual(f.map, s, sf.spinor);
        r["mode"] = "residuals";
        r["spin_structure"] = even.empty();
        r["even_faces"] = even;
        r["symmetry"] = d.symmetry, r["dotsenko"] = d.dotsenko;
        r["worst_symmetry_quad"] = d.worst_symmetry, r["worst_dotsenko_quad"] = d.worst_dotsenko;
        bool pass = even.empty() && d.symmetry <= tol && d.dotsenko <= tol;
        return finish(r, pass, "symmetry " + num(d.symmetry) + ", dotsenko " + num(d.dotsenko));
      }
      auto construction_json = [](const DiracConstruction& c) {
        json j{{"ok", c.ok},
               {"reason", c.reason},
               {"witness_cycle", c.witness_cycle},
               {"witness_vertex", c.witness_vertex},
               {"witness_quad", c.witness_quad},
               {"max_phase_mismatch", c.max_phase_mismatch}};
        if (c.ok) j["genus"] = c.spin.genus, j["mu"] = c.spin.mu;
        return j;
      };
      if (construct) {
        Loaded L = load(mesh_path, true);
        ClassifyReport c = classify_map(L.file.map, L.emb, tol);
        DiracConstruction d = construct_dirac_spinor(L.file.map, c.angles, base, tol);
        r["mode"] = "construct";
        r["embedding"] = L.developed ? "developed" : "file";
        r["construction"] = construction_json(d);
        if (d.ok) {
          DiracResidual res = dirac_residual(L.file.map, d.spin, d.spinor);
          r["symmetry"] = res.symmetry, r["dotsenko"] = res.dotsenko;
          if (!out.empty()) write_file(out, write_spinor(d.spinor, d.spin));
        }
        return finish(r, d.ok, d.ok ? "spinor constructed" : d.reason);
      }
      MeshFile f = read_mesh(mesh_path);
      DiracExistence e = dirac_exists(f.map, base, tol);
      r["mode"] = "exists";
      r["exists"] = e.exists;
      r["reason"] = e.reason;
      r["witness_vertex"] = e.witness_vertex;
      r["max_rhombus_error"] = e.max_rhombus_error;
      r["max_vertex_phase_error"] = finite_max(e.vertex_phase_error);
      r["construction"] = construction_json(e.construction);
      if (e.exists && !out.empty()) write_file(out, write_spinor(e.construction.spinor, e.construction.spin));
      return finish(r, e.exists,
                    e.exists ? "a Dirac spinor exists"
                             : "no Dirac spinor" + (e.witness_vertex >= 0
                                                        ? " (witness vertex " + std::to_string(e.witness_vertex) + ")"
                                                        : std::string()));
    };
  });

  // massive
  auto* mas = app.add_subcommand("massive", "elliptic half angles and massive flatness");
  double kmod = -1.0;
  mesh_opt(mas);
  mas->add_option("--k", kmod, "modulus in (0, 1]; rho is rescaled by 1/sqrt(k) unless the file is massive");
  mas->callback([&] {
    run = [&]() -> int {
      MeshFile f = read_mesh(mesh_path);
      DoubleMap m = f.map;
      double k = kmod;
      if (m.modulus != 1.0) {
        if (k > 0.0 && k != m.modulus) throw InputError("--k disagrees with the modulus stored in the mesh");
        k = m.modulus;
      } else {
        if (k < 0.0) k = 1.0;
        if (!(k > 0.0 && k <= 1.0)) throw InputError("--k must lie in (0, 1]");
        std::vector<double> all(m.rho);
        for (double& x : all) x /= std::sqrt(k);
        m = with_massive_rho(m, all, k);
      }
      MassiveReport M = massive_flatness(m, k, tol);
      json r = report("massive");
      r["k"] = M.params.k, r["kp"] = M.params.kp, r["I"] = M.params.I;
      r["precondition_ok"] = M.precondition_ok;
      r["max_modulus_error"] = M.max_modulus_error;
      r["offending_quad"] = M.offending_quad;
      r["max_face_residual"] = M.max_face;
      r["max_vertex_residual"] = M.max_vertex;
      r["flat"] = M.flat;
      r["u"] = M.u;
      bool pass = M.precondition_ok && M.flat;
      return finish(r, pass, "face residual " + num(M.max_face) + ", vertex residual " +
                                 num(M.max_vertex));
    };
  });

  // refine
  auto* ref = app.add_subcommand("refine", "tile-centring refinement");
  mesh_opt(ref);
  out_opt(ref, "output mesh (default stdout)");
  ref->callback([&] {
    run = [&]() -> int {
      Loaded L = load(mesh_path, true);
      Refined R = refine(L.file.map, L.emb);
      return emit_mesh("refine", out, mesh_from_map(R.map, R.emb), json::object());
    };
  });

  // converge
  auto* cvg = app.add_subcommand("converge", "convergence of Z^k under refinement");
  int levels = 3, power = 2, z0 = -1;
  mesh_opt(cvg);
  cvg->add_option("--levels", levels)->check(CLI::Range(3, 8));
  cvg->add_option("--power", power, "exponent k of Z^k")->check(CLI::Range(1, 8));
  cvg->add_option("--z0", z0, "base primal vertex; default near the centre");
  cvg->callback([&] {
    run = [&]() -> int {
      Loaded L = load(mesh_path, true);
      const DoubleMap& m = L.file.map;
      if (L.emb.torus()) throw InputError("converge needs a planar map");
      if (z0 < 0) z0 = central_vertex(m, L.emb, Kind::primal);
      const cplx c0 = L.emb.pos[z0];
      double fact = std::tgamma(power + 1.0);
      const int kk = power, base_vertex = z0;
      ConvergenceReport C = convergence_test(
          m, L.emb, levels,
          [kk, base_vertex](const DoubleMap& mm, const PlanarEmbedding& e, int) -> Eigen::VectorXcd {
            return z_power(mm, coordinate(mm, e), kk, base_vertex).f.v;
          },
          [&](cplx z) { return std::pow(z - c0, kk) / (fact * fact); });
      json r = report("converge");
      r["z0"] = z0;
      r["power"] = power;
      json lv = json::array();
      for (const auto& l : C.levels) lv.push_back({{"delta", l.delta}, {"vertices", l.vertices}, {"error", l.error}});
      r["levels"] = lv;
      r["ratios"] = C.ratios;
      r["max_ratio"] = C.max_ratio;
      bool pass = C.levels.back().error <= tol || C.max_ratio < 1.0;
      return finish(r, pass, "last error " + num(C.levels.back().error));
    };
  });

  // render
  auto* ren = app.add_subcommand("render", "SVG drawing of the double");
  bool shade = false, spin = false;
  mesh_opt(ren);
  ren->add_flag("--residuals", shade, "shade diamond faces by their criticality residual");
  ren->add_flag("--spinor", spin, "overlay the constructed Dirac spinor");
  ren->add_option("--spinor-file", spinor_path, "overlay a spinor file");
  out_opt(ren, "SVG output (default stdout)");
  ren->callback([&] {
    run = [&]() -> int {
      Loaded L = load(mesh_path, true);
      const DoubleMap& m = L.file.map;
      SvgOverlay ov;
      json r = report("render");
      if (shade) {
        ov.quad_residual = quad_residuals(m, L.emb);
        r["max_quad_residual"] = finite_max(ov.quad_residual);
      }
      Spinor z;
      if (spin) {
        ClassifyReport c = classify_map(m, L.emb, tol);
        DiracConstruction d = construct_dirac_spinor(m, c.angles, 0, tol);
        if (!d.ok) {
          r["reason"] = d.reason;
          return finish(r, false, "no Dirac spinor to draw: " + d.reason);
        }
        z = d.spinor;
        ov.spinor = &z;
      } else if (!spinor_path.empty()) {
        z = parse_spinor(read_text(spinor_path)).spinor;
        ov.spinor = &z;
      }
      std::string svg = render_svg(m, L.emb, ov);
      if (out.empty()) {
        std::cout << svg;
        std::cerr << "discra render: " << svg.size() << " bytes written to stdout\n";
        return 0;
      }
      write_file(out, svg);
      r["output"] = out;
      r["bytes"] = static_cast<long>(svg.size());
      return finish(r, true, "wrote " + out);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  try {
    return run();
  } catch (const std::exception& e) {
    std::cerr << "discra: error: " << e.what() << "\n";
    return 2;
  }
}
