// Runs the discra binary (path in argv[1]) and checks exit codes and reports
// against direct library calls.
#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <numbers>

#include "discra/dirac.hpp"
#include "discra/io.hpp"

using namespace discra;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string g_bin;
fs::path g_dir;

struct Run {
  int code = -1;
  std::string out, err;
  json report() const { return json::parse(out); }
};

Run run(const std::string& args, const std::string& env = "") {
  const std::string err_file = (g_dir / "stderr.txt").string();
  std::string cmd = env + (env.empty() ? "" : " ") + g_bin + " " + args + " 2>" + err_file;
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p);
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = read_text(err_file);
  return r;
}

std::string path(const std::string& name) { return (g_dir / name).string(); }

int count(const std::string& s, const std::string& needle) {
  int n = 0;
  for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("generate, classify and ising on the square torus") {
  Run g = run("generate --lattice square --rho 1 --nx 8 --ny 8 --topology torus -o " + path("sq.json"));
  REQUIRE(g.code == 0);
  CHECK(g.report()["report_version"] == 1);
  MeshFile f = read_mesh(path("sq.json"));
  Lattice L = rectangular_period2({1.0, 1.0, 1.0, 1.0}, 8, 8, true);
  CHECK(read_text(path("sq.json")) == write_mesh(L.map, L.emb));

  Run c = run("classify " + path("sq.json"));
  CHECK(c.code == 0);
  json cr = c.report();
  CHECK(cr["verdict"] == "critical");
  ClassifyReport lib = classify_map(f.map, f.emb);
  CHECK(cr["max_ratio_error"].get<double>() == lib.max_ratio_error);
  CHECK(cr["max_orthogonality"].get<double>() == lib.max_orthogonality);
  CHECK(cr["side_spread"].get<double>() == lib.side_spread);

  Run i = run("ising --check " + path("sq.json"));
  CHECK(i.code == 0);
  json ir = i.report();
  CHECK(ir["critical"] == true);
  CHECK(std::abs(ir["K_min"].get<double>() - 0.4406868) < 1e-7);
  CHECK(std::abs(ir["K_max"].get<double>() - 0.4406868) < 1e-7);
  CHECK(ir["K_min"].get<double>() == coupling_from_rho(1.0));
  CHECK(ir["max_residual"].get<double>() == ising_criticality(f.map).max_residual);
  CHECK(i.err.find("critical: true") != std::string::npos);

  // stdout form of generate carries the report version and parses as a mesh
  Run s = run("generate --lattice square --rho 1 --nx 3 --ny 3 --topology torus");
  CHECK(s.code == 0);
  CHECK(s.report()["report_version"] == 1);
  CHECK(parse_mesh(s.out).map.num_quads() == 18);
}

TEST_CASE("dirac from the command line") {
  REQUIRE(run("generate --lattice square --rho 1 --nx 8 --ny 8 --topology torus -o " + path("sq.json")).code == 0);
  Run e = run("dirac --exists " + path("sq.json"));
  CHECK(e.code == 0);
  CHECK(e.report()["exists"] == true);

  REQUIRE(run("generate --lattice square --rho 1 --nx 8 --ny 8 --topology torus --perturb 5:1.1 -o " +
              path("bad.json")).code == 0);
  Run b = run("dirac --exists " + path("bad.json"));
  CHECK(b.code == 1);
  json br = b.report();
  CHECK(br["exists"] == false);
  CHECK(br["witness_vertex"].get<int>() >= 0);
  MeshFile bad = read_mesh(path("bad.json"));
  CHECK(br["witness_vertex"].get<int>() == dirac_exists(bad.map).witness_vertex);

  Run c = run("dirac --construct " + path("sq.json") + " -o " + path("spin.json"));
  CHECK(c.code == 0);
  Run r = run("dirac --residuals --spinor " + path("spin.json") + " " + path("sq.json"));
  CHECK(r.code == 0);
  CHECK(r.report()["dotsenko"].get<double>() <= 1e-12);

  // a spinor with one value changed fails the equations, not the input checks
  json sp = json::parse(read_text(path("spin.json")));
  sp["values"][0][2] = 5.0;
  sp["values"][1][2] = -5.0;
  std::ofstream(path("spin_bad.json")) << sp.dump();
  CHECK(run("dirac --residuals --spinor " + path("spin_bad.json") + " " + path("sq.json")).code == 1);
  sp["values"][1][2] = 5.0;   // no longer equivariant
  std::ofstream(path("spin_bad.json")) << sp.dump();
  Run m = run("dirac --residuals --spinor " + path("spin_bad.json") + " " + path("sq.json"));
  CHECK(m.code == 2);
  CHECK(m.err.find("malformed spinor") != std::string::npos);
}

TEST_CASE("input errors exit with 2") {
  REQUIRE(run("generate --lattice square --rho 1 --nx 4 --ny 4 --topology torus -o " + path("t.json")).code == 0);
  json doc = json::parse(read_text(path("t.json")));
  doc["edges"][7].erase("rho");
  std::ofstream(path("norho.json")) << doc.dump();
  Run a = run("classify " + path("norho.json"));
  CHECK(a.code == 2);
  CHECK(a.err.find("edge 7: missing \"rho\"") != std::string::npos);

  doc = json::parse(read_text(path("t.json")));
  doc.erase("periods");
  std::ofstream(path("noper.json")) << doc.dump();
  Run b = run("validate " + path("noper.json"));
  CHECK(b.code == 2);
  CHECK(b.err.find("topology torus requires periods") != std::string::npos);

  CHECK(run("classify " + path("missing.json")).code == 2);
  CHECK(run("classify --frobnicate " + path("t.json")).code == 2);
  CHECK(run("generate --lattice pentagon").code == 2);
  CHECK(run("").code == 2);
  CHECK(run("classify " + path("t.json"), "DISCRA_TOLERANCE=abc").code == 2);
  CHECK(run("massive --k 1.5 " + path("t.json")).code == 2);
}

TEST_CASE("tolerance, verdicts and other subcommands") {
  REQUIRE(run("generate --lattice square --rho 1 --nx 4 --ny 4 --topology torus -o " + path("t.json")).code == 0);
  CHECK(run("classify " + path("t.json"), "DISCRA_TOLERANCE=1e-6").report()["tolerance"] == 1e-6);
  CHECK(run("--tol 1e-4 classify " + path("t.json"), "DISCRA_TOLERANCE=1e-6").report()["tolerance"] == 1e-4);
  CHECK(run("validate " + path("t.json")).code == 0);
  Run bs = run("basis " + path("t.json"));
  CHECK(bs.code == 0);
  CHECK(bs.report()["dimension"] == 2);

  REQUIRE(run("generate --lattice voronoi --points 25 --seed 3 -o " + path("v.json")).code == 0);
  CHECK(run("generate --lattice voronoi --points 25 --seed 3").out.find("\"vertices\"") != std::string::npos);
  Run v = run("classify " + path("v.json"));
  CHECK(v.code == 1);
  CHECK(v.report()["verdict"] == "semi-critical");
  CHECK(run("classify --require semi-critical " + path("v.json")).code == 0);

  REQUIRE(run("generate --lattice square --rho 1.3 --nx 5 --ny 5 -o " + path("p.json")).code == 0);
  Run d = run("solve dirichlet " + path("p.json") + " -o " + path("f.json"));
  CHECK(d.code == 0);
  CHECK(parse_cochain(read_text(path("f.json"))).degree == 0);
  CHECK(run("solve neumann " + path("p.json")).code == 0);
  CHECK(run("cauchy " + path("p.json")).code == 0);
  CHECK(run("converge --power 1 " + path("p.json")).code == 0);
  Run rf = run("refine " + path("p.json") + " -o " + path("r.json"));
  CHECK(rf.code == 0);
  CHECK(run("classify " + path("r.json")).code == 0);

  // massive: the ledger's k = 1 offset makes the stated flatness fail
  Run ms = run("massive " + path("t.json"));
  CHECK(ms.code == 1);
  CHECK(std::abs(ms.report()["max_vertex_residual"].get<double>() - std::numbers::pi / 2) < 1e-12);

  Run s1 = run("render --residuals --spinor " + path("t.json"));
  Run s2 = run("render --residuals --spinor " + path("t.json"));
  CHECK(s1.code == 0);
  CHECK(s1.out == s2.out);
  CHECK(count(s1.out, "class=\"primal-vertex\"") == 16);
  CHECK(count(s1.out, "class=\"primal-edge\"") == 32);
  CHECK(count(s1.out, "class=\"spinor-tick\"") == 64);
}

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: cli_tests <path to discra> [doctest options]\n");
    return 2;
  }
  g_bin = argv[1];
  g_dir = fs::temp_directory_path() / ("discra_cli_" + std::to_string(::getpid()));
  fs::create_directories(g_dir);
  doctest::Context ctx;
  ctx.applyCommandLine(argc - 1, argv + 1);
  int rc = ctx.run();
  fs::remove_all(g_dir);
  return rc;
}
