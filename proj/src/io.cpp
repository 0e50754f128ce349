#include "discra/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace discra {

using json = nlohmann::ordered_json;

namespace {

std::string at(const std::string& what, int id) { return what + " " + std::to_string(id); }

const json& need(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw InputError(where + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw InputError(where + ": missing \"" + key + "\"");
  return *it;
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw InputError(where + ": expected a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw InputError(where + ": expected an integer");
  return j.get<int>();
}

cplx point(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) throw InputError(where + ": expected [x, y]");
  return {number(j[0], where), number(j[1], where)};
}

json point_json(cplx z) { return json::array({z.real(), z.imag()}); }

// Entries of a section placed by their "id", which must run over 0..n-1.
std::vector<const json*> by_id(const json& doc, const char* section, const char* what, bool required) {
  auto it = doc.find(section);
  if (it == doc.end()) {
    if (required) throw InputError(std::string("missing \"") + section + "\"");
    return {};
  }
  if (!it->is_array()) throw InputError(std::string("\"") + section + "\" must be an array");
  std::vector<const json*> out(it->size(), nullptr);
  for (std::size_t i = 0; i < it->size(); ++i) {
    const json& e = (*it)[i];
    int id = integer(need(e, "id", std::string(what) + " entry " + std::to_string(i)), std::string(what) + " id");
    if (id < 0 || id >= static_cast<int>(out.size()))
      throw InputError(at(what, id) + ": ids must run over 0.." + std::to_string(out.size() - 1));
    if (out[id]) throw InputError(at(what, id) + ": duplicate id");
    out[id] = &e;
  }
  return out;
}

std::vector<SignedEdge> edge_cycle(const json& e, const std::string& where, int num_edges) {
  const json& list = need(e, "edges", where);
  if (!list.is_array()) throw InputError(where + ": \"edges\" must be an array");
  std::vector<SignedEdge> out;
  for (const json& s : list) {
    if (!s.is_array() || s.size() != 2) throw InputError(where + ": edge entries are [edge, sign]");
    int id = integer(s[0], where), sg = integer(s[1], where);
    if (id < 0 || id >= num_edges) throw InputError(where + ": dangling reference to edge " + std::to_string(id));
    if (sg != 1 && sg != -1) throw InputError(where + ": sign must be 1 or -1");
    out.push_back({id, sg});
  }
  if (out.empty()) throw InputError(where + ": empty edge list");
  return out;
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("parse error: ") + e.what());
  }
}

}  // namespace

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

MeshFile parse_mesh(const std::string& text, bool build) {
  const json doc = parse_json(text);
  if (!doc.is_object()) throw InputError("mesh document must be an object");
  MeshFile f;
  const json& topo = need(doc, "topology", "mesh");
  if (topo == "torus") f.torus = true;
  else if (topo != "planar") throw InputError("topology must be \"planar\" or \"torus\"");
  if (f.torus) {
    auto it = doc.find("periods");
    if (it == doc.end()) throw InputError("topology torus requires periods");
    if (!it->is_array() || it->size() != 2) throw InputError("periods must hold two vectors");
    f.emb.periods = {point((*it)[0], "periods"), point((*it)[1], "periods")};
  }

  auto verts = by_id(doc, "vertices", "vertex", true);
  auto edges = by_id(doc, "edges", "edge", true);
  auto faces = by_id(doc, "faces", "face", false);
  auto bnd = by_id(doc, "boundary", "boundary cell", false);
  const int nV = static_cast<int>(verts.size()), nE = static_cast<int>(edges.size());
  if (nE == 0) throw InputError("mesh has no edges");

  CellComplex& g = f.complex;
  g.num_vertices = nV;
  g.edges.resize(nE);
  f.rho.resize(nE);
  std::vector<double> len(2 * nE, 0.0), dual_rho(nE, 0.0);
  int n_len = 0, n_dual_len = 0, n_dual_rho = 0, n_corners = 0;
  std::vector<std::array<cplx, 4>> corners(nE);
  for (int e = 0; e < nE; ++e) {
    const json& E = *edges[e];
    const std::string where = at("edge", e);
    for (int s = 0; s < 2; ++s) {
      int v = integer(need(E, s ? "head" : "tail", where), where);
      if (v < 0 || v >= nV) throw InputError(where + ": dangling reference to vertex " + std::to_string(v));
      g.edges[e][s] = v;
    }
    f.rho[e] = number(need(E, "rho", where), where + " rho");
    if (!(f.rho[e] > 0.0) || !std::isfinite(f.rho[e])) throw InputError(where + ": rho must be positive");
    if (E.contains("length")) {
      len[e] = number(E["length"], where + " length");
      ++n_len;
    }
    if (E.contains("dual_length")) {
      len[e + nE] = number(E["dual_length"], where + " dual_length");
      ++n_dual_len;
    }
    if (E.contains("dual_rho")) {
      dual_rho[e] = number(E["dual_rho"], where + " dual_rho");
      if (!(dual_rho[e] > 0.0) || !std::isfinite(dual_rho[e])) throw InputError(where + ": dual_rho must be positive");
      ++n_dual_rho;
    }
    if (E.contains("corners")) {
      const json& c = E["corners"];
      if (!c.is_array() || c.size() != 4) throw InputError(where + ": corners must list four points");
      for (int k = 0; k < 4; ++k) corners[e][k] = point(c[k], where + " corners");
      ++n_corners;
    }
  }
  auto all_or_none = [&](int n, const char* what) {
    if (n != 0 && n != nE) throw InputError(std::string(what) + " given on some edges only");
  };
  all_or_none(n_len, "length");
  all_or_none(n_dual_len, "dual_length");
  all_or_none(n_dual_rho, "dual_rho");
  all_or_none(n_corners, "corners");
  if ((n_len == 0) != (n_dual_len == 0)) throw InputError("length and dual_length must come together");
  if (n_len) f.lengths = len;

  for (std::size_t i = 0; i < faces.size(); ++i)
    g.faces.push_back(edge_cycle(*faces[i], at("face", static_cast<int>(i)), nE));
  for (std::size_t i = 0; i < bnd.size(); ++i)
    g.boundary.push_back({edge_cycle(*bnd[i], at("boundary cell", static_cast<int>(i)), nE)});
  if (!build) return f;

  try {
    f.map = build_double(g, f.rho, f.lengths);
    if (n_dual_rho) {
      std::vector<double> all(2 * nE);
      for (int e = 0; e < nE; ++e) all[e] = f.rho[e], all[e + nE] = dual_rho[e];
      double k = number(need(doc, "modulus", "mesh with dual_rho"), "modulus");
      f.map = with_massive_rho(f.map, all, k);
    }
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }

  // positions: all Lambda vertices or none
  const int nL = f.map.num_vertices();
  std::vector<cplx> pos(nL);
  std::vector<char> have(nL, 0);
  auto take = [&](const std::vector<const json*>& list, int offset, const char* what) {
    for (std::size_t i = 0; i < list.size(); ++i)
      if (list[i]->contains("pos")) {
        pos[offset + i] = point((*list[i])["pos"], at(what, static_cast<int>(i)) + " pos");
        have[offset + i] = 1;
      }
  };
  take(verts, 0, "vertex");
  take(faces, nV, "face");
  take(bnd, nV + static_cast<int>(faces.size()), "boundary cell");
  int n_have = static_cast<int>(std::count(have.begin(), have.end(), 1));
  if (n_have == nL) f.emb.pos = pos;
  else if (n_have > 0) {
    int v = static_cast<int>(std::find(have.begin(), have.end(), 0) - have.begin());
    throw InputError("position missing on Lambda vertex " + std::to_string(v) +
                     " (automatic boundary cells need an explicit \"boundary\" entry to carry one)");
  }
  if (n_corners) f.emb.corners = corners;
  return f;
}

MeshFile read_mesh(const std::string& path, bool build) { return parse_mesh(read_text(path), build); }

MeshFile mesh_from_map(const DoubleMap& m, const PlanarEmbedding& emb) {
  MeshFile f;
  const int Q = m.num_quads();
  f.complex = extract(m, Kind::primal);
  f.rho.assign(m.rho.begin(), m.rho.begin() + Q);
  f.lengths = m.len;
  f.torus = emb.torus();
  f.map = build_double(f.complex, f.rho, f.lengths);
  if (m.modulus != 1.0) f.map = with_massive_rho(f.map, m.rho, m.modulus);
  if (f.map.num_quads() != Q || f.map.num_vertices() != m.num_vertices())
    throw std::logic_error("mesh_from_map: rebuilt double has a different size");
  std::vector<int> old_of(m.num_vertices(), -1);
  for (int q = 0; q < Q; ++q)
    for (int k = 0; k < 4; ++k) {
      int nv = f.map.quads[q].v[k], ov = m.quads[q].v[k];
      if ((old_of[nv] >= 0 && old_of[nv] != ov) || f.map.kind[nv] != m.kind[ov])
        throw std::logic_error("mesh_from_map: quad corners do not correspond");
      old_of[nv] = ov;
    }
  f.emb.periods = emb.periods;
  f.emb.corners = emb.corners;
  if (!emb.pos.empty()) {
    f.emb.pos.resize(m.num_vertices());
    for (int v = 0; v < m.num_vertices(); ++v) {
      if (old_of[v] < 0) throw std::logic_error("mesh_from_map: isolated vertex");
      f.emb.pos[v] = emb.pos[old_of[v]];
    }
  }
  return f;
}

std::string write_mesh(const MeshFile& f) {
  const DoubleMap& m = f.map;
  const CellComplex& g = f.complex;
  const int nV = g.num_vertices, nE = static_cast<int>(g.edges.size()), nF = static_cast<int>(g.faces.size());
  const bool has_pos = !f.emb.pos.empty();
  const bool massive = m.modulus != 1.0;
  json doc;
  doc["topology"] = f.torus ? "torus" : "planar";
  if (f.torus) doc["periods"] = json::array({point_json(f.emb.periods[0]), point_json(f.emb.periods[1])});
  if (massive) doc["modulus"] = m.modulus;
  json verts = json::array();
  for (int v = 0; v < nV; ++v) {
    json V{{"id", v}};
    if (has_pos) V["pos"] = point_json(f.emb.pos[v]);
    verts.push_back(V);
  }
  doc["vertices"] = verts;
  json edges = json::array();
  for (int e = 0; e < nE; ++e) {
    json E{{"id", e}, {"tail", g.edges[e][0]}, {"head", g.edges[e][1]}, {"rho", m.rho[e]}};
    if (massive) E["dual_rho"] = m.rho[e + nE];
    if (!f.lengths.empty()) {
      E["length"] = f.lengths[e];
      E["dual_length"] = f.lengths[e + nE];
    }
    if (!f.emb.corners.empty()) {
      json c = json::array();
      for (cplx z : f.emb.corners[e]) c.push_back(point_json(z));
      E["corners"] = c;
    }
    edges.push_back(E);
  }
  doc["edges"] = edges;
  auto cells = [&](const std::vector<std::vector<SignedEdge>>& list, int offset) {
    json out = json::array();
    for (std::size_t i = 0; i < list.size(); ++i) {
      json es = json::array();
      for (SignedEdge s : list[i]) es.push_back(json::array({s.edge, s.sign}));
      json C{{"id", static_cast<int>(i)}, {"edges", es}};
      if (has_pos) C["pos"] = point_json(f.emb.pos[offset + i]);
      out.push_back(C);
    }
    return out;
  };
  doc["faces"] = cells(g.faces, nV);
  // automatic half-edge cells of the double are written out explicitly
  std::vector<std::vector<SignedEdge>> bcells;
  CellComplex full = extract(m, Kind::primal);
  for (const BoundaryCell& b : full.boundary) bcells.push_back(b.edges);
  if (static_cast<int>(full.faces.size()) != nF) throw std::logic_error("write_mesh: face count changed");
  doc["boundary"] = cells(bcells, nV + nF);
  return doc.dump(1) + "\n";
}

std::string write_mesh(const DoubleMap& m, const PlanarEmbedding& emb) { return write_mesh(mesh_from_map(m, emb)); }

std::string write_cochain(const Cochain& c) {
  json doc;
  doc["degree"] = c.degree;
  doc["carrier"] = c.carrier == Carrier::lambda ? "lambda" : "diamond";
  doc["size"] = static_cast<int>(c.v.size());
  json vals = json::array();
  for (int i = 0; i < c.v.size(); ++i) vals.push_back(json::array({i, c.v[i].real(), c.v[i].imag()}));
  doc["values"] = vals;
  return doc.dump() + "\n";
}

Cochain parse_cochain(const std::string& text, int expected_size) {
  const json doc = parse_json(text);
  Cochain c;
  c.degree = integer(need(doc, "degree", "cochain"), "degree");
  if (c.degree < 0 || c.degree > 2) throw InputError("cochain degree must be 0, 1 or 2");
  const json& car = need(doc, "carrier", "cochain");
  if (car == "lambda") c.carrier = Carrier::lambda;
  else if (car == "diamond") c.carrier = Carrier::diamond;
  else throw InputError("carrier must be \"lambda\" or \"diamond\"");
  int n = expected_size;
  if (n < 0) n = integer(need(doc, "size", "cochain"), "size");
  else if (doc.contains("size") && integer(doc["size"], "size") != n)
    throw InputError("cochain size " + std::to_string(doc["size"].get<int>()) + " does not match the mesh (" +
                     std::to_string(n) + ")");
  c.v = Eigen::VectorXcd::Zero(n);
  std::vector<char> seen(n, 0);
  const json& vals = need(doc, "values", "cochain");
  if (!vals.is_array()) throw InputError("\"values\" must be an array");
  for (const json& t : vals) {
    if (!t.is_array() || t.size() != 3) throw InputError("cochain values are [id, re, im]");
    int id = integer(t[0], "cochain id");
    if (id < 0 || id >= n) throw InputError("cochain: dangling reference to cell " + std::to_string(id));
    if (seen[id]) throw InputError("cochain: duplicate cell " + std::to_string(id));
    seen[id] = 1;
    c.v[id] = cplx(number(t[1], "cochain re"), number(t[2], "cochain im"));
  }
  return c;
}

std::string write_spinor(const Spinor& z, const SpinStructure& s) {
  json doc;
  doc["flips"] = s.flip;
  json vals = json::array();
  for (int xi = 0; xi < z.size(); ++xi)
    for (int sh = 0; sh < 2; ++sh)
      vals.push_back(json::array({xi, sh, z.at(xi, sh).real(), z.at(xi, sh).imag()}));
  doc["values"] = vals;
  return doc.dump() + "\n";
}

SpinorFile parse_spinor(const std::string& text) {
  const json doc = parse_json(text);
  SpinorFile f;
  const json& fl = need(doc, "flips", "spinor");
  if (!fl.is_array()) throw InputError("\"flips\" must be an array");
  for (const json& b : fl) {
    int x = integer(b, "flip");
    if (x != 0 && x != 1) throw InputError("flips are 0 or 1");
    f.flip.push_back(static_cast<std::uint8_t>(x));
  }
  const json& vals = need(doc, "values", "spinor");
  if (!vals.is_array() || vals.size() % 2) throw InputError("spinor values come in sheet pairs");
  const int n = static_cast<int>(vals.size() / 2);
  f.spinor.v.assign(2 * n, 0.0);
  std::vector<char> seen(2 * n, 0);
  for (const json& t : vals) {
    if (!t.is_array() || t.size() != 4) throw InputError("spinor values are [xi, sheet, re, im]");
    int xi = integer(t[0], "xi"), sh = integer(t[1], "sheet");
    if (xi < 0 || xi >= n || (sh != 0 && sh != 1))
      throw InputError("spinor: dangling reference to diamond edge " + std::to_string(xi));
    if (seen[2 * xi + sh]) throw InputError("spinor: duplicate entry for diamond edge " + std::to_string(xi));
    seen[2 * xi + sh] = 1;
    f.spinor.v[2 * xi + sh] = cplx(number(t[2], "re"), number(t[3], "im"));
  }
  return f;
}

namespace {

struct Frame {
  double x0 = 0, y1 = 0, scale = 1;
  std::string x(cplx z) const { return fixed((z.real() - x0) * scale + 20); }
  std::string y(cplx z) const { return fixed((y1 - z.imag()) * scale + 20); }
  static std::string fixed(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    std::string s = buf;
    return s == "-0.000" ? "0.000" : s;
  }
};

}  // namespace

std::string render_svg(const DoubleMap& m, const PlanarEmbedding& emb, const SvgOverlay& overlay) {
  const int Q = m.num_quads();
  if (emb.corners.empty() && static_cast<int>(emb.pos.size()) != m.num_vertices())
    throw std::invalid_argument("render_svg: missing positions");
  std::vector<std::array<cplx, 4>> quad(Q);
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (int q = 0; q < Q; ++q) {
    quad[q] = emb.quad(m, q);
    for (cplx z : quad[q]) {
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw std::invalid_argument("render_svg: missing positions");
      xmin = std::min(xmin, z.real()), xmax = std::max(xmax, z.real());
      ymin = std::min(ymin, z.imag()), ymax = std::max(ymax, z.imag());
    }
  }
  Frame fr;
  fr.x0 = xmin, fr.y1 = ymax;
  const double span = std::max({xmax - xmin, ymax - ymin, 1e-12});
  fr.scale = 760.0 / span;
  const double W = (xmax - xmin) * fr.scale + 40, H = (ymax - ymin) * fr.scale + 40;

  // one drawn location per Lambda vertex: its position, or the first corner that shows it
  std::vector<cplx> at(m.num_vertices());
  std::vector<char> placed(m.num_vertices(), 0);
  const bool per_vertex = emb.corners.empty() || !emb.torus();
  for (int q = 0; q < Q; ++q)
    for (int k = 0; k < 4; ++k) {
      int v = m.quads[q].v[k];
      if (!placed[v]) at[v] = quad[q][k], placed[v] = 1;
    }
  if (per_vertex && static_cast<int>(emb.pos.size()) == m.num_vertices()) at = emb.pos;

  double rmax = 0.0;
  for (double r : overlay.quad_residual) rmax = std::max(rmax, r);

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << Frame::fixed(W) << "\" height=\"" << Frame::fixed(H)
    << "\" viewBox=\"0 0 " << Frame::fixed(W) << ' ' << Frame::fixed(H) << "\">\n";
  o << "<g id=\"diamond\" stroke=\"none\">\n";
  for (int q = 0; q < Q; ++q) {
    int shade = 240;
    if (static_cast<int>(overlay.quad_residual.size()) == Q && rmax > 0.0)
      shade = 240 - static_cast<int>(std::lround(200.0 * overlay.quad_residual[q] / rmax));
    o << "<polygon class=\"diamond-face\" data-quad=\"" << q << "\" fill=\"rgb(" << 255 << ',' << shade << ','
      << shade << ")\" points=\"";
    for (int k = 0; k < 4; ++k) o << (k ? " " : "") << fr.x(quad[q][k]) << ',' << fr.y(quad[q][k]);
    o << "\"/>\n";
  }
  o << "</g>\n<g id=\"primal\" stroke=\"black\" stroke-width=\"1.5\">\n";
  for (int q = 0; q < Q; ++q)
    o << "<line class=\"primal-edge\" x1=\"" << fr.x(quad[q][0]) << "\" y1=\"" << fr.y(quad[q][0]) << "\" x2=\""
      << fr.x(quad[q][2]) << "\" y2=\"" << fr.y(quad[q][2]) << "\"/>\n";
  o << "</g>\n<g id=\"dual\" stroke=\"#2060c0\" stroke-width=\"1\" stroke-dasharray=\"4 3\">\n";
  for (int q = 0; q < Q; ++q)
    o << "<line class=\"dual-edge\" x1=\"" << fr.x(quad[q][1]) << "\" y1=\"" << fr.y(quad[q][1]) << "\" x2=\""
      << fr.x(quad[q][3]) << "\" y2=\"" << fr.y(quad[q][3]) << "\"/>\n";
  o << "</g>\n<g id=\"vertices\">\n";
  for (int v = 0; v < m.num_vertices(); ++v) {
    if (!placed[v]) continue;
    const bool p = m.kind[v] == Kind::primal;
    o << "<circle class=\"" << (p ? "primal-vertex" : "dual-vertex") << "\" data-id=\"" << v << "\" cx=\""
      << fr.x(at[v]) << "\" cy=\"" << fr.y(at[v]) << "\" r=\"" << (p ? "3" : "2") << "\" fill=\""
      << (p ? "black" : "white") << "\" stroke=\"" << (p ? "black" : "#2060c0") << "\"/>\n";
  }
  o << "</g>\n";
  if (overlay.spinor) {
    const Spinor& z = *overlay.spinor;
    if (z.size() != m.num_dedges()) throw std::invalid_argument("render_svg: spinor size does not match the map");
    o << "<g id=\"spinor\" stroke=\"#c03020\" stroke-width=\"1.5\">\n";
    double side = 0.0;
    for (int q = 0; q < Q; ++q) side = std::max(side, std::abs(quad[q][1] - quad[q][0]));
    for (int xi = 0; xi < m.num_dedges(); ++xi) {
      int q = m.dedges[xi].quads[0] >= 0 ? m.dedges[xi].quads[0] : m.dedges[xi].quads[1];
      int k = 0;
      while (k < 4 && m.quads[q].side[k] != xi) ++k;
      cplx mid = 0.5 * (quad[q][k] + quad[q][(k + 1) % 4]);
      double a = std::arg(z.at(xi, 0));
      cplx tip = mid + 0.3 * side * std::polar(1.0, a);
      char arg[32];
      std::snprintf(arg, sizeof arg, "%.6f", a);
      o << "<line class=\"spinor-tick\" data-xi=\"" << xi << "\" data-arg=\"" << arg << "\" x1=\"" << fr.x(mid)
        << "\" y1=\"" << fr.y(mid) << "\" x2=\"" << fr.x(tip) << "\" y2=\"" << fr.y(tip) << "\"/>\n";
    }
    o << "</g>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace discra
