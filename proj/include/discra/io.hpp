#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "discra/critical.hpp"
#include "discra/dirac.hpp"
#include "discra/forms.hpp"
#include "discra/mesh.hpp"

namespace discra {

// Schema or value problem in an input document.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A mesh as stored on disk.  Lambda vertex ids follow build_double: primal
// vertices, then faces, then boundary cells.
struct MeshFile {
  CellComplex complex;
  std::vector<double> rho;          // per primal edge
  std::vector<double> lengths;      // 2 E (primal then dual) or empty
  bool torus = false;
  PlanarEmbedding emb;              // pos empty when the file has no positions
  DoubleMap map;
};

// With build = false only the complex, rho and lengths are read (map left empty).
MeshFile parse_mesh(const std::string& text, bool build = true);
MeshFile read_mesh(const std::string& path, bool build = true);
// Serialize a double together with its embedding.  The map is rebuilt from its
// primal complex, so vertex ids of the output may differ from those of `m`.
std::string write_mesh(const DoubleMap& m, const PlanarEmbedding& emb);
std::string write_mesh(const MeshFile& f);
// The stored form of (m, emb): primal complex, rho and positions remapped to
// the ids the rebuilt double uses.
MeshFile mesh_from_map(const DoubleMap& m, const PlanarEmbedding& emb);

std::string write_cochain(const Cochain& c);
// `expected_size` < 0 takes the "size" field of the document.
Cochain parse_cochain(const std::string& text, int expected_size = -1);

struct SpinorFile {
  Spinor spinor;
  std::vector<std::uint8_t> flip;
};
std::string write_spinor(const Spinor& z, const SpinStructure& s);
SpinorFile parse_spinor(const std::string& text);

struct SvgOverlay {
  std::vector<double> quad_residual;   // per quad, shades the diamond faces
  const Spinor* spinor = nullptr;      // ticks at diamond-edge midpoints, angle arg zeta
};
std::string render_svg(const DoubleMap& m, const PlanarEmbedding& emb, const SvgOverlay& overlay = {});

std::string read_text(const std::string& path);

}  // namespace discra
