#include "discra/forms.hpp"

#include <stdexcept>

namespace discra {

int cell_count(const DoubleMap& m, int degree, Carrier c) {
  switch (degree) {
    case 0: return m.num_vertices();
    case 1: return c == Carrier::lambda ? m.num_edges() : m.num_dedges();
    case 2: return c == Carrier::lambda ? m.num_vertices() : m.num_quads();
    default: throw std::invalid_argument("degree must be 0, 1 or 2");
  }
}

Cochain zeros(const DoubleMap& m, int degree, Carrier c) {
  return Cochain{degree, c, Eigen::VectorXcd::Zero(cell_count(m, degree, c))};
}

Cochain make_cochain(int degree, Carrier c, Eigen::VectorXcd values) { return Cochain{degree, c, std::move(values)}; }

Cochain epsilon(const DoubleMap& m) {
  Cochain e = zeros(m, 0, Carrier::lambda);
  for (int v = 0; v < m.num_vertices(); ++v) e.v[v] = m.kind[v] == Kind::primal ? 1.0 : -1.0;
  return e;
}

namespace {

void require(const DoubleMap& m, const Cochain& c, int degree, Carrier car, const char* what) {
  if (c.degree != degree || c.carrier != car) throw std::invalid_argument(std::string(what) + ": wrong degree or carrier");
  if (c.v.size() != cell_count(m, degree, car)) throw std::invalid_argument(std::string(what) + ": size mismatch");
}

}  // namespace

Cochain coboundary(const DoubleMap& m, const Cochain& c) {
  if (c.degree >= 2) throw std::invalid_argument("coboundary of a 2-form");
  if (c.v.size() != cell_count(m, c.degree, c.carrier)) throw std::invalid_argument("coboundary: size mismatch");
  Cochain out = zeros(m, c.degree + 1, c.carrier);
  if (c.carrier == Carrier::lambda) {
    if (c.degree == 0) {
      for (int e = 0; e < m.num_edges(); ++e) out.v[e] = c.v[m.head(e)] - c.v[m.tail(e)];
    } else {
      for (int v = 0; v < m.num_vertices(); ++v) {
        if (!m.interior(v)) continue;
        cplx s = 0.0;
        for (SignedEdge se : m.face_boundary(v)) s += static_cast<double>(se.sign) * c.v[se.edge];
        out.v[v] = s;
      }
    }
  } else {
    if (c.degree == 0) {
      for (int s = 0; s < m.num_dedges(); ++s) out.v[s] = c.v[m.dedges[s].d] - c.v[m.dedges[s].p];
    } else {
      for (int q = 0; q < m.num_quads(); ++q) {
        cplx s = 0.0;
        for (int k = 0; k < 4; ++k) s += side_value(m, c, q, k);
        out.v[q] = s;
      }
    }
  }
  return out;
}

Cochain hodge_star(const DoubleMap& m, const Cochain& c) {
  if (c.carrier != Carrier::lambda) throw std::invalid_argument("no Hodge star on the diamond");
  const int Q = m.num_quads();
  if (c.degree == 1) {
    require(m, c, 1, Carrier::lambda, "hodge_star");
    Cochain out = zeros(m, 1, Carrier::lambda);
    for (int q = 0; q < Q; ++q) {
      out.v[q] = -m.rho[q + Q] * c.v[q + Q];
      out.v[q + Q] = m.rho[q] * c.v[q];
    }
    return out;
  }
  // 0 <-> 2, both indexed by vertex; only interior vertices carry faces
  Cochain out = zeros(m, 2 - c.degree, Carrier::lambda);
  for (int v = 0; v < m.num_vertices(); ++v)
    if (m.interior(v)) out.v[v] = c.v[v];
  return out;
}

Cochain codifferential(const DoubleMap& m, const Cochain& c) {
  Cochain r = hodge_star(m, coboundary(m, hodge_star(m, c)));
  r.v = -r.v;
  return r;
}

Cochain type_project(const DoubleMap& m, const Cochain& a, TypeTag t) {
  require(m, a, 1, Carrier::lambda, "type_project");
  Cochain s = hodge_star(m, a);
  const cplx sgn = t == TypeTag::holomorphic ? cplx(0, 1) : cplx(0, -1);
  Cochain out = a;
  out.v = 0.5 * (a.v + sgn * s.v);
  return out;
}

Cochain d_prime(const DoubleMap& m, const Cochain& c) {
  if (c.degree == 0) return type_project(m, coboundary(m, c), TypeTag::holomorphic);
  if (c.degree == 1) return coboundary(m, type_project(m, c, TypeTag::antiholomorphic));
  return zeros(m, 2, Carrier::lambda);
}

Cochain d_second(const DoubleMap& m, const Cochain& c) {
  if (c.degree == 0) return type_project(m, coboundary(m, c), TypeTag::antiholomorphic);
  if (c.degree == 1) return coboundary(m, type_project(m, c, TypeTag::holomorphic));
  return zeros(m, 2, Carrier::lambda);
}

Cochain wedge(const DoubleMap& m, const Cochain& a, const Cochain& b) {
  if (a.carrier != Carrier::diamond || b.carrier != Carrier::diamond) {
    // functions are shared between Lambda and the diamond
    if (!(a.degree == 0 || a.carrier == Carrier::diamond) || !(b.degree == 0 || b.carrier == Carrier::diamond))
      throw std::invalid_argument("wedge is defined on the diamond");
  }
  if (a.degree + b.degree > 2) throw std::invalid_argument("wedge: degree overflow");
  if (a.degree > b.degree) {
    Cochain r = wedge(m, b, a);
    if (a.degree == 1 && b.degree == 1) r.v = -r.v;
    return r;
  }
  if (a.degree == 0 && b.degree == 0) {
    Cochain out = zeros(m, 0, Carrier::diamond);
    out.v = a.v.cwiseProduct(b.v);
    return out;
  }
  if (a.degree == 0 && b.degree == 1) {
    Cochain out = zeros(m, 1, Carrier::diamond);
    for (int s = 0; s < m.num_dedges(); ++s) out.v[s] = 0.5 * (a.v[m.dedges[s].p] + a.v[m.dedges[s].d]) * b.v[s];
    return out;
  }
  if (a.degree == 0 && b.degree == 2) {
    Cochain out = zeros(m, 2, Carrier::diamond);
    for (int q = 0; q < m.num_quads(); ++q) {
      cplx s = 0.0;
      for (int k = 0; k < 4; ++k) s += a.v[m.quads[q].v[k]];
      out.v[q] = 0.25 * s * b.v[q];
    }
    return out;
  }
  Cochain out = zeros(m, 2, Carrier::diamond);
  for (int q = 0; q < m.num_quads(); ++q) {
    cplx s = 0.0;
    for (int k = 0; k < 4; ++k) {
      int km = (k + 3) % 4;
      s += side_value(m, a, q, km) * side_value(m, b, q, k) - side_value(m, a, q, k) * side_value(m, b, q, km);
    }
    out.v[q] = 0.25 * s;
  }
  return out;
}

Cochain hetero_wedge(const DoubleMap& m, const Cochain& a, const Cochain& b) {
  require(m, a, 1, Carrier::lambda, "hetero_wedge");
  require(m, b, 1, Carrier::lambda, "hetero_wedge");
  const int Q = m.num_quads();
  Cochain out = zeros(m, 2, Carrier::diamond);
  for (int q = 0; q < Q; ++q) out.v[q] = a.v[q] * b.v[q + Q] - a.v[q + Q] * b.v[q];
  return out;
}

Cochain average(const DoubleMap& m, const Cochain& a) {
  if (a.degree == 0) {
    Cochain out = a;
    out.carrier = Carrier::lambda;
    return out;
  }
  if (a.carrier != Carrier::diamond) throw std::invalid_argument("average: input must live on the diamond");
  const int Q = m.num_quads();
  if (a.degree == 1) {
    Cochain out = zeros(m, 1, Carrier::lambda);
    for (int q = 0; q < Q; ++q) {
      cplx s0 = side_value(m, a, q, 0), s1 = side_value(m, a, q, 1), s2 = side_value(m, a, q, 2),
           s3 = side_value(m, a, q, 3);
      out.v[q] = 0.5 * (s0 + s1 - s2 - s3);
      out.v[q + Q] = 0.5 * (s1 + s2 - s0 - s3);
    }
    return out;
  }
  Cochain out = zeros(m, 2, Carrier::lambda);
  for (int v = 0; v < m.num_vertices(); ++v) {
    if (!m.interior(v)) continue;
    cplx s = 0.0;
    for (const Corner& c : m.rings[v]) s += a.v[c.quad];
    out.v[v] = 0.5 * s;
  }
  return out;
}

cplx inner_product(const DoubleMap& m, const Cochain& a, const Cochain& b) {
  if (a.degree != b.degree || a.carrier != Carrier::lambda || b.carrier != Carrier::lambda)
    throw std::invalid_argument("inner_product: Lambda cochains of equal degree required");
  cplx s = 0.0;
  if (a.degree == 1) {
    for (int e = 0; e < m.num_edges(); ++e) s += m.rho[e] * a.v[e] * std::conj(b.v[e]);
  } else if (a.degree == 0) {
    s = b.v.dot(a.v);
  } else {
    for (int v = 0; v < m.num_vertices(); ++v)
      if (m.interior(v)) s += a.v[v] * std::conj(b.v[v]);
  }
  return s;
}

cplx integrate_faces(const DoubleMap& m, const Cochain& w, std::optional<Kind> complex) {
  require(m, w, 2, Carrier::lambda, "integrate_faces");
  cplx s = 0.0;
  for (int v = 0; v < m.num_vertices(); ++v) {
    if (!m.interior(v)) continue;
    if (complex && m.kind[v] != other(*complex)) continue;
    s += w.v[v];
  }
  return s;
}

cplx integrate_quads(const DoubleMap& m, const Cochain& w, const std::vector<int>& quads) {
  require(m, w, 2, Carrier::diamond, "integrate_quads");
  if (quads.empty()) return w.v.sum();
  cplx s = 0.0;
  for (int q : quads) s += w.v[q];
  return s;
}

Eigen::MatrixXcd operator_matrix(int rows, int cols, const std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)>& op) {
  Eigen::MatrixXcd M(rows, cols);
  Eigen::VectorXcd e = Eigen::VectorXcd::Zero(cols);
  for (int j = 0; j < cols; ++j) {
    e[j] = 1.0;
    M.col(j) = op(e);
    e[j] = 0.0;
  }
  return M;
}

BInverse pseudo_inverse_A(const DoubleMap& m, const Cochain& a, bool with_kernel) {
  require(m, a, 1, Carrier::lambda, "pseudo_inverse_A");
  const int S = m.num_dedges();
  Eigen::MatrixXcd A = operator_matrix(m.num_edges(), S, [&](const Eigen::VectorXcd& x) -> Eigen::VectorXcd {
    return average(m, make_cochain(1, Carrier::diamond, x)).v;
  });
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(A);
  cod.setThreshold(1e-12);
  BInverse out;
  out.form = make_cochain(1, Carrier::diamond, cod.solve(a.v));
  out.residual = (A * out.form.v - a.v).cwiseAbs().maxCoeff();
  if (with_kernel) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    double cutoff = 1e-10 * (sv.size() ? sv[0] : 1.0);
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
      if (sv[i] > cutoff) ++rank;
    out.kernel = svd.matrixV().rightCols(S - rank);
  }
  return out;
}

bool near_zero(cplx z, double scale) { return std::abs(z) <= 1e-12 * (1.0 + scale); }

}  // namespace discra
