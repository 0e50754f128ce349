#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>

#include "discra/mesh.hpp"

namespace discra {

enum class Carrier { lambda, diamond };

// Values on cells of Lambda or of the diamond.  1-forms live on canonical edge
// orientations; Lambda 2-forms are indexed by vertex (the face v*), entries at
// non-interior vertices are ignored.
struct Cochain {
  int degree = 0;
  Carrier carrier = Carrier::lambda;
  Eigen::VectorXcd v;

  cplx operator[](int i) const { return v[i]; }
};

enum class TypeTag { holomorphic, antiholomorphic };  // (1,0), (0,1)

int cell_count(const DoubleMap& m, int degree, Carrier c);
Cochain zeros(const DoubleMap& m, int degree, Carrier c);
Cochain make_cochain(int degree, Carrier c, Eigen::VectorXcd values);
Cochain epsilon(const DoubleMap& m);

Cochain coboundary(const DoubleMap& m, const Cochain& c);
Cochain hodge_star(const DoubleMap& m, const Cochain& c);
Cochain codifferential(const DoubleMap& m, const Cochain& c);   // -*d*
Cochain type_project(const DoubleMap& m, const Cochain& a, TypeTag t);
// d' and d'': pi o d on functions, d o pi on 1-forms (crossed types).
Cochain d_prime(const DoubleMap& m, const Cochain& c);
Cochain d_second(const DoubleMap& m, const Cochain& c);

// Diamond products: f.g, f.alpha, alpha^beta, f.omega.
Cochain wedge(const DoubleMap& m, const Cochain& a, const Cochain& b);
Cochain hetero_wedge(const DoubleMap& m, const Cochain& a, const Cochain& b);
Cochain average(const DoubleMap& m, const Cochain& a);

cplx inner_product(const DoubleMap& m, const Cochain& a, const Cochain& b);
// Sum of a Lambda 2-form over the faces of one complex (faces of Gamma are the
// stars of dual vertices), or over all of Lambda_2 when no complex is given.
cplx integrate_faces(const DoubleMap& m, const Cochain& w, std::optional<Kind> complex = std::nullopt);
cplx integrate_quads(const DoubleMap& m, const Cochain& w, const std::vector<int>& quads = {});

// Value of a Lambda or diamond 1-form along an oriented diamond side k of quad q.
inline cplx side_value(const DoubleMap& m, const Cochain& a, int q, int k) {
  return static_cast<double>(m.side_sign(q, k)) * a.v[m.quads[q].side[k]];
}

// Minimum-norm representative of the inverse of A on 1-forms.
struct BInverse {
  Cochain form;
  double residual = 0.0;       // max |A B a - a|
  Eigen::MatrixXcd kernel;     // columns span Ker A on diamond 1-forms
};
BInverse pseudo_inverse_A(const DoubleMap& m, const Cochain& a, bool with_kernel = false);

Eigen::MatrixXcd operator_matrix(int rows, int cols, const std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)>& op);

bool near_zero(cplx z, double scale);   // |z| <= 1e-12 (1 + scale)

}  // namespace discra
