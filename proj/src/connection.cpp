#include "momap/connection.hpp"

namespace momap {

ConnectionEval connection_at(const SystemModel& m, const Vec& x) {
  const Mat g = gram(m, x);
  const Mat flattened = m.generators(x).transpose() * m.metric(x);  // row beta = flat X_beta
  const Eigen::LLT<Mat> llt(g);
  if (llt.info() != Eigen::Success) {
    throw SingularActionError("Cholesky factorization of the Gram matrix failed", g);
  }
  return {x, llt.solve(flattened)};
}

AlgebraVector pair(const ConnectionEval& c, const Vec& v) {
  if (v.size() != c.components.cols()) throw Error(ErrorCode::Structural, "pair: velocity has wrong dimension");
  return AlgebraVector(c.components * v);
}

Vec horizontal_projection(const SystemModel& m, const Vec& x, const Vec& v) {
  const ConnectionEval c = connection_at(m, x);
  return v - m.generators(x) * (c.components * v);
}

double verify_equivariance(const SystemModel& m, const Vec& x, const GroupElement& g) {
  const Mat a_here = connection_at(m, x).components;
  const Mat a_there = connection_at(m, m.act(g, x)).components;
  const Mat pulled_back = a_there * action_tangent(m, g, x);
  const Mat expected = adjoint_matrix(inverse(g)) * a_here;
  return (pulled_back - expected).cwiseAbs().maxCoeff();
}

Mat connection_via_bilinear_form(const SystemModel& m, const Vec& x, const BilinearForm& h) {
  if (h.dim() != m.k()) throw Error(ErrorCode::Structural, "bilinear form dimension differs from the algebra");
  if (!h.is_ad_invariant(m.lie())) {
    throw Error(ErrorCode::DegenerateForm, "bilinear form is not Ad-invariant");
  }
  const Mat xs = m.generators(x);
  const Mat flattened = xs.transpose() * m.metric(x);
  // h^-1 applied to each covector column of the Ad*-type form.
  Mat a_hat(m.k(), m.n());
  for (int i = 0; i < m.n(); ++i) {
    a_hat.col(i) = hat_map_inverse(h, DualVector(flattened.col(i))).components();
  }
  const Mat c = a_hat * xs;  // C(x)(E_alpha) = <A_hat, X_alpha>
  return canonicalize(c, a_hat);
}

double verify_h_independence(const SystemModel& m, const Vec& x, const BilinearForm& h) {
  const Mat via_h = connection_via_bilinear_form(m, x, h);
  return (via_h - connection_at(m, x).components).cwiseAbs().maxCoeff();
}

}  // namespace momap
