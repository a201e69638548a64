#pragma once

#include "momap/geometry.hpp"

namespace momap {

/// Connection form at a point: A = A^alpha_i dx^i (x) E_alpha stored as the
/// k x n matrix of components.
struct ConnectionEval {
  Vec x;
  Mat components;
};

/// A^alpha_i = (gram^-1)^{alpha beta} g_ij X^j_beta, the inverse Gram matrix
/// applied to the flattened generators. Solved through a Cholesky
/// factorization of the Gram matrix.
ConnectionEval connection_at(const SystemModel& m, const Vec& x);

/// <A, v>.
AlgebraVector pair(const ConnectionEval& c, const Vec& v);

/// v - X(x) A(x) v.
Vec horizontal_projection(const SystemModel& m, const Vec& x, const Vec& v);

/// max-norm of (R_g^* A)_x - Ad_{g^-1} A_x, the pullback taken through the
/// finite-difference tangent of the action.
double verify_equivariance(const SystemModel& m, const Vec& x, const GroupElement& g);

/// The same form assembled as C^-1 o h^-1 o P~, where P~ are the flattened
/// generators and C(x) = <h^-1 P~, X>.
Mat connection_via_bilinear_form(const SystemModel& m, const Vec& x, const BilinearForm& h);

/// Componentwise max difference between connection_via_bilinear_form and
/// connection_at. Throws DegenerateForm when h is not Ad-invariant.
double verify_h_independence(const SystemModel& m, const Vec& x, const BilinearForm& h);

}  // namespace momap
