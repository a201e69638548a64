#pragma once

#include <functional>
#include <string>

#include <Eigen/Dense>

#include "momap/lie.hpp"

namespace momap {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

using MetricField = std::function<Mat(const Vec&)>;
using ScalarField = std::function<double(const Vec&)>;
using GeneratorField = std::function<Mat(const Vec&)>;  ///< n x k, column alpha = X_alpha(x)
using VectorField = std::function<Vec(const Vec&)>;
using ActionMap = std::function<Vec(const GroupElement&, const Vec&)>;

/// Natural Lagrangian system L = 1/2 g(v,v) - U with a right action R_g of
/// a Lie group. All fields are black-box evaluation maps.
class SystemModel {
 public:
  struct Parts {
    std::string name;
    int n = 0;
    LieStructure lie;
    MetricField metric;
    ScalarField potential;
    GeneratorField generators;
    ActionMap action;
  };

  explicit SystemModel(Parts parts);

  const std::string& name() const { return p_.name; }
  int n() const { return p_.n; }
  int k() const { return p_.lie.dim(); }
  const LieStructure& lie() const { return p_.lie; }

  Mat metric(const Vec& x) const;
  double potential(const Vec& x) const { return p_.potential(x); }
  Mat generators(const Vec& x) const;
  Vec act(const GroupElement& g, const Vec& x) const;

  /// X_alpha as a vector field.
  VectorField generator(int alpha) const;

 private:
  Parts p_;
};

struct TangentSample {
  Vec x;
  Vec v;
};

/// Relative eigenvalue floor below which the Gram matrix counts as singular.
inline constexpr double kSingularGramTolerance = 1e-9;

/// Central-difference step cbrt(eps) * max(1, scale).
double fd_step(double scale);

double lagrangian(const SystemModel& m, const TangentSample& s);
Vec flat(const SystemModel& m, const Vec& x, const Vec& v);

/// g_{ab}(x) = g(X_a, X_b), exactly symmetric. Throws SingularActionError
/// when the smallest eigenvalue falls below the relative tolerance.
Mat gram(const SystemModel& m, const Vec& x, double tol = kSingularGramTolerance);
Mat gram_unchecked(const SystemModel& m, const Vec& x);

/// P_a(x, v) = g(X_a(x), v).
DualVector momentum(const SystemModel& m, const TangentSample& s);

/// V^i dL/dv^i by central differences in v.
double vertical_lift_derivative(const SystemModel& m, const TangentSample& s, const VectorField& field);
/// V^i dL/dx^i + (d_j V^i) v^j dL/dv^i by central differences in x, v and V.
double complete_lift_derivative(const SystemModel& m, const TangentSample& s, const VectorField& field);

/// Max-norm of the finite-difference Lie derivative of g along X_alpha.
double killing_check(const SystemModel& m, const Vec& x, int alpha);

/// d(R_g)/dx at x by central differences; TR_g v = J v.
Mat action_tangent(const SystemModel& m, const GroupElement& g, const Vec& x);

// Audits of the SystemModel invariants.

/// ||R_h(R_g x) - R_{gh} x||_inf.
double action_law_residual(const SystemModel& m, const GroupElement& g, const GroupElement& h, const Vec& x);
/// |U(R_g x) - U(x)|.
double potential_invariance_residual(const SystemModel& m, const GroupElement& g, const Vec& x);
/// lambda_min / lambda_max of g(x); also the exact-symmetry gap via `asymmetry`.
double metric_eigen_ratio(const SystemModel& m, const Vec& x, double* asymmetry = nullptr);
/// ||P(R_g x, TR_g v) - Ad*_g P(x, v)||_inf.
double momentum_equivariance_residual(const SystemModel& m, const GroupElement& g, const TangentSample& s);

}  // namespace momap
