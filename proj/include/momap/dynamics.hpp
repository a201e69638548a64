#pragma once

#include <functional>
#include <string>
#include <vector>

#include "momap/connection.hpp"

namespace momap {

using Curve = std::function<Vec(double)>;

/// Curve s(t), t in [0, 1], in configuration space representing a motion of
/// the shape. The horizontal lift is R_{g(t)} s(t).
class ShapePath {
 public:
  /// Velocity is finite-differenced when not supplied.
  ShapePath(std::string name, int dim, Curve section, Curve velocity = {});

  /// Tabulated path. Velocities at the samples come from centered
  /// differences (one-sided at the ends); between samples the path is a
  /// cubic Hermite interpolant. Times must increase from 0 to 1.
  static ShapePath sampled(std::string name, std::vector<double> times, std::vector<Vec> points);

  const std::string& name() const { return name_; }
  int dim() const { return dim_; }
  /// Number of tabulated samples, 0 for analytic paths.
  int samples() const { return samples_; }

  Vec point(double t) const { return section_(t); }
  Vec velocity(double t) const;

  /// Per-coordinate period for angular coordinates, 0 for none. A loop may
  /// end a whole number of periods away from where it started.
  const Vec& periods() const { return periods_; }
  ShapePath with_periods(Vec periods) const;

  /// max_i |s_i(1) - s_i(0)|, reduced modulo the coordinate period.
  double endpoint_gap() const;
  bool is_loop(double tol = 1e-12) const { return endpoint_gap() <= tol; }

 private:
  std::string name_;
  int dim_;
  int samples_ = 0;
  Curve section_;
  Curve velocity_;
  Vec periods_;
};

/// t -> s(w(t)) with w a monotone map of [0,1] onto itself.
ShapePath reparameterize(const ShapePath& p, std::function<double(double)> warp,
                         std::function<double(double)> warp_rate);

enum class Integrator {
  RK4,       ///< classical RK4 on the group, SO(3) blocks polar-reprojected each step
  LieEuler,  ///< g_{n+1} = exp(-h a(t_n)) g_n, first order
};

struct LiftOptions {
  int steps = 4096;  ///< per unit time
  Integrator method = Integrator::RK4;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> points;             ///< gamma(t_n) = R_{g_n} s(t_n)
  std::vector<GroupElement> group;     ///< g_n
  std::vector<AlgebraVector> group_log;
  std::vector<Vec> velocities;         ///< finite differences of points
  std::vector<DualVector> momenta;     ///< P(gamma_n, velocity_n)
  std::vector<AlgebraVector> pairing;  ///< A(gamma_n) velocity_n
};

/// Fourth-order finite-difference velocities on a uniform grid (second
/// order when fewer than five samples).
std::vector<Vec> finite_difference_velocities(const std::vector<double>& times, const std::vector<Vec>& points);

/// Trajectory record for an arbitrary sampled motion (e.g. a rigid
/// rotation); velocities, momenta and pairings are finite-differenced.
Trajectory make_trajectory(const SystemModel& m, std::vector<double> times, std::vector<Vec> points);

/// a(t) = A_{s(t)}(s'(t)); rethrows singular-action errors with t attached.
AlgebraVector shape_connection(const SystemModel& m, const ShapePath& p, double t);

/// Solves g^-1 g' = -Ad_{g^-1} A(s') (g' = -A(s') for abelian blocks) from
/// g(0) = g0 and returns g(1) only.
GroupElement integrate_reconstruction(const SystemModel& m, const ShapePath& p, const GroupElement& g0,
                                      const LiftOptions& opt = {});

Trajectory horizontal_lift(const SystemModel& m, const ShapePath& p, const GroupElement& g0,
                           const LiftOptions& opt = {});

struct HolonomyResult {
  GroupElement element;  ///< gamma(1) = R_element gamma(0)
  AlgebraVector log;
};

/// Holonomy of a closed shape loop starting from the fiber point R_{g0} s(0).
/// Equals g0^-1 g(1); conjugates by g0 under change of starting point.
HolonomyResult holonomy(const SystemModel& m, const ShapePath& loop, const GroupElement& g0,
                        const LiftOptions& opt = {});

struct MomentumAuditResult {
  double max_momentum = 0.0;  ///< max_n ||P(gamma_n, v_n)||_inf
  /// max_n,alpha |P_alpha| / (|X_alpha|_g max_m |v_m|_g): dimensionless,
  /// zero for horizontal motion, one for steady motion along a generator.
  double normalized = 0.0;
  double max_pairing = 0.0;  ///< max_n ||A v_n||_inf
  /// max_n of ||A v|| lambda_max / ||P|| outside [1, cond(gram)]; zero when
  /// the pairing and momentum residuals are consistent.
  double consistency_violation = 0.0;
};

/// Recomputes velocities from the trajectory points and audits P = 0.
MomentumAuditResult momentum_audit(const SystemModel& m, const Trajectory& t);

struct CurvatureSample {
  Vec x;
  int i = 0;
  int j = 0;
  AlgebraVector value;  ///< F^alpha_ij
};

/// F_ij = d_i A_j - d_j A_i + [A_i, A_j] by central differences of
/// connection_at.
CurvatureSample curvature_numeric(const SystemModel& m, const Vec& x, int i, int j);

}  // namespace momap
