#pragma once

#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "momap/dynamics.hpp"

namespace momap {

// ---------------------------------------------------------------------------
// Builtin systems

/// Board of mass m1 floating on water with a point mass m2 sliding on it.
/// Coordinates (x, xi): board position and position of m2 relative to the
/// board. G = R acts by x -> x + b.
struct BoardSpec {
  double m1 = 1.0;
  double m2 = 1.0;
  std::function<double(double)> potential;  ///< U(xi)
};

/// Disc of moment of inertia I with a point mass m on it. Coordinates
/// (r, phi, alpha): polar position of m relative to the disc and the disc
/// orientation. G = SO(2) acts by alpha -> alpha + beta.
struct DiscSpec {
  double inertia = 1.0;
  double mass = 1.0;
  std::function<double(double, double)> potential;  ///< U(r, phi)
};

/// N point masses in R^3, coordinates stacked as (x_1, y_1, z_1, x_2, ...).
/// Rotations alone act about the origin, r -> R^T r. With translations the
/// group is R^3 x SO(3) acting by r -> R^T (r - c) + c + b, c the center of
/// mass; on configurations with c = 0 both agree.
struct NBodySpec {
  std::vector<double> masses;
  bool translations = false;
  bool rotations = true;
  ScalarField potential;       ///< must be invariant under the chosen group
  std::optional<Vec> reference;  ///< audited for a singular inertia tensor when given
};

/// Table-driven system with an abelian group: constant metric, affine
/// generators X_alpha(x) = L_alpha x + t_alpha (mutually commuting), and a
/// quadratic potential. The action is the flow exp(sum_alpha b_alpha X_alpha).
struct GenericSpec {
  std::string name = "generic";
  Mat metric;
  std::vector<Mat> linear;
  std::vector<Vec> shift;
  Mat potential_quadratic;  ///< U = 1/2 x^T Q x + q^T x + c; may be empty
  Vec potential_linear;
  double potential_constant = 0.0;
  Vec sample_center;        ///< audit box center (defaults to the origin)
  double sample_radius = 1.0;
  unsigned seed = 0;
};

SystemModel build(const BoardSpec& spec);
SystemModel build(const DiscSpec& spec);
SystemModel build(const NBodySpec& spec);
/// Runs the Killing, action-law and potential-invariance audits at seeded
/// points and throws InvalidSpec if any fails.
SystemModel build(const GenericSpec& spec);

/// Spring 1/2 k (|r_a - r_b| - rest)^2 summed over pairs; E(3)-invariant.
ScalarField pair_spring_potential(int particles, double stiffness, double rest_length);

/// Inertia tensor sum_a m_a (|r_a|^2 1 - r_a r_a^T) about the origin.
Eigen::Matrix3d inertia_tensor(const std::vector<double>& masses, const Vec& x);
Eigen::Vector3d center_of_mass(const std::vector<double>& masses, const Vec& x);

/// Shifts the center of mass to the origin and rotates so that particle 1
/// lies on the +x axis and particle 2 in the upper xy half-plane.
Vec nbody_section(const std::vector<double>& masses, const Vec& x);

// ---------------------------------------------------------------------------
// Random sampling for property checks

using PointSampler = std::function<Vec(std::mt19937_64&)>;

PointSampler sampler(const BoardSpec& spec);
PointSampler sampler(const DiscSpec& spec);
/// Rejects configurations whose Gram matrix has eigenvalue ratio < 1e-3.
/// Gives up after 1000 draws and returns the last one.
PointSampler sampler(const NBodySpec& spec);
PointSampler sampler(const GenericSpec& spec);

GroupElement random_group_element(const LieStructure& lie, std::mt19937_64& rng);
/// Random Ad-invariant non-degenerate form: SPD for abelian blocks, a
/// positive multiple of the identity for so(3) blocks.
BilinearForm random_invariant_form(const LieStructure& lie, std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// Shape paths

/// (r0, xi0 + amplitude sin 2 pi t) with the board fixed at x0.
ShapePath board_sinusoid(double amplitude, double x0 = 0.0, double xi0 = 0.0);

/// Coordinate periods of the disc: phi and alpha are angles.
Vec disc_periods();

/// r(t) = r0, phi(t) = 2 pi turns t, alpha = 0.
ShapePath disc_circle_loop(double r0, double turns = 1.0);
/// r goes r0 -> r1 -> r0 at phi = phi0: r(t) = r0 + (r1 - r0)(1 - cos 2 pi t) / 2.
ShapePath radial_excursion(double r0, double r1, double phi0 = 0.0);
/// r(t) = r0 + dr sin(2 pi lobes t), phi(t) = 2 pi t.
ShapePath disc_wobble_loop(double r0, double dr, int lobes = 2);

ShapePath stationary_path(const Vec& point);

/// Three-particle "falling cat": a triangle with fixed base between
/// particles 1 and 2 whose base angles theta1, theta2 oscillate with a
/// phase shift, enclosing area in shape space.
struct CatLoopParams {
  std::vector<double> masses{1.0, 1.0, 1.0};
  double base = 1.0;
  double theta1 = 1.0471975511965976;  ///< pi/3
  double theta2 = 0.7853981633974483;  ///< pi/4
  double amplitude = 0.3;
  double phase = 1.5707963267948966;   ///< pi/2
};

/// Section point and velocity of the triangle with base angles (theta1,
/// theta2) and rates (rate1, rate2). The center of mass sits at the origin,
/// particle 1 on the +x axis, everything in the xy-plane.
TangentSample triangle_shape(const std::vector<double>& masses, double base, double theta1, double theta2,
                             double rate1, double rate2);

/// Throws SingularActionError naming t when the loop degenerates.
ShapePath cat_loop(const CatLoopParams& params = {});

/// Smallest lambda_min / lambda_max of the inertia tensor along the loop.
double min_inertia_ratio(const CatLoopParams& params, int samples = 1024);

}  // namespace momap
