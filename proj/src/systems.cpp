#include "momap/systems.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

namespace momap {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(ErrorCode::InvalidSpec, std::string(what) + " must be positive and finite");
  }
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace

// ---------------------------------------------------------------------------
// Board

SystemModel build(const BoardSpec& spec) {
  require_positive(spec.m1, "board mass m1");
  require_positive(spec.m2, "point mass m2");
  const double m1 = spec.m1, m2 = spec.m2;
  SystemModel::Parts p;
  p.name = "board";
  p.n = 2;
  p.lie = LieStructure::abelian(1);
  p.metric = [m1, m2](const Vec&) {
    Mat g(2, 2);
    g << m1 + m2, m2, m2, m2;
    return g;
  };
  if (spec.potential) {
    p.potential = [u = spec.potential](const Vec& x) { return u(x[1]); };
  }
  p.generators = [](const Vec&) {
    Mat xs(2, 1);
    xs << 1.0, 0.0;
    return xs;
  };
  p.action = [](const GroupElement& g, const Vec& x) {
    Vec y = x;
    y[0] += g.offset()[0];
    return y;
  };
  return SystemModel(std::move(p));
}

PointSampler sampler(const BoardSpec&) {
  return [](std::mt19937_64& rng) {
    Vec x(2);
    x << uniform(rng, -2.0, 2.0), uniform(rng, -2.0, 2.0);
    return x;
  };
}

// ---------------------------------------------------------------------------
// Disc

SystemModel build(const DiscSpec& spec) {
  require_positive(spec.inertia, "disc moment of inertia");
  require_positive(spec.mass, "point mass");
  const double inertia = spec.inertia, m = spec.mass;
  SystemModel::Parts p;
  p.name = "disc";
  p.n = 3;
  p.lie = LieStructure::abelian(1);
  // 1/2 I a'^2 + 1/2 m (r'^2 + r^2 (a' + phi')^2) in (r, phi, alpha).
  p.metric = [inertia, m](const Vec& x) {
    const double mr2 = m * x[0] * x[0];
    Mat g = Mat::Zero(3, 3);
    g(0, 0) = m;
    g(1, 1) = mr2;
    g(1, 2) = g(2, 1) = mr2;
    g(2, 2) = inertia + mr2;
    return g;
  };
  if (spec.potential) {
    p.potential = [u = spec.potential](const Vec& x) { return u(x[0], x[1]); };
  }
  p.generators = [](const Vec&) {
    Mat xs = Mat::Zero(3, 1);
    xs(2, 0) = 1.0;
    return xs;
  };
  p.action = [](const GroupElement& g, const Vec& x) {
    Vec y = x;
    y[2] += g.offset()[0];
    return y;
  };
  return SystemModel(std::move(p));
}

PointSampler sampler(const DiscSpec&) {
  return [](std::mt19937_64& rng) {
    Vec x(3);
    x << uniform(rng, 0.3, 3.0), uniform(rng, -std::numbers::pi, std::numbers::pi),
        uniform(rng, -std::numbers::pi, std::numbers::pi);
    return x;
  };
}

// ---------------------------------------------------------------------------
// N particles

Eigen::Vector3d center_of_mass(const std::vector<double>& masses, const Vec& x) {
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  double total = 0.0;
  for (size_t a = 0; a < masses.size(); ++a) {
    c += masses[a] * x.segment<3>(3 * a);
    total += masses[a];
  }
  return c / total;
}

Eigen::Matrix3d inertia_tensor(const std::vector<double>& masses, const Vec& x) {
  Eigen::Matrix3d in = Eigen::Matrix3d::Zero();
  for (size_t a = 0; a < masses.size(); ++a) {
    const Eigen::Vector3d r = x.segment<3>(3 * a);
    in += masses[a] * (r.squaredNorm() * Eigen::Matrix3d::Identity() - r * r.transpose());
  }
  return in;
}

Vec nbody_section(const std::vector<double>& masses, const Vec& x) {
  const size_t n = masses.size();
  const Eigen::Vector3d c = center_of_mass(masses, x);
  Vec y(x.size());
  for (size_t a = 0; a < n; ++a) y.segment<3>(3 * a) = x.segment<3>(3 * a) - c;
  if (n < 2) return y;
  const Eigen::Vector3d e1 = y.segment<3>(0).normalized();
  Eigen::Vector3d e2 = y.segment<3>(3) - e1.dot(y.segment<3>(3)) * e1;
  if (e2.norm() < 1e-14) {
    e2 = e1.unitOrthogonal();
  } else {
    e2.normalize();
  }
  Eigen::Matrix3d frame;
  frame << e1, e2, e1.cross(e2);
  for (size_t a = 0; a < n; ++a) y.segment<3>(3 * a) = frame.transpose() * y.segment<3>(3 * a);
  return y;
}

SystemModel build(const NBodySpec& spec) {
  if (spec.masses.empty()) throw Error(ErrorCode::InvalidSpec, "n-body system needs at least one particle");
  for (double m : spec.masses) require_positive(m, "particle mass");
  if (!spec.translations && !spec.rotations) {
    throw Error(ErrorCode::InvalidSpec, "n-body system needs translations, rotations or both");
  }
  const std::vector<double> masses = spec.masses;
  const int count = static_cast<int>(masses.size());
  const int n = 3 * count;
  const bool tr = spec.translations, rot = spec.rotations;
  SystemModel::Parts p;
  p.name = "nbody";
  p.n = n;
  if (tr && rot) {
    p.lie = LieStructure::product({LieStructure::abelian(3), LieStructure::so3()});
  } else {
    p.lie = tr ? LieStructure::abelian(3) : LieStructure::so3();
  }
  p.metric = [masses, n](const Vec&) {
    Mat g = Mat::Zero(n, n);
    for (size_t a = 0; a < masses.size(); ++a) g.block<3, 3>(3 * a, 3 * a) = masses[a] * Eigen::Matrix3d::Identity();
    return g;
  };
  p.potential = spec.potential;
  p.generators = [masses, n, tr, rot](const Vec& x) {
    Mat xs = Mat::Zero(n, (tr ? 3 : 0) + (rot ? 3 : 0));
    int col = 0;
    if (tr) {
      for (size_t a = 0; a < masses.size(); ++a) xs.block<3, 3>(3 * a, 0) = Eigen::Matrix3d::Identity();
      col = 3;
    }
    if (rot) {
      const Eigen::Vector3d c = tr ? center_of_mass(masses, x) : Eigen::Vector3d::Zero();
      for (size_t a = 0; a < masses.size(); ++a) {
        const Eigen::Vector3d r = x.segment<3>(3 * a) - c;
        for (int i = 0; i < 3; ++i) xs.block<3, 1>(3 * a, col + i) = r.cross(Eigen::Vector3d::Unit(i));
      }
    }
    return xs;
  };
  p.action = [masses, tr, rot](const GroupElement& g, const Vec& x) {
    Vec y = x;
    const size_t count = masses.size();
    if (tr && rot) {
      const Eigen::Vector3d b = g.parts()[0].offset().head<3>();
      const Eigen::Matrix3d rt = g.parts()[1].rotation().transpose();
      const Eigen::Vector3d c = center_of_mass(masses, x);
      for (size_t a = 0; a < count; ++a) y.segment<3>(3 * a) = rt * (x.segment<3>(3 * a) - c) + c + b;
    } else if (tr) {
      const Eigen::Vector3d b = g.offset().head<3>();
      for (size_t a = 0; a < count; ++a) y.segment<3>(3 * a) += b;
    } else {
      const Eigen::Matrix3d rt = g.rotation().transpose();
      for (size_t a = 0; a < count; ++a) y.segment<3>(3 * a) = rt * x.segment<3>(3 * a);
    }
    return y;
  };
  SystemModel model(std::move(p));
  if (spec.reference) {
    if (spec.reference->size() != n) throw Error(ErrorCode::InvalidSpec, "reference configuration has wrong size");
    gram(model, *spec.reference);  // throws SingularActionError
  }
  return model;
}

PointSampler sampler(const NBodySpec& spec) {
  const SystemModel model = build(NBodySpec{spec.masses, spec.translations, spec.rotations, {}, {}});
  return [model](std::mt19937_64& rng) {
    // Systems that are singular everywhere (one particle, or two with
    // rotations about their center) hand back the last draw so callers see
    // the singular-action error.
    Vec x(model.n());
    for (int attempt = 0; attempt < 1000; ++attempt) {
      for (int i = 0; i < x.size(); ++i) x[i] = uniform(rng, -1.0, 1.0);
      const Eigen::SelfAdjointEigenSolver<Mat> es(gram_unchecked(model, x), Eigen::EigenvaluesOnly);
      if (es.eigenvalues().minCoeff() > 1e-3 * es.eigenvalues().maxCoeff()) return x;
    }
    return x;
  };
}

ScalarField pair_spring_potential(int particles, double stiffness, double rest_length) {
  return [particles, stiffness, rest_length](const Vec& x) {
    double u = 0.0;
    for (int a = 0; a < particles; ++a)
      for (int b = a + 1; b < particles; ++b) {
        const double d = (x.segment<3>(3 * a) - x.segment<3>(3 * b)).norm() - rest_length;
        u += 0.5 * stiffness * d * d;
      }
    return u;
  };
}

// ---------------------------------------------------------------------------
// Generic table-driven system

SystemModel build(const GenericSpec& spec) {
  const int n = static_cast<int>(spec.metric.rows());
  const int k = static_cast<int>(spec.linear.size());
  if (n == 0 || spec.metric.cols() != n) throw Error(ErrorCode::InvalidSpec, "generic metric must be square");
  if (k == 0) throw Error(ErrorCode::InvalidSpec, "generic system needs at least one generator");
  if (spec.shift.size() != spec.linear.size()) throw Error(ErrorCode::InvalidSpec, "generic generators need linear and shift parts");
  for (int a = 0; a < k; ++a) {
    if (spec.linear[a].rows() != n || spec.linear[a].cols() != n || spec.shift[a].size() != n) {
      throw Error(ErrorCode::InvalidSpec, "generator " + std::to_string(a) + " has wrong shape");
    }
  }
  const Mat q = spec.potential_quadratic.size() ? spec.potential_quadratic : Mat::Zero(n, n);
  const Vec ql = spec.potential_linear.size() ? spec.potential_linear : Vec::Zero(n);
  if (q.rows() != n || q.cols() != n || ql.size() != n) throw Error(ErrorCode::InvalidSpec, "potential has wrong shape");

  // Augmented (n+1) x (n+1) generators of the affine flows.
  std::vector<Mat> aug(k, Mat::Zero(n + 1, n + 1));
  for (int a = 0; a < k; ++a) {
    aug[a].topLeftCorner(n, n) = spec.linear[a];
    aug[a].topRightCorner(n, 1) = spec.shift[a];
  }
  for (int a = 0; a < k; ++a)
    for (int b = a + 1; b < k; ++b) {
      if ((aug[a] * aug[b] - aug[b] * aug[a]).cwiseAbs().maxCoeff() > 1e-12) {
        throw Error(ErrorCode::InvalidSpec, "generic generators must commute (abelian group)");
      }
    }

  SystemModel::Parts p;
  p.name = spec.name;
  p.n = n;
  p.lie = LieStructure::abelian(k);
  p.metric = [g = spec.metric](const Vec&) { return g; };
  p.potential = [q, ql, c = spec.potential_constant](const Vec& x) { return 0.5 * x.dot(q * x) + ql.dot(x) + c; };
  p.generators = [lin = spec.linear, sh = spec.shift, n, k](const Vec& x) {
    Mat xs(n, k);
    for (int a = 0; a < k; ++a) xs.col(a) = lin[a] * x + sh[a];
    return xs;
  };
  p.action = [aug, n, k](const GroupElement& g, const Vec& x) {
    Mat m = Mat::Zero(n + 1, n + 1);
    for (int a = 0; a < k; ++a) m += g.offset()[a] * aug[a];
    Vec xa(n + 1);
    xa << x, 1.0;
    return Vec((m.exp() * xa).head(n));
  };
  SystemModel model(std::move(p));

  if (metric_eigen_ratio(model, Vec::Zero(n)) <= 0.0) throw Error(ErrorCode::InvalidSpec, "generic metric is not positive definite");
  std::mt19937_64 rng(spec.seed);
  const PointSampler sample = sampler(spec);
  for (int s = 0; s < 16; ++s) {
    const Vec x = sample(rng);
    const GroupElement g = random_group_element(model.lie(), rng);
    const GroupElement h = random_group_element(model.lie(), rng);
    std::ostringstream why;
    for (int a = 0; a < k; ++a) {
      if (const double r = killing_check(model, x, a); r > 1e-7) why << "generator " << a << " is not Killing (" << r << "); ";
    }
    if (const double r = action_law_residual(model, g, h, x); r > 1e-10 * std::max(1.0, x.norm())) {
      why << "action law fails (" << r << "); ";
    }
    if (const double r = potential_invariance_residual(model, g, x); r > 1e-10 * std::max(1.0, std::abs(model.potential(x)))) {
      why << "potential is not invariant (" << r << "); ";
    }
    if (!why.str().empty()) throw Error(ErrorCode::InvalidSpec, "generic system rejected: " + why.str());
  }
  return model;
}

PointSampler sampler(const GenericSpec& spec) {
  const int n = static_cast<int>(spec.metric.rows());
  const Vec center = spec.sample_center.size() ? spec.sample_center : Vec::Zero(n);
  const double radius = spec.sample_radius;
  return [center, radius](std::mt19937_64& rng) {
    Vec x(center.size());
    for (int i = 0; i < x.size(); ++i) x[i] = center[i] + uniform(rng, -radius, radius);
    return x;
  };
}

// ---------------------------------------------------------------------------
// Random group elements and forms

GroupElement random_group_element(const LieStructure& lie, std::mt19937_64& rng) {
  switch (lie.kind()) {
    case GroupKind::Abelian: {
      Vec b(lie.dim());
      for (int i = 0; i < b.size(); ++i) b[i] = uniform(rng, -2.0, 2.0);
      return GroupElement::abelian(b);
    }
    case GroupKind::SO3: {
      Eigen::Vector3d axis;
      do {
        axis << uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1);
      } while (axis.norm() < 0.1 || axis.norm() > 1.0);
      return rotation_unchecked(so3_exp(axis.normalized() * uniform(rng, 0.0, 3.0)));
    }
    case GroupKind::Product: {
      std::vector<GroupElement> parts;
      for (const auto& f : lie.factors()) parts.push_back(random_group_element(f, rng));
      return GroupElement::product(std::move(parts));
    }
  }
  return lie.identity();
}

BilinearForm random_invariant_form(const LieStructure& lie, std::mt19937_64& rng) {
  const int k = lie.dim();
  switch (lie.kind()) {
    case GroupKind::Abelian: {
      Mat b(k, k);
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) b(i, j) = uniform(rng, -1.0, 1.0);
      return BilinearForm(b * b.transpose() + 0.5 * Mat::Identity(k, k));
    }
    case GroupKind::SO3: return BilinearForm::scaled_identity(3, uniform(rng, 0.5, 5.0));
    case GroupKind::Product: {
      Mat h = Mat::Zero(k, k);
      int off = 0;
      for (const auto& f : lie.factors()) {
        h.block(off, off, f.dim(), f.dim()) = random_invariant_form(f, rng).matrix();
        off += f.dim();
      }
      return BilinearForm(h);
    }
  }
  return BilinearForm::identity(k);
}

// ---------------------------------------------------------------------------
// Shape paths

ShapePath board_sinusoid(double amplitude, double x0, double xi0) {
  return ShapePath(
      "board-sinusoid", 2,
      [=](double t) {
        Vec s(2);
        s << x0, xi0 + amplitude * std::sin(kTwoPi * t);
        return s;
      },
      [=](double t) {
        Vec v(2);
        v << 0.0, kTwoPi * amplitude * std::cos(kTwoPi * t);
        return v;
      });
}

Vec disc_periods() {
  Vec p(3);
  p << 0.0, kTwoPi, kTwoPi;
  return p;
}

ShapePath disc_circle_loop(double r0, double turns) {
  require_positive(r0, "circle radius r0");
  return ShapePath(
      "disc-circle", 3,
      [=](double t) {
        Vec s(3);
        s << r0, kTwoPi * turns * t, 0.0;
        return s;
      },
      [=](double) {
        Vec v(3);
        v << 0.0, kTwoPi * turns, 0.0;
        return v;
      })
      .with_periods(disc_periods());
}

ShapePath radial_excursion(double r0, double r1, double phi0) {
  require_positive(r0, "radial excursion r0");
  require_positive(r1, "radial excursion r1");
  return ShapePath(
      "disc-radial", 3,
      [=](double t) {
        Vec s(3);
        s << r0 + 0.5 * (r1 - r0) * (1.0 - std::cos(kTwoPi * t)), phi0, 0.0;
        return s;
      },
      [=](double t) {
        Vec v(3);
        v << 0.5 * (r1 - r0) * kTwoPi * std::sin(kTwoPi * t), 0.0, 0.0;
        return v;
      })
      .with_periods(disc_periods());
}

ShapePath disc_wobble_loop(double r0, double dr, int lobes) {
  require_positive(r0 - std::abs(dr), "wobble minimum radius r0 - |dr|");
  return ShapePath(
      "disc-wobble", 3,
      [=](double t) {
        Vec s(3);
        s << r0 + dr * std::sin(kTwoPi * lobes * t), kTwoPi * t, 0.0;
        return s;
      },
      [=](double t) {
        Vec v(3);
        v << dr * kTwoPi * lobes * std::cos(kTwoPi * lobes * t), kTwoPi, 0.0;
        return v;
      })
      .with_periods(disc_periods());
}

ShapePath stationary_path(const Vec& point) {
  const Vec p = point;
  return ShapePath("stationary", static_cast<int>(p.size()), [p](double) { return p; },
                   [p](double) { return Vec(Vec::Zero(p.size())); });
}

TangentSample triangle_shape(const std::vector<double>& masses, double base, double theta1, double theta2,
                             double rate1, double rate2) {
  if (masses.size() != 3) throw Error(ErrorCode::InvalidSpec, "triangle shape needs exactly three masses");
  const double s = std::sin(theta1 + theta2);
  const double s1 = std::sin(theta1), c1 = std::cos(theta1);
  const double s2 = std::sin(theta2), c2 = std::cos(theta2);
  // Apex from the base angles (angle-side-angle) and its derivatives.
  const Eigen::Vector2d apex(base * s2 * c1 / s, base * s1 * s2 / s);
  const Eigen::Vector2d d_apex1(-base * s2 * c2 / (s * s), base * s2 * s2 / (s * s));
  const Eigen::Vector2d d_apex2(base * c1 * s1 / (s * s), base * s1 * s1 / (s * s));
  const Eigen::Vector2d apex_rate = rate1 * d_apex1 + rate2 * d_apex2;

  const Eigen::Vector2d q[3] = {{0.0, 0.0}, {base, 0.0}, apex};
  const Eigen::Vector2d qd[3] = {{0.0, 0.0}, {0.0, 0.0}, apex_rate};
  const double total = masses[0] + masses[1] + masses[2];
  Eigen::Vector2d c = Eigen::Vector2d::Zero(), cd = Eigen::Vector2d::Zero();
  for (int a = 0; a < 3; ++a) {
    c += masses[a] * q[a] / total;
    cd += masses[a] * qd[a] / total;
  }
  Eigen::Vector2d d[3], dd[3];
  for (int a = 0; a < 3; ++a) {
    d[a] = q[a] - c;
    dd[a] = qd[a] - cd;
  }
  // Gauge: rotate by -psi so particle 1 sits on the +x axis.
  const double psi = std::atan2(d[0].y(), d[0].x());
  const double psi_rate = (d[0].x() * dd[0].y() - d[0].y() * dd[0].x()) / d[0].squaredNorm();
  const Eigen::Rotation2Dd rot(-psi);
  const Eigen::Matrix2d j{{0.0, -1.0}, {1.0, 0.0}};
  TangentSample out{Vec::Zero(9), Vec::Zero(9)};
  for (int a = 0; a < 3; ++a) {
    out.x.segment<2>(3 * a) = rot * d[a];
    out.v.segment<2>(3 * a) = rot * (dd[a] - psi_rate * j * d[a]);
  }
  return out;
}

namespace {

struct CatAngles {
  double theta1, theta2, rate1, rate2;
};

CatAngles cat_angles(const CatLoopParams& p, double t) {
  const double w = kTwoPi * t;
  return {p.theta1 + p.amplitude * std::sin(w), p.theta2 + p.amplitude * std::sin(w + p.phase),
          kTwoPi * p.amplitude * std::cos(w), kTwoPi * p.amplitude * std::cos(w + p.phase)};
}

}  // namespace

double min_inertia_ratio(const CatLoopParams& params, int samples) {
  double worst = 1.0;
  for (int i = 0; i <= samples; ++i) {
    const double t = static_cast<double>(i) / samples;
    const CatAngles a = cat_angles(params, t);
    if (a.theta1 <= 0.0 || a.theta2 <= 0.0 || a.theta1 + a.theta2 >= std::numbers::pi) return 0.0;
    const TangentSample s = triangle_shape(params.masses, params.base, a.theta1, a.theta2, 0.0, 0.0);
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(inertia_tensor(params.masses, s.x),
                                                            Eigen::EigenvaluesOnly);
    worst = std::min(worst, es.eigenvalues().minCoeff() / es.eigenvalues().maxCoeff());
  }
  return worst;
}

ShapePath cat_loop(const CatLoopParams& params) {
  if (params.masses.size() != 3) throw Error(ErrorCode::InvalidSpec, "cat loop needs three masses");
  for (double m : params.masses) require_positive(m, "cat particle mass");
  require_positive(params.base, "cat base length");
  const int samples = 1024;
  for (int i = 0; i <= samples; ++i) {
    const double t = static_cast<double>(i) / samples;
    const CatAngles a = cat_angles(params, t);
    std::ostringstream os;
    if (a.theta1 <= 0.0 || a.theta2 <= 0.0 || a.theta1 + a.theta2 >= std::numbers::pi) {
      os << "cat loop degenerates into a collinear triangle at t = " << t;
      throw SingularActionError(os.str(), Mat::Zero(3, 3));
    }
    const TangentSample s = triangle_shape(params.masses, params.base, a.theta1, a.theta2, 0.0, 0.0);
    const Mat in = inertia_tensor(params.masses, s.x);
    const Eigen::SelfAdjointEigenSolver<Mat> es(in, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() <= kSingularGramTolerance * es.eigenvalues().maxCoeff()) {
      os << "cat loop passes through a collinear configuration at t = " << t;
      throw SingularActionError(os.str(), in);
    }
  }
  const CatLoopParams p = params;
  return ShapePath(
      "cat", 9,
      [p](double t) {
        const CatAngles a = cat_angles(p, t);
        return triangle_shape(p.masses, p.base, a.theta1, a.theta2, 0.0, 0.0).x;
      },
      [p](double t) {
        const CatAngles a = cat_angles(p, t);
        return triangle_shape(p.masses, p.base, a.theta1, a.theta2, a.rate1, a.rate2).v;
      });
}

}  // namespace momap
