#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "momap/systems.hpp"

using namespace momap;

namespace {

Vec v2(double a, double b) { return Eigen::Vector2d(a, b); }
Vec v3(double a, double b, double c) { return Eigen::Vector3d(a, b, c); }

/// Every builtin with a nontrivial potential, plus its sampler.
struct Builtin {
  std::string label;
  SystemModel model;
  PointSampler draw;
};

std::vector<Builtin> builtins() {
  BoardSpec board{3.0, 1.0, [](double xi) { return 0.5 * xi * xi; }};
  DiscSpec disc{1.5, 0.7, [](double r, double) { return r * r; }};
  NBodySpec rot{{1.0, 2.0, 1.5}, false, true, {}, {}};
  NBodySpec e3{{1.0, 2.0, 1.5}, true, true, pair_spring_potential(3, 2.0, 1.0), {}};
  NBodySpec tr{{1.0, 3.0}, true, false, pair_spring_potential(2, 1.0, 0.5), {}};
  return {{"board", build(board), sampler(board)},
          {"disc", build(disc), sampler(disc)},
          {"nbody-rot", build(rot), sampler(rot)},
          {"nbody-e3", build(e3), sampler(e3)},
          {"nbody-tr", build(tr), sampler(tr)}};
}

Vec random_velocity(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = nd(rng);
  return v;
}

/// Hessian of L in v by central differences of L itself.
Mat velocity_hessian(const SystemModel& m, const Vec& x) {
  const int n = m.n();
  const double h = 1e-3;
  Mat out(n, n);
  const Vec v0 = Vec::Zero(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Vec ei = Vec::Zero(n), ej = Vec::Zero(n);
      ei[i] = h;
      ej[j] = h;
      out(i, j) = (lagrangian(m, {x, v0 + ei + ej}) - lagrangian(m, {x, v0 + ei - ej}) -
                   lagrangian(m, {x, v0 - ei + ej}) + lagrangian(m, {x, v0 - ei - ej})) /
                  (4 * h * h);
    }
  return out;
}

}  // namespace

TEST(Lagrangian, ZeroVelocityGivesMinusPotential) {
  const SystemModel m = build(DiscSpec{1.0, 1.0, [](double r, double) { return 3.0 * r; }});
  EXPECT_DOUBLE_EQ(lagrangian(m, {v3(2, 0.4, 1), Vec::Zero(3)}), -6.0);
}

TEST(Lagrangian, BoardKineticEnergy) {
  const SystemModel m = build(BoardSpec{3.0, 1.0, {}});
  EXPECT_DOUBLE_EQ(lagrangian(m, {v2(0.3, 0.2), v2(1, 0)}), 2.0);
}

TEST(Lagrangian, DiscKineticEnergy) {
  const SystemModel m = build(DiscSpec{1.0, 1.0, {}});
  EXPECT_DOUBLE_EQ(lagrangian(m, {v3(2, 0, 0), v3(0, 1, 0)}), 2.0);
}

TEST(Lagrangian, MetricIsVelocityHessian) {
  // Expanded by hand: 1/2 m1 x'^2 + 1/2 m2 (x' + xi')^2, and the disc's
  // 1/2 m r'^2 + 1/2 m r^2 (phi' + alpha')^2 + 1/2 I alpha'^2.
  const double m1 = 2.0, m2 = 0.5, inertia = 1.3, mass = 0.8;
  const SystemModel board = build(BoardSpec{m1, m2, {}});
  const SystemModel disc = build(DiscSpec{inertia, mass, {}});
  Mat board_expected(2, 2);
  board_expected << m1 + m2, m2, m2, m2;
  EXPECT_LT((velocity_hessian(board, v2(0.1, 0.2)) - board_expected).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT((board.metric(v2(5, -3)) - board_expected).cwiseAbs().maxCoeff(), 0.0 + 1e-15);
  const double r = 1.7;
  Mat disc_expected(3, 3);
  disc_expected << mass, 0, 0, 0, mass * r * r, mass * r * r, 0, mass * r * r, inertia + mass * r * r;
  EXPECT_LT((velocity_hessian(disc, v3(r, 0.3, 0.9)) - disc_expected).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT((disc.metric(v3(r, 0.3, 0.9)) - disc_expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Flat, ZeroAndDiagonal) {
  const SystemModel nb = build(NBodySpec{{2.0, 3.0}, true, false, {}, {}});
  Vec x = Vec::LinSpaced(6, 0.0, 1.0);
  EXPECT_EQ(flat(nb, x, Vec::Zero(6)).norm(), 0.0);
  Vec v = Vec::Ones(6);
  Vec expect(6);
  expect << 2, 2, 2, 3, 3, 3;
  EXPECT_EQ(flat(nb, x, v), expect);
}

TEST(Flat, DiscGeneratorCovector) {
  const SystemModel m = build(DiscSpec{1.0, 1.0, {}});
  const Vec x = v3(2, 0, 0);
  EXPECT_EQ(flat(m, x, m.generators(x).col(0)), v3(0, 4, 5));
}

TEST(Gram, BoardIsTotalMass) {
  const SystemModel m = build(BoardSpec{3.0, 1.5, {}});
  EXPECT_DOUBLE_EQ(gram(m, v2(1, 2))(0, 0), 4.5);
}

TEST(Gram, DiscIsTotalInertia) {
  const SystemModel m = build(DiscSpec{2.0, 3.0, {}});
  EXPECT_DOUBLE_EQ(gram(m, v3(0.5, 1, 1))(0, 0), 2.0 + 3.0 * 0.25);
}

TEST(Gram, NBodyRotationsIsInertiaTensor) {
  const std::vector<double> masses{1.0, 2.0, 0.5};
  const SystemModel m = build(NBodySpec{masses, false, true, {}, {}});
  std::mt19937_64 rng(2);
  const PointSampler draw = sampler(NBodySpec{masses, false, true, {}, {}});
  for (int s = 0; s < 10; ++s) {
    const Vec x = draw(rng);
    EXPECT_LT((gram(m, x) - Mat(inertia_tensor(masses, x))).cwiseAbs().maxCoeff(), 1e-13);
  }
}

TEST(Gram, SingleParticleIsSingular) {
  const SystemModel m = build(NBodySpec{{1.0}, false, true, {}, {}});
  const Vec x = v3(1, 0, 0);
  EXPECT_EQ(gram_unchecked(m, x), Mat(Eigen::Vector3d(0, 1, 1).asDiagonal()));
  try {
    gram(m, x);
    FAIL() << "expected a singular-action error";
  } catch (const SingularActionError& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularAction);
    EXPECT_EQ(e.gram(), Mat(Eigen::Vector3d(0, 1, 1).asDiagonal()));
    EXPECT_NE(std::string(e.what()).find("Gram"), std::string::npos);
  }
}

TEST(Gram, CollinearTripleIsSingular) {
  const SystemModel m = build(NBodySpec{{1.0, 1.0, 1.0}, false, true, {}, {}});
  Vec x(9);
  x << -1, 0, 0, 0.5, 0, 0, 2, 0, 0;
  EXPECT_THROW(gram(m, x), SingularActionError);
}

TEST(Gram, ExactlySymmetricAndPositive) {
  std::mt19937_64 rng(3);
  for (const Builtin& b : builtins()) {
    for (int s = 0; s < 50; ++s) {
      const Mat g = gram(b.model, b.draw(rng));
      EXPECT_EQ((g - g.transpose()).norm(), 0.0) << b.label;
      EXPECT_GT(Eigen::SelfAdjointEigenSolver<Mat>(g).eigenvalues().minCoeff(), 0.0) << b.label;
    }
  }
}

TEST(Momentum, ZeroVelocity) {
  const SystemModel m = build(BoardSpec{});
  EXPECT_EQ(momentum(m, {v2(1, 1), Vec::Zero(2)}).components().norm(), 0.0);
}

TEST(Momentum, BoardLinearMomentum) {
  const double m1 = 3.0, m2 = 2.0, xd = 0.7, xid = -0.4;
  const SystemModel m = build(BoardSpec{m1, m2, {}});
  EXPECT_NEAR(momentum(m, {v2(0, 0), v2(xd, xid)})[0], m1 * xd + m2 * (xd + xid), 1e-15);
}

TEST(Momentum, DiscAngularMomentum) {
  const double inertia = 2.0, mass = 1.5, r = 0.8;
  const Vec v = v3(0.3, -1.1, 0.6);
  const SystemModel m = build(DiscSpec{inertia, mass, {}});
  EXPECT_NEAR(momentum(m, {v3(r, 0.2, 0.1), v})[0], inertia * v[2] + mass * r * r * (v[2] + v[1]), 1e-15);
}

TEST(LiftDerivatives, ZeroField) {
  const SystemModel m = build(DiscSpec{});
  const VectorField zero = [](const Vec& x) { return Vec(Vec::Zero(x.size())); };
  EXPECT_EQ(vertical_lift_derivative(m, {v3(1, 0, 0), v3(1, 2, 3)}, zero), 0.0);
  EXPECT_EQ(complete_lift_derivative(m, {v3(1, 0, 0), v3(1, 2, 3)}, zero), 0.0);
}

TEST(LiftDerivatives, VerticalLiftIsMomentum) {
  std::mt19937_64 rng(4);
  int checked = 0;
  for (const Builtin& b : builtins()) {
    for (int s = 0; s < 40; ++s) {
      const Vec x = b.draw(rng);
      const Vec v = random_velocity(b.model.n(), rng);
      const DualVector p = momentum(b.model, {x, v});
      for (int a = 0; a < b.model.k(); ++a) {
        EXPECT_NEAR(vertical_lift_derivative(b.model, {x, v}, b.model.generator(a)), p[a], 1e-6) << b.label;
        ++checked;
      }
    }
  }
  EXPECT_GE(checked, 200);
}

TEST(LiftDerivatives, CompleteLiftAnnihilatesLagrangian) {
  std::mt19937_64 rng(5);
  for (const Builtin& b : builtins()) {
    for (int s = 0; s < 40; ++s) {
      const Vec x = b.draw(rng);
      const Vec v = random_velocity(b.model.n(), rng);
      for (int a = 0; a < b.model.k(); ++a) {
        EXPECT_LT(std::abs(complete_lift_derivative(b.model, {x, v}, b.model.generator(a))), 1e-6) << b.label;
      }
    }
  }
}

TEST(LiftDerivatives, CompleteLiftDetectsBrokenSymmetry) {
  // A radial field is not a symmetry of the disc.
  const SystemModel m = build(DiscSpec{});
  const VectorField radial = [](const Vec&) { return Vec(Eigen::Vector3d(1, 0, 0)); };
  EXPECT_GT(std::abs(complete_lift_derivative(m, {v3(1, 0, 0), v3(0, 1, 0)}, radial)), 0.5);
}

TEST(Killing, TranslationOfEuclideanIsExact) {
  const SystemModel m = build(NBodySpec{{1.0, 2.0}, true, false, {}, {}});
  for (int a = 0; a < 3; ++a) EXPECT_EQ(killing_check(m, Vec::LinSpaced(6, -1, 1), a), 0.0);
}

TEST(Killing, DiscAlphaIsKilling) {
  const SystemModel m = build(DiscSpec{1.0, 2.0, {}});
  EXPECT_LT(killing_check(m, v3(1.3, 0.5, 0.2), 0), 1e-8);
}

TEST(Killing, BrokenMetricIsDetected) {
  SystemModel::Parts p;
  p.name = "broken";
  p.n = 2;
  p.lie = LieStructure::abelian(1);
  p.metric = [](const Vec& x) { return Mat(Eigen::Vector2d(1.0 + x[0] * x[0], 1.0).asDiagonal()); };
  p.potential = [](const Vec&) { return 0.0; };
  p.generators = [](const Vec&) { return Mat(Eigen::Vector2d(1, 0)); };
  p.action = [](const GroupElement& g, const Vec& x) {
    Vec y = x;
    y[0] += g.offset()[0];
    return y;
  };
  const SystemModel m(std::move(p));
  EXPECT_GT(killing_check(m, v2(1, 0), 0), 1.0);
}

TEST(Audits, BuiltinsPassGeometryAudits) {
  std::mt19937_64 rng(6);
  for (const Builtin& b : builtins()) {
    for (int s = 0; s < 50; ++s) {
      const Vec x = b.draw(rng);
      const GroupElement g = random_group_element(b.model.lie(), rng);
      const GroupElement h = random_group_element(b.model.lie(), rng);
      for (int a = 0; a < b.model.k(); ++a) EXPECT_LT(killing_check(b.model, x, a), 1e-7) << b.label;
      EXPECT_LT(action_law_residual(b.model, g, h, x), 1e-7) << b.label;
      EXPECT_LT(potential_invariance_residual(b.model, g, x), 1e-7) << b.label;
    }
  }
}

TEST(Audits, MomentumEquivariance) {
  std::mt19937_64 rng(7);
  for (const Builtin& b : builtins()) {
    for (int s = 0; s < 40; ++s) {
      const Vec x = b.draw(rng);
      const Vec v = random_velocity(b.model.n(), rng);
      const GroupElement g = random_group_element(b.model.lie(), rng);
      EXPECT_LT(momentum_equivariance_residual(b.model, g, {x, v}), 1e-8) << b.label;
    }
  }
}

TEST(Audits, ActionTangentOfRotationIsTheMatrix) {
  const SystemModel m = build(NBodySpec{{1.0, 1.0, 1.0}, false, true, {}, {}});
  std::mt19937_64 rng(8);
  const GroupElement g = random_group_element(m.lie(), rng);
  const Mat j = action_tangent(m, g, Vec::LinSpaced(9, -1, 1));
  for (int a = 0; a < 3; ++a) {
    EXPECT_LT((j.block<3, 3>(3 * a, 3 * a) - Mat(g.rotation().transpose())).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Audits, MetricEigenRatio) {
  const SystemModel m = build(DiscSpec{1.0, 1.0, {}});
  double asym = -1.0;
  const double ratio = metric_eigen_ratio(m, v3(1, 0, 0), &asym);
  EXPECT_GT(ratio, 0.0);
  EXPECT_EQ(asym, 0.0);
}

TEST(SystemModel, ActRejectsWrongGroup) {
  const SystemModel m = build(BoardSpec{});
  try {
    m.act(LieStructure::so3().identity(), v2(0, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::KindMismatch);
  }
}

TEST(SystemModel, GeneratorSurvivesCopy) {
  VectorField f;
  {
    const SystemModel m = build(DiscSpec{});
    f = m.generator(0);
  }
  EXPECT_EQ(f(v3(1, 0, 0)), v3(0, 0, 1));
}
