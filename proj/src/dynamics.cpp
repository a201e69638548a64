#include "momap/dynamics.hpp"

#include <algorithm>
#include <memory>
#include <cmath>
#include <sstream>

namespace momap {

// ---------------------------------------------------------------------------
// ShapePath

ShapePath::ShapePath(std::string name, int dim, Curve section, Curve velocity)
    : name_(std::move(name)), dim_(dim), section_(std::move(section)), velocity_(std::move(velocity)) {
  if (!section_) throw Error(ErrorCode::InvalidSpec, "shape path needs a section");
  if (dim_ <= 0) throw Error(ErrorCode::InvalidSpec, "shape path dimension must be positive");
}

ShapePath ShapePath::with_periods(Vec periods) const {
  if (periods.size() != dim_ || (periods.array() < 0.0).any()) {
    throw Error(ErrorCode::Structural, "periods need one non-negative entry per coordinate");
  }
  ShapePath out = *this;
  out.periods_ = std::move(periods);
  return out;
}

double ShapePath::endpoint_gap() const {
  Vec d = (point(1.0) - point(0.0)).cwiseAbs();
  for (Eigen::Index i = 0; i < periods_.size(); ++i) {
    if (periods_[i] > 0.0) {
      const double r = std::fmod(d[i], periods_[i]);
      d[i] = std::min(r, periods_[i] - r);
    }
  }
  return d.size() ? d.maxCoeff() : 0.0;
}

Vec ShapePath::velocity(double t) const {
  if (velocity_) return velocity_(t);
  const double h = fd_step(1.0);
  if (t - h < 0.0) return (-3.0 * point(t) + 4.0 * point(t + h) - point(t + 2 * h)) / (2.0 * h);
  if (t + h > 1.0) return (3.0 * point(t) - 4.0 * point(t - h) + point(t - 2 * h)) / (2.0 * h);
  return (point(t + h) - point(t - h)) / (2.0 * h);
}

namespace {

std::vector<Vec> nonuniform_velocities(const std::vector<double>& t, const std::vector<Vec>& f) {
  const size_t n = t.size();
  std::vector<Vec> d(n);
  if (n == 2) {
    d[0] = d[1] = (f[1] - f[0]) / (t[1] - t[0]);
    return d;
  }
  for (size_t i = 1; i + 1 < n; ++i) {
    const double h1 = t[i] - t[i - 1], h2 = t[i + 1] - t[i];
    d[i] = -h2 / (h1 * (h1 + h2)) * f[i - 1] + (h2 - h1) / (h1 * h2) * f[i] + h1 / (h2 * (h1 + h2)) * f[i + 1];
  }
  {
    const double h1 = t[1] - t[0], h2 = t[2] - t[1];
    d[0] = -(2 * h1 + h2) / (h1 * (h1 + h2)) * f[0] + (h1 + h2) / (h1 * h2) * f[1] - h1 / (h2 * (h1 + h2)) * f[2];
  }
  {
    const double h1 = t[n - 1] - t[n - 2], h2 = t[n - 2] - t[n - 3];
    d[n - 1] = (2 * h1 + h2) / (h1 * (h1 + h2)) * f[n - 1] - (h1 + h2) / (h1 * h2) * f[n - 2] +
               h1 / (h2 * (h1 + h2)) * f[n - 3];
  }
  return d;
}

}  // namespace

ShapePath ShapePath::sampled(std::string name, std::vector<double> times, std::vector<Vec> points) {
  if (times.size() < 2 || times.size() != points.size()) {
    throw Error(ErrorCode::InvalidSpec, "sampled path needs at least two (t, point) rows");
  }
  if (std::abs(times.front()) > 1e-12 || std::abs(times.back() - 1.0) > 1e-12) {
    throw Error(ErrorCode::InvalidSpec, "sampled path times must run from 0 to 1");
  }
  for (size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw Error(ErrorCode::InvalidSpec, "sampled path times must increase");
    if (points[i].size() != points[0].size()) throw Error(ErrorCode::InvalidSpec, "sampled path rows differ in width");
  }
  const int dim = static_cast<int>(points[0].size());
  auto slopes = std::make_shared<const std::vector<Vec>>(nonuniform_velocities(times, points));
  auto ts = std::make_shared<const std::vector<double>>(std::move(times));
  auto ps = std::make_shared<const std::vector<Vec>>(std::move(points));

  auto locate = [ts](double t, double& u, double& h) {
    const auto& tt = *ts;
    size_t i = std::upper_bound(tt.begin(), tt.end(), t) - tt.begin();
    i = std::clamp<size_t>(i, 1, tt.size() - 1) - 1;
    h = tt[i + 1] - tt[i];
    u = (t - tt[i]) / h;
    return i;
  };
  Curve section = [=](double t) -> Vec {
    double u, h;
    const size_t i = locate(t, u, h);
    const double u2 = u * u, u3 = u2 * u;
    return (2 * u3 - 3 * u2 + 1) * (*ps)[i] + (u3 - 2 * u2 + u) * h * (*slopes)[i] +
           (-2 * u3 + 3 * u2) * (*ps)[i + 1] + (u3 - u2) * h * (*slopes)[i + 1];
  };
  Curve velocity = [=](double t) -> Vec {
    double u, h;
    const size_t i = locate(t, u, h);
    const double u2 = u * u;
    return ((6 * u2 - 6 * u) * (*ps)[i] + (-6 * u2 + 6 * u) * (*ps)[i + 1]) / h +
           (3 * u2 - 4 * u + 1) * (*slopes)[i] + (3 * u2 - 2 * u) * (*slopes)[i + 1];
  };
  ShapePath p(std::move(name), dim, std::move(section), std::move(velocity));
  p.samples_ = static_cast<int>(ts->size());
  return p;
}

ShapePath reparameterize(const ShapePath& p, std::function<double(double)> warp,
                         std::function<double(double)> warp_rate) {
  Curve section = [p, warp](double t) { return p.point(warp(t)); };
  Curve velocity = [p, warp, warp_rate](double t) -> Vec { return warp_rate(t) * p.velocity(warp(t)); };
  ShapePath out(p.name() + "-warped", p.dim(), std::move(section), std::move(velocity));
  return p.periods().size() ? out.with_periods(p.periods()) : out;
}

// ---------------------------------------------------------------------------
// Finite differences on uniform grids

std::vector<Vec> finite_difference_velocities(const std::vector<double>& t, const std::vector<Vec>& f) {
  const size_t n = t.size();
  if (n < 2 || f.size() != n) throw Error(ErrorCode::Structural, "need at least two samples to differentiate");
  const double h = (t.back() - t.front()) / static_cast<double>(n - 1);
  for (size_t i = 1; i < n; ++i) {
    if (std::abs((t[i] - t[i - 1]) - h) > 1e-9 * std::max(1.0, h)) {
      throw Error(ErrorCode::Structural, "finite-difference velocities need a uniform time grid");
    }
  }
  if (n < 5) return nonuniform_velocities(t, f);

  std::vector<Vec> d(n);
  const double s = 1.0 / (12.0 * h);
  d[0] = s * (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]);
  d[1] = s * (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]);
  for (size_t i = 2; i + 2 < n; ++i) d[i] = s * (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]);
  const size_t e = n - 1;
  d[e - 1] = s * (3.0 * f[e] + 10.0 * f[e - 1] - 18.0 * f[e - 2] + 6.0 * f[e - 3] - f[e - 4]);
  d[e] = s * (25.0 * f[e] - 48.0 * f[e - 1] + 36.0 * f[e - 2] - 16.0 * f[e - 3] + 3.0 * f[e - 4]);
  return d;
}

Trajectory make_trajectory(const SystemModel& m, std::vector<double> times, std::vector<Vec> points) {
  Trajectory tr;
  tr.velocities = finite_difference_velocities(times, points);
  tr.times = std::move(times);
  tr.points = std::move(points);
  for (size_t i = 0; i < tr.points.size(); ++i) {
    tr.momenta.push_back(momentum(m, {tr.points[i], tr.velocities[i]}));
    tr.pairing.push_back(pair(connection_at(m, tr.points[i]), tr.velocities[i]));
  }
  return tr;
}

// ---------------------------------------------------------------------------
// Reconstruction

AlgebraVector shape_connection(const SystemModel& m, const ShapePath& p, double t) {
  const Vec s = p.point(t);
  try {
    return pair(connection_at(m, s), p.velocity(t));
  } catch (const SingularActionError& e) {
    std::ostringstream os;
    os << "at t = " << t << ": " << e.what();
    throw SingularActionError(os.str(), e.gram());
  }
}

namespace {

Eigen::Matrix3d project_to_so3(const Eigen::Matrix3d& m) {
  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Eigen::Matrix3d u = svd.matrixU();
    u.col(2) = -u.col(2);
    r = u * svd.matrixV().transpose();
  }
  return r;
}

// One RK4 step of g' = -a(t)^ g. The ODE is linear in g, so the stages need
// a(t), a(t + h/2), a(t + h) only. `off` indexes the block inside a.
GroupElement rk4_step(const GroupElement& g, const Vec& a1, const Vec& a2, const Vec& a4, double h, int off) {
  switch (g.kind()) {
    case GroupKind::Abelian: {
      const int d = g.dim();
      return GroupElement::abelian(g.offset() - h / 6.0 *
                                                    (a1.segment(off, d) + 4.0 * a2.segment(off, d) + a4.segment(off, d)));
    }
    case GroupKind::SO3: {
      const Eigen::Matrix3d g0 = g.rotation();
      const Eigen::Matrix3d w1 = -hat(a1.segment<3>(off));
      const Eigen::Matrix3d w2 = -hat(a2.segment<3>(off));
      const Eigen::Matrix3d w4 = -hat(a4.segment<3>(off));
      const Eigen::Matrix3d k1 = w1 * g0;
      const Eigen::Matrix3d k2 = w2 * (g0 + 0.5 * h * k1);
      const Eigen::Matrix3d k3 = w2 * (g0 + 0.5 * h * k2);
      const Eigen::Matrix3d k4 = w4 * (g0 + h * k3);
      return rotation_unchecked(project_to_so3(g0 + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)));
    }
    case GroupKind::Product: {
      std::vector<GroupElement> parts;
      int o = off;
      for (const auto& p : g.parts()) {
        parts.push_back(rk4_step(p, a1, a2, a4, h, o));
        o += p.dim();
      }
      return GroupElement::product(std::move(parts));
    }
  }
  return g;
}

template <class Visit>
GroupElement integrate(const SystemModel& m, const ShapePath& p, const GroupElement& g0, const LiftOptions& opt,
                       Visit&& visit) {
  if (!m.lie().compatible(g0)) throw Error(ErrorCode::KindMismatch, "initial group element does not match the system");
  if (p.dim() != m.n()) throw Error(ErrorCode::Structural, "shape path dimension differs from the configuration space");
  if (opt.steps < 1) throw Error(ErrorCode::StepUnderflow, "integrator needs at least one step");
  const double h = 1.0 / opt.steps;
  if (h < 1e-12) throw Error(ErrorCode::StepUnderflow, "integrator step underflows");

  GroupElement g = g0;
  visit(0, g);
  Vec a_left = shape_connection(m, p, 0.0).components();
  for (int n = 0; n < opt.steps; ++n) {
    const double t = n * h;
    const double t_next = (n + 1 == opt.steps) ? 1.0 : (n + 1) * h;
    if (opt.method == Integrator::RK4) {
      const Vec a_mid = shape_connection(m, p, t + 0.5 * h).components();
      const Vec a_right = shape_connection(m, p, t_next).components();
      g = rk4_step(g, a_left, a_mid, a_right, h, 0);
      a_left = a_right;
    } else {
      g = compose(exp_map(m.lie(), AlgebraVector(-h * a_left)), g);
      a_left = shape_connection(m, p, t_next).components();
    }
    visit(n + 1, g);
  }
  return g;
}

}  // namespace

GroupElement integrate_reconstruction(const SystemModel& m, const ShapePath& p, const GroupElement& g0,
                                      const LiftOptions& opt) {
  return integrate(m, p, g0, opt, [](int, const GroupElement&) {});
}

Trajectory horizontal_lift(const SystemModel& m, const ShapePath& p, const GroupElement& g0, const LiftOptions& opt) {
  std::vector<double> times;
  std::vector<Vec> points;
  std::vector<GroupElement> group;
  integrate(m, p, g0, opt, [&](int n, const GroupElement& g) {
    const double t = (n == opt.steps) ? 1.0 : static_cast<double>(n) / opt.steps;
    times.push_back(t);
    points.push_back(m.act(g, p.point(t)));
    group.push_back(g);
  });
  Trajectory tr = make_trajectory(m, std::move(times), std::move(points));
  tr.group = std::move(group);
  for (const auto& g : tr.group) tr.group_log.push_back(log_map_boundary(g));
  return tr;
}

HolonomyResult holonomy(const SystemModel& m, const ShapePath& loop, const GroupElement& g0, const LiftOptions& opt) {
  const double gap = loop.endpoint_gap();
  if (gap > 1e-12) {
    std::ostringstream os;
    os << "holonomy needs a closed path; max endpoint gap |s(1) - s(0)| = " << gap;
    throw Error(ErrorCode::NotClosed, os.str());
  }
  const GroupElement g1 = integrate_reconstruction(m, loop, g0, opt);
  GroupElement element = compose(inverse(g0), g1);
  AlgebraVector log = log_map_boundary(element);
  return {std::move(element), std::move(log)};
}

MomentumAuditResult momentum_audit(const SystemModel& m, const Trajectory& t) {
  MomentumAuditResult r;
  const std::vector<Vec> vel = finite_difference_velocities(t.times, t.points);
  // Speeds pass through zero at turning points, so residuals are measured
  // against the peak speed of the whole motion.
  double peak_speed = 0.0;
  for (size_t n = 0; n < t.points.size(); ++n) {
    const Mat g = m.metric(t.points[n]);
    peak_speed = std::max(peak_speed, std::sqrt(std::max(0.0, vel[n].dot(g * vel[n]))));
  }
  for (size_t n = 0; n < t.points.size(); ++n) {
    const Vec& x = t.points[n];
    const Vec& v = vel[n];
    const Mat g = m.metric(x);
    const Mat xs = m.generators(x);
    const Vec p = xs.transpose() * (g * v);
    r.max_momentum = std::max(r.max_momentum, p.cwiseAbs().maxCoeff());

    const Mat gr = gram_unchecked(m, x);
    double gen_max = 0.0;
    if (peak_speed > 0.0) {
      for (int a = 0; a < m.k(); ++a) {
        const double gen = std::sqrt(gr(a, a));
        gen_max = std::max(gen_max, gen);
        if (gen > 0.0) r.normalized = std::max(r.normalized, std::abs(p[a]) / (gen * peak_speed));
      }
    }

    const Vec av = connection_at(m, x).components * v;
    r.max_pairing = std::max(r.max_pairing, av.cwiseAbs().maxCoeff());
    // P = gram (A v) exactly, so |A v| lambda_max / |P| lies in [1, cond];
    // below roundoff level the ratio carries no information.
    const double pn = p.norm();
    if (pn > 1e-10 * gen_max * peak_speed) {
      const Eigen::SelfAdjointEigenSolver<Mat> es(gr, Eigen::EigenvaluesOnly);
      const double lmin = es.eigenvalues().minCoeff(), lmax = es.eigenvalues().maxCoeff();
      const double ratio = av.norm() * lmax / pn;
      const double slack = 1e-6;
      r.consistency_violation = std::max({r.consistency_violation, (1.0 - slack) - ratio,
                                          ratio - (lmax / lmin) * (1.0 + slack), 0.0});
    }
  }
  return r;
}

CurvatureSample curvature_numeric(const SystemModel& m, const Vec& x, int i, int j) {
  if (i < 0 || j < 0 || i >= m.n() || j >= m.n()) throw Error(ErrorCode::Structural, "curvature plane index out of range");
  CurvatureSample out{x, i, j, AlgebraVector::zero(m.k())};
  if (i == j) return out;
  const double h = fd_step(x.norm());
  auto partial = [&](int dir, int col) -> Vec {
    Vec e = Vec::Zero(m.n());
    e[dir] = h;
    return (connection_at(m, x + e).components.col(col) - connection_at(m, x - e).components.col(col)) / (2.0 * h);
  };
  const Mat a = connection_at(m, x).components;
  const Vec d = partial(i, j) - partial(j, i);
  const AlgebraVector br = bracket(m.lie(), AlgebraVector(a.col(i)), AlgebraVector(a.col(j)));
  out.value = AlgebraVector(d + br.components());
  return out;
}

}  // namespace momap
