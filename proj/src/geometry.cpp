#include "momap/geometry.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace momap {

SystemModel::SystemModel(Parts parts) : p_(std::move(parts)) {
  if (p_.n <= 0) throw Error(ErrorCode::InvalidSpec, "configuration dimension must be positive");
  if (!p_.metric || !p_.generators || !p_.action) {
    throw Error(ErrorCode::InvalidSpec, "system '" + p_.name + "' is missing metric, generators or action");
  }
  if (!p_.potential) p_.potential = [](const Vec&) { return 0.0; };
}

Mat SystemModel::metric(const Vec& x) const {
  Mat g = p_.metric(x);
  if (g.rows() != n() || g.cols() != n()) throw Error(ErrorCode::Structural, "metric has wrong shape");
  return g;
}

Mat SystemModel::generators(const Vec& x) const {
  Mat xs = p_.generators(x);
  if (xs.rows() != n() || xs.cols() != k()) throw Error(ErrorCode::Structural, "generator matrix has wrong shape");
  return xs;
}

Vec SystemModel::act(const GroupElement& g, const Vec& x) const {
  if (!p_.lie.compatible(g)) throw Error(ErrorCode::KindMismatch, "group element does not belong to " + p_.name);
  return p_.action(g, x);
}

VectorField SystemModel::generator(int alpha) const {
  return [gen = p_.generators, alpha](const Vec& x) -> Vec { return gen(x).col(alpha); };
}

double fd_step(double scale) {
  return std::cbrt(std::numeric_limits<double>::epsilon()) * std::max(1.0, scale);
}

double lagrangian(const SystemModel& m, const TangentSample& s) {
  return 0.5 * s.v.dot(m.metric(s.x) * s.v) - m.potential(s.x);
}

Vec flat(const SystemModel& m, const Vec& x, const Vec& v) { return m.metric(x) * v; }

Mat gram_unchecked(const SystemModel& m, const Vec& x) {
  const Mat xs = m.generators(x);
  Mat g = xs.transpose() * m.metric(x) * xs;
  return 0.5 * (g + g.transpose());
}

Mat gram(const SystemModel& m, const Vec& x, double tol) {
  Mat g = gram_unchecked(m, x);
  const Eigen::SelfAdjointEigenSolver<Mat> es(g, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  const double top = ev.cwiseAbs().maxCoeff();
  if (!(ev.minCoeff() > tol * top) || top == 0.0) {
    std::ostringstream os;
    os << "singular action at x = [" << x.transpose() << "]: Gram matrix g(X_a, X_b) = ["
       << g.format(Eigen::IOFormat(Eigen::FullPrecision, Eigen::DontAlignCols, ", ", "; "))
       << "] has eigenvalues [" << ev.transpose() << "]";
    throw SingularActionError(os.str(), g);
  }
  return g;
}

DualVector momentum(const SystemModel& m, const TangentSample& s) {
  return DualVector(m.generators(s.x).transpose() * (m.metric(s.x) * s.v));
}

namespace {

double direction_step(const Vec& base, const Vec& dir) {
  const double d = dir.norm();
  return fd_step(base.norm()) / std::max(1.0, d);
}

}  // namespace

double vertical_lift_derivative(const SystemModel& m, const TangentSample& s, const VectorField& field) {
  const Vec w = field(s.x);
  if (w.isZero(0.0)) return 0.0;
  const double h = direction_step(s.v, w);
  const double lp = lagrangian(m, {s.x, s.v + h * w});
  const double lm = lagrangian(m, {s.x, s.v - h * w});
  return (lp - lm) / (2.0 * h);
}

double complete_lift_derivative(const SystemModel& m, const TangentSample& s, const VectorField& field) {
  const Vec w = field(s.x);
  double total = 0.0;
  if (!w.isZero(0.0)) {
    const double h = direction_step(s.x, w);
    total += (lagrangian(m, {s.x + h * w, s.v}) - lagrangian(m, {s.x - h * w, s.v})) / (2.0 * h);
  }
  if (!s.v.isZero(0.0)) {
    // (d_j V) v^j, then its vertical derivative.
    const double h = direction_step(s.x, s.v);
    const Vec dv = (field(s.x + h * s.v) - field(s.x - h * s.v)) / (2.0 * h);
    if (!dv.isZero(0.0)) {
      const double hv = direction_step(s.v, dv);
      total += (lagrangian(m, {s.x, s.v + hv * dv}) - lagrangian(m, {s.x, s.v - hv * dv})) / (2.0 * hv);
    }
  }
  return total;
}

double killing_check(const SystemModel& m, const Vec& x, int alpha) {
  const int n = m.n();
  const VectorField field = m.generator(alpha);
  const Vec w = field(x);
  const Mat g = m.metric(x);
  const double h = fd_step(x.norm());

  Mat dg = Mat::Zero(n, n);
  if (!w.isZero(0.0)) {
    const double t = h / std::max(1.0, w.norm());
    dg = (m.metric(x + t * w) - m.metric(x - t * w)) / (2.0 * t);
  }
  Mat jac(n, n);  // jac(k, i) = d_i X^k
  for (int i = 0; i < n; ++i) {
    Vec e = Vec::Zero(n);
    e[i] = h;
    jac.col(i) = (field(x + e) - field(x - e)) / (2.0 * h);
  }
  const Mat lie = dg + jac.transpose() * g + g * jac;
  return lie.cwiseAbs().maxCoeff();
}

Mat action_tangent(const SystemModel& m, const GroupElement& g, const Vec& x) {
  const int n = m.n();
  const double h = fd_step(x.norm());
  Mat jac(n, n);
  for (int i = 0; i < n; ++i) {
    Vec e = Vec::Zero(n);
    e[i] = h;
    jac.col(i) = (m.act(g, x + e) - m.act(g, x - e)) / (2.0 * h);
  }
  return jac;
}

double action_law_residual(const SystemModel& m, const GroupElement& g, const GroupElement& h, const Vec& x) {
  return (m.act(h, m.act(g, x)) - m.act(compose(g, h), x)).cwiseAbs().maxCoeff();
}

double potential_invariance_residual(const SystemModel& m, const GroupElement& g, const Vec& x) {
  return std::abs(m.potential(m.act(g, x)) - m.potential(x));
}

double metric_eigen_ratio(const SystemModel& m, const Vec& x, double* asymmetry) {
  const Mat g = m.metric(x);
  if (asymmetry) *asymmetry = (g - g.transpose()).cwiseAbs().maxCoeff();
  const Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (g + g.transpose()), Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return ev.minCoeff() / ev.cwiseAbs().maxCoeff();
}

double momentum_equivariance_residual(const SystemModel& m, const GroupElement& g, const TangentSample& s) {
  const Vec gx = m.act(g, s.x);
  const Vec gv = action_tangent(m, g, s.x) * s.v;
  const DualVector lhs = momentum(m, {gx, gv});
  const DualVector rhs = coadjoint(g, momentum(m, s));
  return (lhs.components() - rhs.components()).cwiseAbs().maxCoeff();
}

}  // namespace momap
