#include "momap/commands.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "json.hpp"

namespace momap {

namespace {

using json = nlohmann::json;
using ordered = nlohmann::ordered_json;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ordered to_json(const Vec& v) {
  ordered a = ordered::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

ordered to_json(const Mat& m) {
  ordered a = ordered::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(to_json(Vec(m.row(i).transpose())));
  return a;
}

ordered to_json(const GroupElement& g) {
  ordered o;
  switch (g.kind()) {
    case GroupKind::Abelian:
      o["offset"] = to_json(g.offset());
      break;
    case GroupKind::SO3:
      o["rotation"] = to_json(Mat(g.rotation()));
      break;
    case GroupKind::Product: {
      ordered parts = ordered::array();
      for (const GroupElement& p : g.parts()) parts.push_back(to_json(p));
      o["parts"] = parts;
      break;
    }
  }
  return o;
}

std::string render(const ordered& record) { return record.dump(2) + "\n"; }

OutputFormat format_or(const RunConfig& c, OutputFormat natural) { return c.format_set ? c.format : natural; }

LiftOptions lift_options(const RunConfig& c) { return {c.steps, c.method}; }

/// Relative size used to normalize tangent-space residuals.
double speed_scale(const SystemModel& m, const TangentSample& s) {
  return std::sqrt(std::max(0.0, s.v.dot(m.metric(s.x) * s.v)));
}

std::string method_name(Integrator i) { return i == Integrator::RK4 ? "rk4" : "lie_euler"; }

std::string csv_header(const std::vector<std::string>& cols) {
  std::string out;
  for (size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
  return out + "\n";
}

std::string csv_row(const std::vector<double>& vals) {
  std::string out;
  for (size_t i = 0; i < vals.size(); ++i) out += (i ? "," : "") + num(vals[i]);
  return out + "\n";
}

std::vector<std::string> indexed(const std::string& prefix, int count) {
  std::vector<std::string> out;
  for (int i = 0; i < count; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

/// Periodic trapezoid rule; spectrally accurate for the smooth loops used.
double periodic_quadrature(const std::function<double(double)>& f, int nodes) {
  double s = 0.0;
  for (int i = 0; i < nodes; ++i) s += f(static_cast<double>(i) / nodes);
  return s / nodes;
}

}  // namespace

bool VerifyReport::pass() const {
  for (const IdentityCheck& c : checks) {
    if (!c.pass()) return false;
  }
  return !checks.empty();
}

VerifyReport verify_identities(const RunConfig& c) {
  const SystemModel m = make_system(c);
  const PointSampler draw = make_sampler(c);
  std::mt19937_64 rng(c.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  VerifyReport r;
  r.system = m.name();
  enum Id {
    Reproducing, Orthogonal, Decomposition, HorizontalMomentum, Equivariance, LagrangianInvariance,
    HIndependence, MomentumVerticalLift, MomentumEquivariance, Killing, ActionLaw, PotentialInvariance,
    MetricSymmetry, StructureConstants, LiftMomentum, Count
  };
  r.checks.resize(Count);
  auto set = [&](Id id, std::string name, double tol) { r.checks[id] = {std::move(name), 0.0, tol, 0}; };
  set(Reproducing, "reproducing <A, X_a> = a", 1e-10);
  set(Orthogonal, "vertical orthogonal to horizontal", 1e-9);
  set(Decomposition, "horizontal projection idempotent", 1e-10);
  set(HorizontalMomentum, "horizontal iff zero momentum", 1e-9);
  set(Equivariance, "connection equivariance", 1e-6);
  set(LagrangianInvariance, "complete lift X_a L = 0", 1e-6);
  set(HIndependence, "independence of the bilinear form", 1e-10);
  set(MomentumVerticalLift, "momentum equals vertical lift derivative", 1e-6);
  set(MomentumEquivariance, "momentum map equivariance", 1e-8);
  set(Killing, "generators are Killing fields", 1e-7);
  set(ActionLaw, "right action law", 1e-10);
  set(PotentialInvariance, "potential invariance", 1e-10);
  set(MetricSymmetry, "metric symmetric positive definite", 1e-12);
  set(StructureConstants, "structure constants antisymmetric and Jacobi", 1e-12);
  set(LiftMomentum, "lift momentum along the configured path", c.tolerance);

  auto record = [&](Id id, double residual) {
    IdentityCheck& ch = r.checks[id];
    // NaN compares false, so keep it visible as a failure.
    ch.residual = std::isnan(residual) ? residual : (std::isnan(ch.residual) ? ch.residual : std::max(ch.residual, residual));
    ++ch.evaluated;
  };

  const LieStructure& lie = m.lie();
  record(StructureConstants, std::max(lie.antisymmetry_residual(), lie.jacobi_residual()));

  for (int s = 0; s < c.samples; ++s) {
    const Vec x = draw(rng);
    Vec v(m.n());
    for (int i = 0; i < m.n(); ++i) v[i] = normal(rng);
    const GroupElement g = random_group_element(lie, rng);
    const GroupElement h = random_group_element(lie, rng);
    const BilinearForm form = random_invariant_form(lie, rng);
    ++r.points;

    double asym = 0.0;
    const double ratio = metric_eigen_ratio(m, x, &asym);
    record(MetricSymmetry, ratio > 0.0 ? asym : std::numeric_limits<double>::infinity());
    record(ActionLaw, action_law_residual(m, g, h, x));
    record(PotentialInvariance, potential_invariance_residual(m, g, x));
    for (int a = 0; a < m.k(); ++a) record(Killing, killing_check(m, x, a));

    try {
      const ConnectionEval conn = connection_at(m, x);
      const Mat xs = m.generators(x);
      const Mat metric = m.metric(x);
      record(Reproducing, (conn.components * xs - Mat::Identity(m.k(), m.k())).cwiseAbs().maxCoeff());

      const double speed = std::max(speed_scale(m, {x, v}), 1e-300);
      const Vec hv = horizontal_projection(m, x, v);
      double ortho = 0.0;
      for (int a = 0; a < m.k(); ++a) {
        const double gen = std::sqrt(xs.col(a).dot(metric * xs.col(a)));
        ortho = std::max(ortho, std::abs(xs.col(a).dot(metric * hv)) / (gen * speed));
      }
      record(Orthogonal, ortho);
      record(Decomposition, (horizontal_projection(m, x, hv) - hv).cwiseAbs().maxCoeff() / std::max(1.0, v.norm()));

      // Zero momentum exactly characterizes horizontality: P(hv) = 0 and a
      // vertical vector with zero momentum vanishes.
      const DualVector phv = momentum(m, {x, hv});
      const Vec vert = v - hv;
      const Vec vert_back = xs * conn.components * vert;
      double hm = phv.components().cwiseAbs().maxCoeff() / speed;
      hm = std::max(hm, (vert_back - vert).cwiseAbs().maxCoeff() / std::max(1.0, v.norm()));
      record(HorizontalMomentum, hm);

      record(Equivariance, verify_equivariance(m, x, g));
      record(HIndependence, verify_h_independence(m, x, form));

      const DualVector p = momentum(m, {x, v});
      const double lscale = std::max(1.0, std::abs(lagrangian(m, {x, v})));
      const double pscale = std::max(1.0, p.components().cwiseAbs().maxCoeff());
      for (int a = 0; a < m.k(); ++a) {
        const VectorField field = m.generator(a);
        record(LagrangianInvariance, std::abs(complete_lift_derivative(m, {x, v}, field)) / lscale);
        record(MomentumVerticalLift, std::abs(vertical_lift_derivative(m, {x, v}, field) - p[a]) / pscale);
      }
      record(MomentumEquivariance, momentum_equivariance_residual(m, g, {x, v}) / pscale);
    } catch (const SingularActionError&) {
      ++r.skipped_singular;
    }
  }

  const ShapePath path = make_path(c);
  const Trajectory t = horizontal_lift(m, path, lie.identity(), lift_options(c));
  record(LiftMomentum, momentum_audit(m, t).normalized);
  return r;
}

std::optional<double> reference_holonomy(const RunConfig& c) {
  const PathConfig& p = c.path;
  if (c.system.kind == SystemKind::Board && p.type == "board_sinusoid") return 0.0;
  if (c.system.kind != SystemKind::Disc) return std::nullopt;
  const double inertia = c.system.disc.inertia, mass = c.system.disc.mass;
  if (p.type == "disc_circle") {
    const double i0 = mass * p.r0 * p.r0;
    return -2.0 * std::numbers::pi * p.turns * i0 / (inertia + i0);
  }
  if (p.type == "radial") return 0.0;
  if (p.type == "wobble") {
    return -periodic_quadrature(
        [&](double t) {
          const double r = p.r0 + p.dr * std::sin(2.0 * std::numbers::pi * p.lobes * t);
          return 2.0 * std::numbers::pi * mass * r * r / (inertia + mass * r * r);
        },
        1 << 14);
  }
  return std::nullopt;
}

double disc_curvature_closed_form(double inertia, double mass, double r) {
  const double d = inertia + mass * r * r;
  return 2.0 * mass * r * inertia / (d * d);
}

CommandResult cmd_verify(const RunConfig& c) {
  const VerifyReport r = verify_identities(c);
  CommandResult out;
  out.exit_code = r.pass() ? kExitPass : kExitVerificationFailure;
  if (format_or(c, OutputFormat::Record) == OutputFormat::Csv) {
    out.text = csv_header({"identity", "max_residual", "tolerance", "evaluated", "pass"});
    for (const IdentityCheck& ch : r.checks) {
      out.text += "\"" + ch.name + "\"," + num(ch.residual) + "," + num(ch.tolerance) + "," +
                  std::to_string(ch.evaluated) + "," + (ch.pass() ? "true" : "false") + "\n";
    }
    return out;
  }
  ordered rec;
  rec["command"] = "verify";
  rec["system"] = r.system;
  rec["seed"] = c.seed;
  rec["points"] = r.points;
  rec["skipped_singular"] = r.skipped_singular;
  ordered checks = ordered::array();
  for (const IdentityCheck& ch : r.checks) {
    ordered o;
    o["identity"] = ch.name;
    o["max_residual"] = ch.residual;
    o["tolerance"] = ch.tolerance;
    o["evaluated"] = ch.evaluated;
    o["pass"] = ch.pass();
    checks.push_back(o);
  }
  rec["checks"] = checks;
  rec["pass"] = r.pass();
  out.text = render(rec);
  return out;
}

CommandResult cmd_lift(const RunConfig& c) {
  const SystemModel m = make_system(c);
  const ShapePath path = make_path(c);
  const Trajectory t = horizontal_lift(m, path, m.lie().identity(), lift_options(c));
  const MomentumAuditResult audit = momentum_audit(m, t);
  CommandResult out;
  out.exit_code = audit.normalized <= c.tolerance ? kExitPass : kExitVerificationFailure;

  if (format_or(c, OutputFormat::Csv) == OutputFormat::Csv) {
    std::vector<std::string> cols{"t"};
    for (const std::string& s : indexed("x", m.n())) cols.push_back(s);
    for (const std::string& s : indexed("log_g", m.k())) cols.push_back(s);
    for (const std::string& s : indexed("P", m.k())) cols.push_back(s);
    cols.push_back("pairing_residual");
    out.text = csv_header(cols);
    for (size_t n = 0; n < t.times.size(); ++n) {
      std::vector<double> row{t.times[n]};
      for (int i = 0; i < m.n(); ++i) row.push_back(t.points[n][i]);
      for (int a = 0; a < m.k(); ++a) row.push_back(t.group_log[n][a]);
      for (int a = 0; a < m.k(); ++a) row.push_back(t.momenta[n][a]);
      row.push_back(t.pairing[n].components().cwiseAbs().maxCoeff());
      out.text += csv_row(row);
    }
    return out;
  }
  ordered rec;
  rec["command"] = "lift";
  rec["system"] = m.name();
  rec["path"] = path.name();
  rec["steps"] = c.steps;
  rec["method"] = method_name(c.method);
  rec["final_point"] = to_json(t.points.back());
  rec["final_group"] = to_json(t.group.back());
  rec["final_log"] = to_json(t.group_log.back().components());
  ordered a;
  a["max_momentum"] = audit.max_momentum;
  a["normalized_momentum"] = audit.normalized;
  a["max_pairing"] = audit.max_pairing;
  a["consistency_violation"] = audit.consistency_violation;
  a["tolerance"] = c.tolerance;
  a["pass"] = out.exit_code == kExitPass;
  rec["momentum_audit"] = a;
  out.text = render(rec);
  return out;
}

CommandResult cmd_holonomy(const RunConfig& c) {
  const SystemModel m = make_system(c);
  const ShapePath path = make_path(c);
  const HolonomyResult h = holonomy(m, path, m.lie().identity(), lift_options(c));
  const std::optional<double> ref = reference_holonomy(c);
  CommandResult out;
  double deviation = 0.0;
  if (ref) {
    deviation = std::abs(h.log[0] - *ref);
    if (deviation > c.tolerance) out.exit_code = kExitVerificationFailure;
  }

  if (format_or(c, OutputFormat::Record) == OutputFormat::Csv) {
    std::vector<std::string> cols = indexed("log", m.k());
    std::vector<double> row(h.log.components().data(), h.log.components().data() + m.k());
    if (ref) {
      cols.push_back("reference");
      cols.push_back("deviation");
      row.push_back(*ref);
      row.push_back(deviation);
    }
    out.text = csv_header(cols) + csv_row(row);
    return out;
  }
  ordered rec;
  rec["command"] = "holonomy";
  rec["system"] = m.name();
  rec["path"] = path.name();
  rec["steps"] = c.steps;
  rec["method"] = method_name(c.method);
  rec["element"] = to_json(h.element);
  rec["log"] = to_json(h.log.components());
  if (m.lie().kind() != GroupKind::Abelian) {
    const double angle = h.log.components().norm();
    rec["rotation_angle"] = angle;
  }
  if (ref) {
    ordered cmp;
    cmp["reference"] = *ref;
    cmp["deviation"] = deviation;
    cmp["tolerance"] = c.tolerance;
    cmp["pass"] = deviation <= c.tolerance;
    rec["comparison"] = cmp;
  }
  out.text = render(rec);
  return out;
}

CommandResult cmd_curvature(const RunConfig& c) {
  const SystemModel m = make_system(c);
  const CurvatureConfig& k = c.curvature;
  std::vector<Vec> points = k.points;
  if (k.scan) {
    for (int s = 0; s < k.count; ++s) {
      Vec x = k.base;
      x[k.coord] += k.count == 1 ? k.from : k.from + (k.to - k.from) * s / (k.count - 1);
      points.push_back(x);
    }
  }
  if (points.empty()) points.push_back(make_path(c).point(0.0));

  const bool disc_plane = c.system.kind == SystemKind::Disc && k.plane[0] != k.plane[1];
  const bool flat = c.system.kind == SystemKind::Board;
  CommandResult out;
  struct Row {
    CurvatureSample s;
    std::optional<double> ref;
  };
  std::vector<Row> rows;
  for (const Vec& x : points) {
    Row row{curvature_numeric(m, x, k.plane[0], k.plane[1]), std::nullopt};
    if (flat) row.ref = 0.0;
    if (disc_plane) {
      // Only the (r, phi) plane is curved; the sign follows the orientation.
      const int i = k.plane[0], j = k.plane[1];
      double ref = 0.0;
      if (i == 0 && j == 1) ref = disc_curvature_closed_form(c.system.disc.inertia, c.system.disc.mass, x[0]);
      if (i == 1 && j == 0) ref = -disc_curvature_closed_form(c.system.disc.inertia, c.system.disc.mass, x[0]);
      row.ref = ref;
    }
    if (row.ref && std::abs(row.s.value[0] - *row.ref) > c.tolerance) out.exit_code = kExitVerificationFailure;
    rows.push_back(row);
  }

  if (format_or(c, OutputFormat::Csv) == OutputFormat::Csv) {
    std::vector<std::string> cols = indexed("x", m.n());
    cols.push_back("i");
    cols.push_back("j");
    for (const std::string& s : indexed("F", m.k())) cols.push_back(s);
    const bool has_ref = !rows.empty() && rows.front().ref.has_value();
    if (has_ref) cols.push_back("reference");
    out.text = csv_header(cols);
    for (const Row& r : rows) {
      std::vector<double> vals(r.s.x.data(), r.s.x.data() + r.s.x.size());
      vals.push_back(r.s.i);
      vals.push_back(r.s.j);
      for (int a = 0; a < m.k(); ++a) vals.push_back(r.s.value[a]);
      if (has_ref) vals.push_back(*r.ref);
      out.text += csv_row(vals);
    }
    return out;
  }
  ordered rec;
  rec["command"] = "curvature";
  rec["system"] = m.name();
  rec["plane"] = {k.plane[0], k.plane[1]};
  ordered samples = ordered::array();
  for (const Row& r : rows) {
    ordered o;
    o["x"] = to_json(r.s.x);
    o["F"] = to_json(r.s.value.components());
    if (r.ref) o["reference"] = *r.ref;
    samples.push_back(o);
  }
  rec["samples"] = samples;
  rec["pass"] = out.exit_code == kExitPass;
  out.text = render(rec);
  return out;
}

CommandResult cmd_describe(const RunConfig& c) {
  const SystemModel m = make_system(c);
  const Vec x = c.describe_point.size() > 0 ? c.describe_point : make_path(c).point(0.0);
  const Mat metric = m.metric(x);
  const Mat xs = m.generators(x);
  const Mat gr = gram_unchecked(m, x);
  const Eigen::SelfAdjointEigenSolver<Mat> es(gr, Eigen::EigenvaluesOnly);
  const bool singular = es.eigenvalues().minCoeff() < kSingularGramTolerance * es.eigenvalues().maxCoeff();

  CommandResult out;
  if (format_or(c, OutputFormat::Record) == OutputFormat::Csv) {
    out.text = csv_header({"quantity", "row", "col", "value"});
    auto table = [&](const std::string& name, const Mat& mat) {
      for (Eigen::Index i = 0; i < mat.rows(); ++i) {
        for (Eigen::Index j = 0; j < mat.cols(); ++j) {
          out.text += name + "," + std::to_string(i) + "," + std::to_string(j) + "," + num(mat(i, j)) + "\n";
        }
      }
    };
    table("point", x);
    table("metric", metric);
    table("generators", xs);
    table("gram", gr);
    if (!singular) table("connection", connection_at(m, x).components);
    out.text += "potential,0,0," + num(m.potential(x)) + "\n";
    return out;
  }
  ordered rec;
  rec["command"] = "describe";
  rec["system"] = m.name();
  rec["configuration_dimension"] = m.n();
  rec["group_dimension"] = m.k();
  rec["point"] = to_json(x);
  rec["metric"] = to_json(metric);
  rec["potential"] = m.potential(x);
  rec["generators"] = to_json(xs);
  rec["gram"] = to_json(gr);
  rec["gram_eigenvalues"] = to_json(Vec(es.eigenvalues()));
  rec["singular"] = singular;
  if (!singular) rec["connection"] = to_json(connection_at(m, x).components);
  out.text = render(rec);
  return out;
}

int exit_code_for(const Error& e) {
  return e.code() == ErrorCode::SingularAction ? kExitSingularAction : kExitConfigError;
}

std::string error_record(const Error& e) {
  ordered err;
  err["code"] = to_string(e.code());
  err["message"] = e.what();
  if (const auto* s = dynamic_cast<const SingularActionError*>(&e)) err["gram"] = to_json(s->gram());
  ordered rec;
  rec["error"] = err;
  return render(rec);
}

CommandResult run_command(const std::string& name, const RunConfig& c) {
  try {
    if (name == "verify") return cmd_verify(c);
    if (name == "lift") return cmd_lift(c);
    if (name == "holonomy") return cmd_holonomy(c);
    if (name == "curvature") return cmd_curvature(c);
    if (name == "describe") return cmd_describe(c);
    throw Error(ErrorCode::Config, "unknown command '" + name + "'");
  } catch (const Error& e) {
    return {exit_code_for(e), error_record(e)};
  }
}

}  // namespace momap
