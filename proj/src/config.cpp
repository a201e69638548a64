#include "momap/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

namespace momap {

namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::Config, path + ": " + what);
}

/// JSON object view that records which keys were read, so leftovers can be
/// rejected as unknown.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* get(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  double number(const std::string& key, double fallback) {
    const json* v = get(key);
    if (!v) return fallback;
    if (!v->is_number()) fail(at(key), "expected a number");
    const double d = v->get<double>();
    if (!std::isfinite(d)) fail(at(key), "must be finite");
    return d;
  }

  double positive(const std::string& key, double fallback) {
    const double d = number(key, fallback);
    if (!(d > 0.0)) fail(at(key), "must be positive");
    return d;
  }

  long long integer(const std::string& key, long long fallback) {
    const json* v = get(key);
    if (!v) return fallback;
    if (!v->is_number_integer()) fail(at(key), "expected an integer");
    return v->get<long long>();
  }

  bool boolean(const std::string& key, bool fallback) {
    const json* v = get(key);
    if (!v) return fallback;
    if (!v->is_boolean()) fail(at(key), "expected true or false");
    return v->get<bool>();
  }

  std::string text(const std::string& key, const std::string& fallback) {
    const json* v = get(key);
    if (!v) return fallback;
    if (!v->is_string()) fail(at(key), "expected a string");
    return v->get<std::string>();
  }

  std::optional<Vec> vector(const std::string& key) {
    const json* v = get(key);
    if (!v) return std::nullopt;
    return to_vector(*v, at(key));
  }

  std::optional<Mat> matrix(const std::string& key) {
    const json* v = get(key);
    if (!v) return std::nullopt;
    return to_matrix(*v, at(key));
  }

  Section child(const std::string& key) {
    const json* v = get(key);
    static const json empty = json::object();
    return Section(v ? *v : empty, at(key));
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) fail(at(it.key()), "unknown key");
    }
  }

  static Vec to_vector(const json& v, const std::string& path) {
    if (!v.is_array()) fail(path, "expected an array of numbers");
    Vec out(static_cast<Eigen::Index>(v.size()));
    for (size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) fail(path + "[" + std::to_string(i) + "]", "expected a number");
      out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
      if (!std::isfinite(out[static_cast<Eigen::Index>(i)])) fail(path + "[" + std::to_string(i) + "]", "must be finite");
    }
    return out;
  }

  static Mat to_matrix(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) fail(path, "expected a non-empty array of rows");
    const size_t cols = v[0].is_array() ? v[0].size() : 0;
    Mat out(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(cols));
    for (size_t i = 0; i < v.size(); ++i) {
      const std::string row_path = path + "[" + std::to_string(i) + "]";
      const Vec row = to_vector(v[i], row_path);
      if (static_cast<size_t>(row.size()) != cols) fail(row_path, "rows must have equal length");
      out.row(static_cast<Eigen::Index>(i)) = row.transpose();
    }
    return out;
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void parse_system(Section s, RunConfig& c) {
  const std::string type = s.text("type", "nbody");
  SystemConfig& sys = c.system;
  Section pot = s.child("potential");
  sys.stiffness = pot.number("stiffness", 0.0);
  sys.rest = pot.number("rest", 1.0);
  if (sys.stiffness < 0.0) fail(pot.at("stiffness"), "must be non-negative");
  pot.finish();

  if (type == "board") {
    sys.kind = SystemKind::Board;
    sys.board.m1 = s.positive("m1", 1.0);
    sys.board.m2 = s.positive("m2", 1.0);
  } else if (type == "disc") {
    sys.kind = SystemKind::Disc;
    sys.disc.inertia = s.positive("inertia", 1.0);
    sys.disc.mass = s.positive("mass", 1.0);
  } else if (type == "nbody") {
    sys.kind = SystemKind::NBody;
    if (auto m = s.vector("masses")) {
      if (m->size() < 1) fail(s.at("masses"), "needs at least one mass");
      sys.nbody.masses.assign(m->data(), m->data() + m->size());
      for (double mass : sys.nbody.masses) {
        if (!(mass > 0.0)) fail(s.at("masses"), "masses must be positive");
      }
    } else {
      sys.nbody.masses = {1.0, 1.0, 1.0};
    }
    sys.nbody.translations = s.boolean("translations", false);
    sys.nbody.rotations = s.boolean("rotations", true);
    if (auto r = s.vector("reference")) {
      if (r->size() != 3 * static_cast<Eigen::Index>(sys.nbody.masses.size())) {
        fail(s.at("reference"), "needs 3 coordinates per particle");
      }
      sys.nbody.reference = *r;
    }
  } else if (type == "generic") {
    sys.kind = SystemKind::Generic;
    GenericSpec& g = sys.generic;
    g.name = s.text("name", "generic");
    auto metric = s.matrix("metric");
    if (!metric) fail(s.at("metric"), "required for generic systems");
    g.metric = *metric;
    const json* gens = s.get("generators");
    if (!gens || !gens->is_array() || gens->empty()) fail(s.at("generators"), "expected a non-empty array");
    for (size_t a = 0; a < gens->size(); ++a) {
      Section gen((*gens)[a], s.at("generators") + "[" + std::to_string(a) + "]");
      auto lin = gen.matrix("linear");
      auto shift = gen.vector("shift");
      const Eigen::Index n = g.metric.rows();
      g.linear.push_back(lin ? *lin : Mat::Zero(n, n));
      g.shift.push_back(shift ? *shift : Vec::Zero(n));
      gen.finish();
    }
    Section q = s.child("quadratic_potential");
    if (auto m = q.matrix("matrix")) g.potential_quadratic = *m;
    if (auto v = q.vector("linear")) g.potential_linear = *v;
    g.potential_constant = q.number("constant", 0.0);
    q.finish();
    if (auto v = s.vector("sample_center")) g.sample_center = *v;
    g.sample_radius = s.positive("sample_radius", 1.0);
  } else {
    fail(s.at("type"), "unknown system type '" + type + "' (board, disc, nbody, generic)");
  }
  s.finish();
}

void parse_path(Section s, RunConfig& c) {
  PathConfig& p = c.path;
  p.type = s.text("type", p.type);
  if (p.type == "disc_circle") {
    p.r0 = s.positive("r0", 1.0);
    p.turns = s.number("turns", 1.0);
  } else if (p.type == "radial") {
    p.r0 = s.positive("r0", 1.0);
    p.r1 = s.positive("r1", 1.5);
    p.phi0 = s.number("phi0", 0.0);
  } else if (p.type == "wobble") {
    p.r0 = s.positive("r0", 1.0);
    p.dr = s.number("dr", 0.3);
    p.lobes = static_cast<int>(s.integer("lobes", 2));
    if (std::abs(p.dr) >= p.r0) fail(s.at("dr"), "must be smaller than r0 in magnitude");
  } else if (p.type == "board_sinusoid") {
    p.amplitude = s.number("amplitude", 1.0);
    p.x0 = s.number("x0", 0.0);
    p.xi0 = s.number("xi0", 0.0);
  } else if (p.type == "cat") {
    if (c.system.kind == SystemKind::NBody) p.cat.masses = c.system.nbody.masses;
    p.cat.base = s.positive("base", p.cat.base);
    p.cat.theta1 = s.number("theta1", p.cat.theta1);
    p.cat.theta2 = s.number("theta2", p.cat.theta2);
    p.cat.amplitude = s.number("amplitude", p.cat.amplitude);
    p.cat.phase = s.number("phase", p.cat.phase);
    if (auto m = s.vector("masses")) p.cat.masses.assign(m->data(), m->data() + m->size());
  } else if (p.type == "stationary") {
    auto pt = s.vector("point");
    if (!pt) fail(s.at("point"), "required for stationary paths");
    p.point = *pt;
  } else if (p.type == "sampled") {
    p.file = s.text("file", "");
    if (p.file.empty()) fail(s.at("file"), "required for sampled paths");
  } else {
    fail(s.at("type"), "unknown path type '" + p.type +
                           "' (cat, disc_circle, radial, wobble, board_sinusoid, stationary, sampled)");
  }
  s.finish();
}

void parse_curvature(Section s, RunConfig& c) {
  CurvatureConfig& k = c.curvature;
  if (auto pl = s.vector("plane")) {
    if (pl->size() != 2) fail(s.at("plane"), "expected two coordinate indices");
    k.plane = {static_cast<int>((*pl)[0]), static_cast<int>((*pl)[1])};
    if (k.plane[0] != (*pl)[0] || k.plane[1] != (*pl)[1]) fail(s.at("plane"), "indices must be integers");
  }
  if (const json* pts = s.get("points")) {
    if (!pts->is_array()) fail(s.at("points"), "expected an array of points");
    for (size_t i = 0; i < pts->size(); ++i) {
      k.points.push_back(Section::to_vector((*pts)[i], s.at("points") + "[" + std::to_string(i) + "]"));
    }
  }
  if (s.has("scan")) {
    Section sc = s.child("scan");
    k.scan = true;
    k.coord = static_cast<int>(sc.integer("coord", 0));
    k.from = sc.number("from", 0.5);
    k.to = sc.number("to", 2.0);
    k.count = static_cast<int>(sc.integer("count", 16));
    if (k.count < 1) fail(sc.at("count"), "must be at least 1");
    auto base = sc.vector("base");
    if (!base) fail(sc.at("base"), "required for scans");
    k.base = *base;
    sc.finish();
  }
  s.finish();
}

void validate(const RunConfig& c) {
  const SystemModel m = make_system(c);
  auto check_point = [&](const Vec& x, const std::string& where) {
    if (x.size() != m.n()) {
      fail(where, "expected " + std::to_string(m.n()) + " coordinates, got " + std::to_string(x.size()));
    }
  };
  const CurvatureConfig& k = c.curvature;
  for (int idx : k.plane) {
    if (idx < 0 || idx >= m.n()) fail("curvature.plane", "index out of range for this system");
  }
  for (size_t i = 0; i < k.points.size(); ++i) check_point(k.points[i], "curvature.points[" + std::to_string(i) + "]");
  if (k.scan) {
    check_point(k.base, "curvature.scan.base");
    if (k.coord < 0 || k.coord >= m.n()) fail("curvature.scan.coord", "index out of range for this system");
  }
  if (c.describe_point.size() > 0) check_point(c.describe_point, "describe.point");
  if (c.path.type == "stationary") check_point(c.path.point, "path.point");

  const bool disc_path = c.path.type == "disc_circle" || c.path.type == "radial" || c.path.type == "wobble";
  if (disc_path && c.system.kind != SystemKind::Disc) fail("path.type", c.path.type + " paths need a disc system");
  if (c.path.type == "board_sinusoid" && c.system.kind != SystemKind::Board) {
    fail("path.type", "board_sinusoid paths need a board system");
  }
  if (c.path.type == "cat") {
    if (c.system.kind != SystemKind::NBody || c.system.nbody.masses.size() != 3) {
      fail("path.type", "cat paths need a three-particle nbody system");
    }
    if (c.path.cat.masses != c.system.nbody.masses) fail("path.masses", "must match system.masses");
  }
}

}  // namespace

std::string to_string(SystemKind k) {
  switch (k) {
    case SystemKind::Board: return "board";
    case SystemKind::Disc: return "disc";
    case SystemKind::NBody: return "nbody";
    case SystemKind::Generic: return "generic";
  }
  return "?";
}

RunConfig preset(const std::string& name) {
  RunConfig c;
  if (name == "cat") {
    c.system.kind = SystemKind::NBody;
    c.system.nbody.masses = {1.0, 1.0, 1.0};
    c.path.type = "cat";
  } else if (name == "disc") {
    c.system.kind = SystemKind::Disc;
    c.path.type = "disc_circle";
    c.curvature.scan = true;
    c.curvature.coord = 0;
    c.curvature.base = Vec::Zero(3);
  } else if (name == "board") {
    c.system.kind = SystemKind::Board;
    c.path.type = "board_sinusoid";
  } else {
    throw Error(ErrorCode::Config, "unknown preset '" + name + "' (cat, disc, board)");
  }
  return c;
}

namespace {

/// Where a stationary path sits when the config names none.
Vec default_point(const RunConfig& c) {
  if (c.system.kind == SystemKind::Generic) {
    const GenericSpec& g = c.system.generic;
    return g.sample_center.size() > 0 ? g.sample_center : Vec(Vec::Zero(g.metric.rows()));
  }
  if (c.system.kind == SystemKind::NBody && c.system.nbody.reference) return *c.system.nbody.reference;
  std::mt19937_64 rng(0);
  return make_sampler(c)(rng);
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into line and column.
    size_t line = 1, col = 1;
    for (size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(ErrorCode::Config, "line " + std::to_string(line) + ", column " + std::to_string(col) +
                                       ": invalid JSON (" + e.what() + ")");
  }

  Section root(doc, "");
  RunConfig c;
  // Default path follows the system type unless set explicitly.
  if (root.has("system")) {
    parse_system(root.child("system"), c);
    if (c.system.kind == SystemKind::Disc) c.path.type = "disc_circle";
    if (c.system.kind == SystemKind::Board) c.path.type = "board_sinusoid";
    if (c.system.kind == SystemKind::Generic) c.path.type = "stationary";
    if (c.system.kind == SystemKind::NBody) {
      c.path.type = c.system.nbody.masses.size() == 3 ? "cat" : "stationary";
      c.path.cat.masses = c.system.nbody.masses;
    }
  } else {
    c = preset("cat");
  }
  if (root.has("path")) {
    parse_path(root.child("path"), c);
  } else if (c.path.type == "stationary") {
    c.path.point = default_point(c);
  }
  if (!c.path.file.empty() && std::filesystem::path(c.path.file).is_relative()) {
    c.path.file = (std::filesystem::path(base_dir) / c.path.file).string();
  }

  Section integ = root.child("integrator");
  const long long steps = integ.integer("steps", c.steps);
  if (steps < 1 || steps > 100000000) fail("integrator.steps", "must be between 1 and 1e8");
  c.steps = static_cast<int>(steps);
  c.tolerance = integ.positive("tolerance", c.tolerance);
  const std::string method = integ.text("method", "rk4");
  if (method == "rk4") {
    c.method = Integrator::RK4;
  } else if (method == "lie_euler") {
    c.method = Integrator::LieEuler;
  } else {
    fail("integrator.method", "expected rk4 or lie_euler");
  }
  integ.finish();

  const long long seed = root.integer("seed", 0);
  if (seed < 0) fail("seed", "must be non-negative");
  c.seed = static_cast<unsigned long long>(seed);
  c.system.generic.seed = static_cast<unsigned>(c.seed);
  const long long samples = root.integer("samples", c.samples);
  if (samples < 1) fail("samples", "must be at least 1");
  c.samples = static_cast<int>(samples);

  if (root.has("curvature")) {
    parse_curvature(root.child("curvature"), c);
  } else if (c.system.kind == SystemKind::Disc) {
    c.curvature = preset("disc").curvature;
  }

  Section desc = root.child("describe");
  if (auto pt = desc.vector("point")) c.describe_point = *pt;
  desc.finish();

  Section out = root.child("output");
  c.out = out.text("file", "");
  if (out.has("format")) {
    const std::string f = out.text("format", "record");
    if (f == "csv") {
      c.format = OutputFormat::Csv;
    } else if (f == "record") {
      c.format = OutputFormat::Record;
    } else {
      fail("output.format", "expected csv or record");
    }
    c.format_set = true;
  }
  out.finish();
  root.finish();

  try {
    validate(c);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Config || e.code() == ErrorCode::SingularAction) throw;
    throw Error(ErrorCode::Config, std::string("system: ") + e.what());
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Config, "cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::filesystem::path(path).parent_path().string().empty()
                                    ? "."
                                    : std::filesystem::path(path).parent_path().string());
}

SystemModel make_system(const RunConfig& c) {
  const SystemConfig& s = c.system;
  const double k = s.stiffness, rest = s.rest;
  switch (s.kind) {
    case SystemKind::Board: {
      BoardSpec b = s.board;
      if (k > 0.0) b.potential = [k](double xi) { return 0.5 * k * xi * xi; };
      return build(b);
    }
    case SystemKind::Disc: {
      DiscSpec d = s.disc;
      if (k > 0.0) d.potential = [k, rest](double r, double) { return 0.5 * k * (r - rest) * (r - rest); };
      return build(d);
    }
    case SystemKind::NBody: {
      NBodySpec nb = s.nbody;
      if (k > 0.0) nb.potential = pair_spring_potential(static_cast<int>(nb.masses.size()), k, rest);
      return build(nb);
    }
    case SystemKind::Generic:
      return build(s.generic);
  }
  throw Error(ErrorCode::Config, "unknown system kind");
}

PointSampler make_sampler(const RunConfig& c) {
  switch (c.system.kind) {
    case SystemKind::Board: return sampler(c.system.board);
    case SystemKind::Disc: return sampler(c.system.disc);
    case SystemKind::NBody: return sampler(c.system.nbody);
    case SystemKind::Generic: return sampler(c.system.generic);
  }
  throw Error(ErrorCode::Config, "unknown system kind");
}

ShapePath read_sampled_path(const std::string& file, int dim) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::Config, "path.file: cannot open '" + file + "'");
  std::string line;
  std::vector<double> times;
  std::vector<Vec> points;
  int lineno = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (header) {  // first non-comment row names the columns
      header = false;
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw Error(ErrorCode::Config, file + ":" + std::to_string(lineno) + ": not a number '" + cell + "'");
      }
    }
    if (static_cast<int>(row.size()) != dim + 1) {
      throw Error(ErrorCode::Config, file + ":" + std::to_string(lineno) + ": expected " + std::to_string(dim + 1) +
                                         " columns, got " + std::to_string(row.size()));
    }
    times.push_back(row[0]);
    points.push_back(Eigen::Map<Vec>(row.data() + 1, dim));
  }
  try {
    return ShapePath::sampled("sampled:" + std::filesystem::path(file).filename().string(), std::move(times),
                              std::move(points));
  } catch (const Error& e) {
    throw Error(ErrorCode::Config, file + ": " + e.what());
  }
}

ShapePath make_path(const RunConfig& c) {
  const PathConfig& p = c.path;
  if (p.type == "cat") return cat_loop(p.cat);
  if (p.type == "disc_circle") return disc_circle_loop(p.r0, p.turns);
  if (p.type == "radial") return radial_excursion(p.r0, p.r1, p.phi0);
  if (p.type == "wobble") return disc_wobble_loop(p.r0, p.dr, p.lobes);
  if (p.type == "board_sinusoid") return board_sinusoid(p.amplitude, p.x0, p.xi0);
  if (p.type == "stationary") return stationary_path(p.point);
  if (p.type == "sampled") {
    ShapePath s = read_sampled_path(p.file, make_system(c).n());
    return c.system.kind == SystemKind::Disc ? s.with_periods(disc_periods()) : s;
  }
  throw Error(ErrorCode::Config, "path.type: unknown path type '" + p.type + "'");
}

}  // namespace momap
