#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "momap/systems.hpp"

namespace momap {

/// Output layout: CSV tables or a single JSON record.
enum class OutputFormat { Csv, Record };

/// Which closed form, if any, a builtin system/path pair admits.
enum class SystemKind { Board, Disc, NBody, Generic };

struct SystemConfig {
  SystemKind kind = SystemKind::NBody;
  BoardSpec board;
  DiscSpec disc;
  NBodySpec nbody;
  GenericSpec generic;
  /// Builtin potentials: harmonic in xi (board), in r (disc), pair springs
  /// (nbody). Zero stiffness means no potential.
  double stiffness = 0.0;
  double rest = 1.0;
};

struct PathConfig {
  std::string type = "cat";  ///< cat, disc_circle, radial, wobble, board_sinusoid, stationary, sampled
  // disc paths
  double r0 = 1.0;
  double r1 = 1.5;
  double phi0 = 0.0;
  double dr = 0.3;
  int lobes = 2;
  double turns = 1.0;
  // board sinusoid
  double amplitude = 1.0;
  double x0 = 0.0;
  double xi0 = 0.0;
  // cat loop
  CatLoopParams cat;
  // stationary
  Vec point;
  // sampled table: CSV with columns t, x_1 .. x_n
  std::string file;
};

struct CurvatureConfig {
  std::array<int, 2> plane{0, 1};
  std::vector<Vec> points;
  // Optional scan x(s) = base + s e_coord for s in [from, to].
  bool scan = false;
  int coord = 0;
  double from = 0.5;
  double to = 2.0;
  int count = 16;
  Vec base;
};

struct RunConfig {
  SystemConfig system;
  PathConfig path;
  int steps = 4096;
  double tolerance = 1e-8;
  Integrator method = Integrator::RK4;
  unsigned long long seed = 0;
  int samples = 200;  ///< random points for verify
  CurvatureConfig curvature;
  Vec describe_point;  ///< empty: the path start
  std::string out;     ///< empty: stdout
  OutputFormat format = OutputFormat::Record;
  bool format_set = false;  ///< false: each command picks its natural format
};

/// Built-in configurations: "cat" (the default), "disc", "board".
RunConfig preset(const std::string& name);

/// Parses a JSON document against the run-config schema. Unknown keys, wrong
/// types and bad values raise Error(Config) naming the field path; syntax
/// errors name the line and column. Relative side-file paths resolve
/// against base_dir.
RunConfig parse_config(const std::string& text, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);

SystemModel make_system(const RunConfig& c);
PointSampler make_sampler(const RunConfig& c);
ShapePath make_path(const RunConfig& c);

/// Reads a CSV table with a header row and columns t, x_1, ..., x_n.
ShapePath read_sampled_path(const std::string& file, int dim);

std::string to_string(SystemKind k);

}  // namespace momap
