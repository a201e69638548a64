#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <algorithm>

#include <gtest/gtest.h>

#include "json.hpp"
#include "momap/commands.hpp"

using namespace momap;
using nlohmann::json;

namespace {

RunConfig parse(const std::string& text) { return parse_config(text); }

/// Expects a config error whose message contains `needle`.
void expect_config_error(const std::string& text, const std::string& needle) {
  try {
    parse(text);
    ADD_FAILURE() << "accepted: " << text;
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Config) << e.what();
    EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
  }
}

}  // namespace

TEST(Config, DefaultsApplied) {
  const RunConfig c = parse("{}");
  EXPECT_EQ(c.steps, 4096);
  EXPECT_DOUBLE_EQ(c.tolerance, 1e-8);
  EXPECT_EQ(c.seed, 0u);
  EXPECT_EQ(c.path.type, "cat");
  EXPECT_EQ(c.system.kind, SystemKind::NBody);
}

TEST(Config, FullDiscDocument) {
  const RunConfig c = parse(R"({
    "system": {"type": "disc", "inertia": 2, "mass": 3, "potential": {"stiffness": 1, "rest": 1}},
    "path": {"type": "disc_circle", "r0": 0.5},
    "integrator": {"steps": 1000, "tolerance": 1e-6, "method": "lie_euler"},
    "seed": 7, "samples": 10,
    "output": {"format": "csv"}
  })");
  EXPECT_EQ(c.system.kind, SystemKind::Disc);
  EXPECT_DOUBLE_EQ(c.system.disc.inertia, 2.0);
  EXPECT_DOUBLE_EQ(c.path.r0, 0.5);
  EXPECT_EQ(c.steps, 1000);
  EXPECT_EQ(c.method, Integrator::LieEuler);
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.format, OutputFormat::Csv);
  EXPECT_TRUE(c.format_set);
}

TEST(Config, SyntaxErrorNamesLine) {
  expect_config_error("{\n  \"seed\": 1,\n  oops\n}", "line 3");
}

TEST(Config, UnknownKeysAreRejectedWithPath) {
  expect_config_error(R"({"system": {"type": "disc", "inertial": 1}})", "system.inertial");
  expect_config_error(R"({"integrator": {"step": 10}})", "integrator.step");
  expect_config_error(R"({"colour": 1})", "colour");
}

TEST(Config, TypeAndRangeErrors) {
  expect_config_error(R"({"seed": "zero"})", "seed");
  expect_config_error(R"({"seed": -1})", "seed");
  expect_config_error(R"({"integrator": {"steps": 0}})", "integrator.steps");
  expect_config_error(R"({"integrator": {"steps": 1.5}})", "integrator.steps");
  expect_config_error(R"({"system": {"type": "disc", "mass": -2}})", "system.mass");
  expect_config_error(R"({"system": {"type": "teapot"}})", "system.type");
  expect_config_error(R"({"output": {"format": "xml"}})", "output.format");
  expect_config_error(R"({"integrator": {"method": "euler"}})", "integrator.method");
}

TEST(Config, PathMustFitSystem) {
  expect_config_error(R"({"system": {"type": "board"}, "path": {"type": "disc_circle"}})", "path.type");
  expect_config_error(R"({"system": {"type": "nbody", "masses": [1, 1, 1, 1]}, "path": {"type": "cat"}})", "path.type");
  expect_config_error(R"({"system": {"type": "disc"}, "describe": {"point": [1, 2]}})", "describe.point");
}

TEST(Config, CollinearReferenceIsSingularAction) {
  try {
    parse(R"({"system": {"type": "nbody", "reference": [0,0,0, 1,0,0, 2,0,0]}})");
    FAIL();
  } catch (const SingularActionError& e) {
    EXPECT_NE(std::string(e.what()).find("Gram"), std::string::npos);
  }
}

TEST(Config, GenericSystem) {
  const RunConfig c = parse(R"({
    "system": {"type": "generic", "metric": [[1,0],[0,1]],
               "generators": [{"shift": [1, 0]}],
               "quadratic_potential": {"matrix": [[0,0],[0,2]]}},
    "path": {"type": "stationary", "point": [0.5, 0.5]}
  })");
  EXPECT_EQ(make_system(c).k(), 1);
  expect_config_error(R"({"system": {"type": "generic", "metric": [[1,0],[0,1]],
                        "generators": [{"shift": [1, 0]}],
                        "quadratic_potential": {"matrix": [[2,0],[0,2]]}}})",
                      "system");
}

TEST(Config, SampledPathSideFile) {
  const auto dir = std::filesystem::temp_directory_path() / "momap_cfg_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream csv(dir / "loop.csv");
    csv.precision(17);
    csv << "t,r,phi,alpha\n";
    for (int i = 0; i <= 256; ++i) {
      const double t = i / 256.0;
      csv << t << "," << 1.0 + 0.2 * std::sin(2 * std::numbers::pi * t) << "," << 2 * std::numbers::pi * t << ",0\n";
    }
    std::ofstream cfg(dir / "run.json");
    cfg << R"({"system": {"type": "disc"}, "path": {"type": "sampled", "file": "loop.csv"}})";
  }
  const RunConfig c = load_config((dir / "run.json").string());
  const ShapePath p = make_path(c);
  EXPECT_EQ(p.samples(), 257);
  EXPECT_TRUE(p.is_loop(1e-12));
  const CommandResult r = run_command("holonomy", c);
  EXPECT_EQ(r.exit_code, kExitPass) << r.text;

  std::ofstream(dir / "bad.csv") << "t,r,phi,alpha\n0,1,0\n";
  std::ofstream(dir / "bad.json") << R"({"system": {"type": "disc"}, "path": {"type": "sampled", "file": "bad.csv"}})";
  const RunConfig bad = load_config((dir / "bad.json").string());
  const CommandResult rb = run_command("lift", bad);
  EXPECT_EQ(rb.exit_code, kExitConfigError);
  EXPECT_NE(rb.text.find("bad.csv:2"), std::string::npos) << rb.text;
}

TEST(Commands, VerifyDiscPasses) {
  const CommandResult r = cmd_verify(preset("disc"));
  EXPECT_EQ(r.exit_code, kExitPass) << r.text;
  const json j = json::parse(r.text);
  EXPECT_TRUE(j["pass"].get<bool>());
  EXPECT_EQ(j["points"].get<int>(), 200);
}

TEST(Commands, VerifyBoardResidualsTiny) {
  const VerifyReport r = verify_identities(preset("board"));
  ASSERT_TRUE(r.pass());
  for (const IdentityCheck& c : r.checks) EXPECT_LT(c.residual, 1e-10) << c.name;
}

TEST(Commands, VerifyAllBuiltinsPass) {
  for (const std::string& text :
       {std::string(R"({"system": {"type": "nbody", "masses": [1, 2, 3], "translations": true,
                                   "potential": {"stiffness": 2}}, "path": {"type": "cat"}})"),
        std::string(R"({"system": {"type": "nbody", "masses": [1, 2, 3]}, "path": {"type": "cat"}})"),
        std::string(R"({"system": {"type": "board", "m1": 2, "m2": 5, "potential": {"stiffness": 1}}})"),
        std::string(R"({"system": {"type": "disc", "inertia": 0.3, "mass": 4}, "path": {"type": "wobble"}})")}) {
    RunConfig c = parse(text);
    c.samples = 50;
    const VerifyReport r = verify_identities(c);
    EXPECT_TRUE(r.pass()) << text;
    EXPECT_EQ(r.skipped_singular, 0);
  }
}

TEST(Commands, EverywhereSingularSystemAborts) {
  // Two bodies under rotations about their center are always collinear:
  // every audit point is skipped and the lift aborts on the Gram matrix.
  RunConfig c = parse(R"({"system": {"type": "nbody", "masses": [1, 1], "translations": true},
                          "path": {"type": "stationary", "point": [0,0,0, 1,0,0]}})");
  c.samples = 5;
  const CommandResult r = run_command("verify", c);
  EXPECT_EQ(r.exit_code, kExitSingularAction);
  const json j = json::parse(r.text);
  EXPECT_EQ(j["error"]["code"].get<std::string>(), to_string(ErrorCode::SingularAction));
  EXPECT_TRUE(j["error"].contains("gram"));
  EXPECT_NE(j["error"]["message"].get<std::string>().find("Gram"), std::string::npos);
}

TEST(Commands, HolonomyDiscRecord) {
  const CommandResult r = cmd_holonomy(preset("disc"));
  ASSERT_EQ(r.exit_code, kExitPass) << r.text;
  const json j = json::parse(r.text);
  EXPECT_NEAR(j["log"][0].get<double>(), -std::numbers::pi, 1e-6);
  EXPECT_NEAR(j["comparison"]["reference"].get<double>(), -std::numbers::pi, 1e-15);
}

TEST(Commands, HolonomyOpenPathIsConfigError) {
  const RunConfig c = parse(R"({"system": {"type": "disc"}, "path": {"type": "disc_circle", "turns": 0.5}})");
  const CommandResult r = run_command("holonomy", c);
  EXPECT_EQ(r.exit_code, kExitConfigError);
  EXPECT_NE(r.text.find("endpoint gap"), std::string::npos) << r.text;
}

TEST(Commands, HolonomyCatRecordHasAxisAngle) {
  const json j = json::parse(cmd_holonomy(preset("cat")).text);
  EXPECT_GT(j["rotation_angle"].get<double>(), 0.05);
  EXPECT_FALSE(j.contains("comparison"));
}

TEST(Commands, BoardLiftReturnsToStart) {
  RunConfig c = preset("board");
  c.format = OutputFormat::Record;
  c.format_set = true;
  const CommandResult r = cmd_lift(c);
  ASSERT_EQ(r.exit_code, kExitPass);
  const json j = json::parse(r.text);
  EXPECT_NEAR(j["final_point"][0].get<double>(), 0.0, 1e-12);
  EXPECT_LT(j["momentum_audit"]["normalized_momentum"].get<double>(), 1e-8);
}

TEST(Commands, LiftCsvHasOneRowPerStep) {
  RunConfig c = preset("disc");
  c.steps = 128;
  const CommandResult r = cmd_lift(c);
  ASSERT_EQ(r.exit_code, kExitPass);
  EXPECT_EQ(std::count(r.text.begin(), r.text.end(), '\n'), 1 + 129);
  EXPECT_EQ(r.text.substr(0, r.text.find('\n')), "t,x0,x1,x2,log_g0,P0,pairing_residual");
}

TEST(Commands, DiscCurvatureScan) {
  const CommandResult r = cmd_curvature(preset("disc"));
  ASSERT_EQ(r.exit_code, kExitPass) << r.text;
  std::stringstream ss(r.text);
  std::string line;
  std::getline(ss, line);
  EXPECT_EQ(line, "x0,x1,x2,i,j,F0,reference");
  int rows = 0;
  while (std::getline(ss, line)) {
    double x0, x1, x2, i, j, f, ref;
    char comma;
    std::stringstream row(line);
    row >> x0 >> comma >> x1 >> comma >> x2 >> comma >> i >> comma >> j >> comma >> f >> comma >> ref;
    EXPECT_NEAR(f, 2.0 * x0 / std::pow(1.0 + x0 * x0, 2), 1e-6);
    EXPECT_GE(x0, 0.5);
    EXPECT_LE(x0, 2.0);
    ++rows;
  }
  EXPECT_EQ(rows, 16);
}

TEST(Commands, DescribeDiscAtPoint) {
  const RunConfig c = parse(R"({"system": {"type": "disc"}, "describe": {"point": [2, 0, 0]}})");
  const json j = json::parse(cmd_describe(c).text);
  EXPECT_EQ(j["metric"][2][2].get<double>(), 5.0);
  EXPECT_EQ(j["gram"][0][0].get<double>(), 5.0);
  EXPECT_DOUBLE_EQ(j["connection"][0][1].get<double>(), 0.8);
}

TEST(Commands, OutputIsDeterministic) {
  for (const std::string& cmd : {"verify", "lift", "holonomy", "curvature", "describe"}) {
    RunConfig c = preset("cat");
    c.samples = 20;
    c.steps = 256;
    EXPECT_EQ(run_command(cmd, c).text, run_command(cmd, c).text) << cmd;
  }
  RunConfig a = preset("disc"), b = preset("disc");
  b.seed = 1;
  EXPECT_NE(cmd_verify(a).text, cmd_verify(b).text);
}

TEST(Commands, ToleranceFlagDrivesExitCode) {
  RunConfig c = preset("disc");
  c.steps = 16;
  c.path.type = "wobble";
  c.tolerance = 1e-12;
  EXPECT_EQ(cmd_holonomy(c).exit_code, kExitVerificationFailure);
  c.tolerance = 1e-2;
  EXPECT_EQ(cmd_holonomy(c).exit_code, kExitPass);
}
