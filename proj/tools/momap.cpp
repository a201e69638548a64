// Command line front end: momap <command> [config.json] [flags]

#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "momap/commands.hpp"

namespace {

struct Flags {
  std::string config;
  std::string preset;
  std::optional<int> steps;
  std::optional<double> tol;
  std::optional<unsigned long long> seed;
  std::optional<std::string> out;
  std::optional<std::string> format;
};

void add_flags(CLI::App* sub, Flags& f) {
  sub->add_option("config", f.config, "JSON run configuration")->check(CLI::ExistingFile);
  sub->add_option("--system", f.preset, "builtin configuration when no file is given")
      ->check(CLI::IsMember({"cat", "disc", "board"}));
  sub->add_option("--steps", f.steps, "integration steps per unit time (default 4096)")->check(CLI::PositiveNumber);
  sub->add_option("--tol", f.tol, "pass/fail tolerance (default 1e-8)")->check(CLI::PositiveNumber);
  sub->add_option("--seed", f.seed, "seed for random audit points (default 0)");
  sub->add_option("--out", f.out, "write output here instead of stdout");
  sub->add_option("--format", f.format, "output layout")->check(CLI::IsMember({"csv", "record"}));
}

momap::RunConfig resolve(const Flags& f) {
  if (!f.config.empty() && !f.preset.empty()) {
    throw momap::Error(momap::ErrorCode::Config, "give either a config file or --system, not both");
  }
  momap::RunConfig c = f.config.empty() ? momap::preset(f.preset.empty() ? "cat" : f.preset)
                                        : momap::load_config(f.config);
  if (f.steps) c.steps = *f.steps;
  if (f.tol) c.tolerance = *f.tol;
  if (f.seed) {
    c.seed = *f.seed;
    c.system.generic.seed = static_cast<unsigned>(*f.seed);
  }
  if (f.out) c.out = *f.out;
  if (f.format) {
    c.format = *f.format == "csv" ? momap::OutputFormat::Csv : momap::OutputFormat::Record;
    c.format_set = true;
  }
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Momentum-map connections: lifts, holonomy, curvature and identity checks"};
  app.require_subcommand(1);
  Flags flags;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"verify", "run the identity suite at seeded random points"},
      {"lift", "horizontally lift the configured path"},
      {"holonomy", "holonomy of the configured closed loop"},
      {"curvature", "curvature of the connection at points or along a scan"},
      {"describe", "print metric, generators and connection at a point"},
  };
  for (const auto& [name, help] : commands) add_flags(app.add_subcommand(name, help), flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return momap::kExitConfigError;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  momap::CommandResult result;
  momap::RunConfig config;
  try {
    config = resolve(flags);
    result = momap::run_command(command, config);
  } catch (const momap::Error& e) {
    result = {momap::exit_code_for(e), momap::error_record(e)};
  }

  if (result.exit_code == momap::kExitConfigError || result.exit_code == momap::kExitSingularAction) {
    std::cerr << result.text;
    return result.exit_code;
  }
  if (config.out.empty()) {
    std::cout << result.text;
  } else {
    std::ofstream out(config.out, std::ios::binary);
    if (!out || !(out << result.text)) {
      std::cerr << momap::error_record(momap::Error(momap::ErrorCode::Config, "cannot write '" + config.out + "'"));
      return momap::kExitConfigError;
    }
  }
  return result.exit_code;
}
