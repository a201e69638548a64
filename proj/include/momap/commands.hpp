#pragma once

#include <string>
#include <vector>

#include "momap/config.hpp"

namespace momap {

/// Exit statuses of the command line tool.
enum ExitCode : int {
  kExitPass = 0,
  kExitVerificationFailure = 1,
  kExitConfigError = 2,
  kExitSingularAction = 3,
};

struct CommandResult {
  int exit_code = kExitPass;
  std::string text;  ///< the rendered output document
};

/// One row of the verification report.
struct IdentityCheck {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  int evaluated = 0;
  bool pass() const { return evaluated > 0 && residual <= tolerance; }
};

struct VerifyReport {
  std::string system;
  std::vector<IdentityCheck> checks;
  int points = 0;
  int skipped_singular = 0;
  bool pass() const;
};

/// Runs the identity suite at c.samples seeded points; singular points are
/// skipped and counted.
VerifyReport verify_identities(const RunConfig& c);

/// Closed-form or quadrature reference for the holonomy angle of a builtin
/// abelian loop, if one exists.
std::optional<double> reference_holonomy(const RunConfig& c);

/// dr ^ dphi coefficient of the disc curvature, 2 m r I / (I + m r^2)^2.
double disc_curvature_closed_form(double inertia, double mass, double r);

CommandResult cmd_verify(const RunConfig& c);
CommandResult cmd_lift(const RunConfig& c);
CommandResult cmd_holonomy(const RunConfig& c);
CommandResult cmd_curvature(const RunConfig& c);
CommandResult cmd_describe(const RunConfig& c);

/// Dispatches by name and converts library errors into an error record with
/// the matching exit code.
CommandResult run_command(const std::string& name, const RunConfig& c);

/// JSON error record {"error": {"code", "message", ...}}.
std::string error_record(const Error& e);
int exit_code_for(const Error& e);

}  // namespace momap
