#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace momap {

enum class ErrorCode {
  Structural,        ///< dimension mismatch between operands
  KindMismatch,      ///< group element / algebra of incompatible kind
  AmbiguousBranch,   ///< SO(3) log at angle pi
  DegenerateForm,    ///< singular or non-Ad-invariant bilinear form
  VerticalDegeneracy,///< singular C(x) map
  SingularAction,    ///< Gram matrix of generators is not positive definite
  StepUnderflow,
  InvalidSpec,
  NotClosed,         ///< holonomy requested for an open path
  Config,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised where the action fails to be free: the Gram matrix g(X_a, X_b)
/// has an eigenvalue below tolerance. Carries the offending matrix.
class SingularActionError : public Error {
 public:
  SingularActionError(const std::string& what, Eigen::MatrixXd gram)
      : Error(ErrorCode::SingularAction, what), gram_(std::move(gram)) {}

  const Eigen::MatrixXd& gram() const noexcept { return gram_; }

 private:
  Eigen::MatrixXd gram_;
};

}  // namespace momap
