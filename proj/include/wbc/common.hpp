#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace wbc {

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;

/// Raised when a caller breaks a documented precondition (dimension
/// mismatch, wrong frame, out-of-range id, non-positive time step).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a factorization that must succeed does not (singular or
/// indefinite inertia, undefined normalization).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The task Jacobian lost rank. Carries the smallest singular value.
class SingularityError : public NumericalError {
 public:
  SingularityError(const std::string& what, double min_singular_value)
      : NumericalError(what), min_singular_value_(min_singular_value) {}

  double min_singular_value() const { return min_singular_value_; }

 private:
  double min_singular_value_;
};

/// Which half of the robot the priority weighting favours.
enum class PriorityMode { manipulation = 0, locomotion = 1 };

inline const char* to_string(PriorityMode mode) {
  return mode == PriorityMode::manipulation ? "manipulation" : "locomotion";
}

}  // namespace wbc
