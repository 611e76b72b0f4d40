#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace satpower {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad configuration or argument values (K > N, non-positive budget, ...).
class InvalidConfigError : public Error {
 public:
  using Error::Error;
};

/// A numeric computation left the representable range or failed to converge.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Channel matrix too ill-conditioned for ZF inversion.
class SingularChannelError : public Error {
 public:
  using Error::Error;
};

/// A direct channel gain mu_kk is zero, so SINR targets are unreachable.
class DegenerateChannelError : public Error {
 public:
  using Error::Error;
};

/// The equality-constrained reallocation has no solution under the budget.
/// Carries the last power vector that was still valid when the solve failed.
class ReallocationInfeasibleError : public Error {
 public:
  ReallocationInfeasibleError(const std::string& what, std::vector<double> last_powers)
      : Error(what), last_powers_w(std::move(last_powers)) {}

  std::vector<double> last_powers_w;
};

/// Training loss became non-finite.
class TrainingDivergedError : public NumericError {
 public:
  TrainingDivergedError(const std::string& what, int epoch) : NumericError(what), epoch(epoch) {}

  int epoch;
};

/// Model file missing, truncated, or dimensionally inconsistent.
class CorruptModelError : public Error {
 public:
  using Error::Error;
};

/// File could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace satpower
