#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace curved {

enum class ErrorKind {
  InvalidInput,
  SingularConfiguration,
  PolarSingularity,
  NonpositiveMass,
  NotAdmissible,
  InvalidShape,
  DegenerateShape,
  InconsistentPair,
  NotAFixedPoint,
  NoConvergence,
  SingularIterate,
  DegenerateSpectrum,
  DegenerateBasis,
  DimensionMismatch,
  StepFailure,
  NoGrowthWindow,
  IOFailure,
};

std::string_view to_string(ErrorKind kind);

// Every library failure is reported through this type; `kind()` is what
// callers (and the CLI exit-code mapping) dispatch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Integrator failure carrying the time at which the step could not be taken.
class StepFailure : public Error {
 public:
  StepFailure(double time, const std::string& what)
      : Error(ErrorKind::StepFailure, what + " at t=" + std::to_string(time)), time_(time) {}

  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace curved
