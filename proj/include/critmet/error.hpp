#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace critmet {

enum class Errc {
  InvalidParams,
  NoTransition,
  NonConvergence,
  QuadratureFailure,
  DegenerateCurvature,
  InvalidRegime,
  CutoffTooSmall,
  DimensionTooLarge,
  SingularBloch,
  FlatFunction,
  InsufficientPoints,
  ConfigError,
};

std::string_view to_string(Errc code) noexcept;

// All library failures are reported through this exception; callers that need
// to distinguish causes switch on code().
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace critmet
