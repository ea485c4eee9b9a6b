#include "critmet/error.hpp"

namespace critmet {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidParams: return "InvalidParams";
    case Errc::NoTransition: return "NoTransition";
    case Errc::NonConvergence: return "NonConvergence";
    case Errc::QuadratureFailure: return "QuadratureFailure";
    case Errc::DegenerateCurvature: return "DegenerateCurvature";
    case Errc::InvalidRegime: return "InvalidRegime";
    case Errc::CutoffTooSmall: return "CutoffTooSmall";
    case Errc::DimensionTooLarge: return "DimensionTooLarge";
    case Errc::SingularBloch: return "SingularBloch";
    case Errc::FlatFunction: return "FlatFunction";
    case Errc::InsufficientPoints: return "InsufficientPoints";
    case Errc::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace critmet
