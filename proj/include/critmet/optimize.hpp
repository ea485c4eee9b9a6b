#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "critmet/dicke_thermo.hpp"
#include "critmet/fisher.hpp"
#include "critmet/probe.hpp"

namespace critmet {

// Moment evaluation chosen per beta point. Auto picks quadrature within 0.2
// of beta_c or whenever g-derivatives are needed in the Normal phase (the
// saddle point has none there), closed form otherwise.
enum class MethodSelector { Closed, Quadrature, Auto };
std::string_view to_string(MethodSelector m) noexcept;

MomentMethod resolve_method(MethodSelector selector, double beta_ratio, bool needs_derivatives);

// Moments at beta = beta_ratio * beta_c of the template.
PhotonMoments moments_at(const DickeParams& tmpl, double beta_ratio, MethodSelector selector,
                         bool needs_derivatives = true);

struct TimeMaximum {
  double t_opt = 0.0;
  double f_max = 0.0;
};

// Coarse scan of [0, t_max] on grid_points points, then golden-section
// refinement inside the bracket around the best point to 1e-8 relative.
// Ties go to the smaller t. Throws FlatFunction when no grid value is > 0.
TimeMaximum maximize_over_time(const std::function<double(double)>& f, double t_max,
                               int grid_points = 400);

// t_max with n_probes lambda^2 t_max^2 <n^2> = 25.
double default_t_max(const ProbeParams& pp, const PhotonMoments& m, int n_probes = 1);

enum class ScanTarget { ClassicalG, QuantumG, EffectiveMultiparam };
std::string_view to_string(ScanTarget t) noexcept;

struct ScanCurve {
  ScanTarget target = ScanTarget::QuantumG;
  std::vector<double> t_opt;  // 0 where the FI vanishes identically
  std::vector<double> f_max;

  // First index of the largest f_max.
  std::size_t argmax_index() const;
};

struct ScanResult {
  std::vector<double> beta_ratio;
  std::vector<MomentMethod> method;
  std::vector<ScanCurve> curves;

  const ScanCurve& curve(ScanTarget target) const;
};

struct ScanOptions {
  MethodSelector method = MethodSelector::Auto;
  int time_grid = 400;
};

// Grid must be strictly increasing. Points are evaluated in parallel and
// assembled by index. Moments are computed once per point for all targets.
ScanResult beta_scan(const DickeParams& tmpl, const ProbeParams& pp,
                     std::span<const double> beta_ratio_grid, std::span<const ScanTarget> targets,
                     const ScanOptions& options = {});

// 101 points on [0.5, 1.5].
std::vector<double> default_beta_grid();
std::vector<double> linspace(double lo, double hi, int points);

struct FitWindow {
  double lo = 0.0;
  double hi = 0.0;
};
inline constexpr FitWindow kNormalWindow{0.85, 0.99};
inline constexpr FitWindow kSuperradiantWindow{1.01, 1.15};

// Least squares in (ln beta_ratio, ln F). Normal: exponent mu = slope.
// Superradiant: exponent nu = -slope.
struct PowerLawFit {
  Phase branch = Phase::Normal;
  double exponent = 0.0;
  double slope = 0.0;
  double log_prefactor = 0.0;
  FitWindow window;
  double rms_residual = 0.0;
  std::size_t points = 0;
};

// Uses the points inside the window with F > 0. Throws InsufficientPoints
// when fewer than 5 remain.
PowerLawFit fit_power_law(std::span<const double> beta_ratio, std::span<const double> f,
                          Phase branch, FitWindow window);

// QFI of an ensemble at time t with the given moments.
double ensemble_qfi(const ProbeParams& pp, const PhotonMoments& m, double t,
                    const EnsembleSpec& ensemble);

struct UltimatePrecision {
  double value = 0.0;
  double beta_ratio = 0.0;
  double t_opt = 0.0;
};

struct UltimateOptions {
  MethodSelector method = MethodSelector::Auto;
  std::vector<double> beta_grid = default_beta_grid();
  int time_grid = 400;
  double beta_rel_tol = 1e-6;
};

// Max over (t, beta) of the ensemble QFI: beta scan with per-point time
// maximization, then golden refinement in beta around the best grid point.
// Uncorrelated ensembles are n_probes times the single-probe result.
UltimatePrecision ultimate_precision(const DickeParams& tmpl, const ProbeParams& pp,
                                     const EnsembleSpec& ensemble,
                                     const UltimateOptions& options = {});

// Time-optimized ensemble QFI at a fixed beta ratio.
TimeMaximum time_optimized_qfi(const DickeParams& tmpl, const ProbeParams& pp,
                               const EnsembleSpec& ensemble, double beta_ratio,
                               MethodSelector method = MethodSelector::Auto,
                               int time_grid = 400);

// Fit F = c N through the origin. r2 is the uncentered coefficient
// 1 - SS_res / sum F^2 appropriate to a fit without intercept;
// r2_centered uses the mean-subtracted total sum of squares.
struct ScalingFit {
  EnsembleKind kind = EnsembleKind::Uncorrelated;
  std::vector<int> n_probes;
  std::vector<double> values;
  std::vector<double> t_opt;
  double slope = 0.0;
  double intercept = 0.0;  // forced
  double r2 = 0.0;
  double r2_centered = 0.0;
};

ScalingFit fit_through_origin(std::span<const int> n_probes, std::span<const double> values);

struct ScalingOptions {
  double beta_ratio = 1.0;
  MethodSelector method = MethodSelector::Auto;
  int time_grid = 400;
};

// Time-optimized QFI per n at fixed beta ratio, fitted through the origin.
// Needs at least 4 probe numbers.
ScalingFit scaling_fit(const DickeParams& tmpl, const ProbeParams& pp,
                       std::span<const int> n_probes, EnsembleKind kind, double w,
                       const ScalingOptions& options = {});

}  // namespace critmet
