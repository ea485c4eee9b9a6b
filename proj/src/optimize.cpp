#include "critmet/optimize.hpp"

#include <algorithm>
#include <cmath>

#include "critmet/error.hpp"
#include "critmet/numerics.hpp"

namespace critmet {

std::string_view to_string(MethodSelector m) noexcept {
  switch (m) {
    case MethodSelector::Closed: return "closed";
    case MethodSelector::Quadrature: return "quadrature";
    case MethodSelector::Auto: return "auto";
  }
  return "unknown";
}

std::string_view to_string(ScanTarget t) noexcept {
  switch (t) {
    case ScanTarget::ClassicalG: return "classical_g";
    case ScanTarget::QuantumG: return "quantum_g";
    case ScanTarget::EffectiveMultiparam: return "effective_multiparam";
  }
  return "unknown";
}

MomentMethod resolve_method(MethodSelector selector, double beta_ratio, bool needs_derivatives) {
  switch (selector) {
    case MethodSelector::Closed: return MomentMethod::ClosedForm;
    case MethodSelector::Quadrature: return MomentMethod::Quadrature;
    case MethodSelector::Auto: break;
  }
  if (std::abs(beta_ratio - 1.0) < 0.2) return MomentMethod::Quadrature;
  if (needs_derivatives && beta_ratio < 1.0) return MomentMethod::Quadrature;
  return MomentMethod::ClosedForm;
}

PhotonMoments moments_at(const DickeParams& tmpl, double beta_ratio, MethodSelector selector,
                         bool needs_derivatives) {
  if (!(beta_ratio > 0.0)) throw Error(Errc::InvalidParams, "beta ratio must be positive");
  const DickeParams p = tmpl.with_beta(beta_ratio * critical_beta(tmpl));
  return moment_derivatives(p, resolve_method(selector, beta_ratio, needs_derivatives));
}

TimeMaximum maximize_over_time(const std::function<double(double)>& f, double t_max,
                               int grid_points) {
  if (grid_points < 3) throw Error(Errc::InvalidParams, "time grid needs at least 3 points");
  if (!(t_max > 0.0) || !std::isfinite(t_max)) {
    throw Error(Errc::InvalidParams, "t_max must be positive and finite");
  }
  const double step = t_max / (grid_points - 1);
  int best = 0;
  double best_value = f(0.0);
  for (int i = 1; i < grid_points; ++i) {
    const double v = f(i * step);
    if (v > best_value) {
      best = i;
      best_value = v;
    }
  }
  if (!(best_value > 0.0)) {
    throw Error(Errc::FlatFunction, "function is nowhere positive on the time grid");
  }
  const double lo = std::max(best - 1, 0) * step;
  const double hi = std::min(best + 1, grid_points - 1) * step;
  const numerics::Extremum refined = numerics::golden_section_maximize(f, lo, hi, 1e-8);
  if (refined.fx > best_value) return {refined.x, refined.fx};
  return {best * step, best_value};
}

double default_t_max(const ProbeParams& pp, const PhotonMoments& m, int n_probes) {
  if (!(pp.lambda > 0.0)) throw Error(Errc::InvalidParams, "lambda must be positive to encode");
  if (!(m.n2_mean > 0.0)) throw Error(Errc::InvalidParams, "<n^2> must be positive");
  return 5.0 / (pp.lambda * std::sqrt(n_probes * m.n2_mean));
}

std::size_t ScanCurve::argmax_index() const {
  return static_cast<std::size_t>(std::max_element(f_max.begin(), f_max.end()) - f_max.begin());
}

const ScanCurve& ScanResult::curve(ScanTarget target) const {
  for (const auto& c : curves) {
    if (c.target == target) return c;
  }
  throw Error(Errc::InvalidParams, "scan does not contain the requested target");
}

namespace {

std::function<double(double)> target_function(ScanTarget target, const ProbeParams& pp,
                                               const PhotonMoments& m) {
  switch (target) {
    case ScanTarget::ClassicalG:
      return [&pp, &m](double t) { return classical_fi_g(pp, m, t); };
    case ScanTarget::QuantumG:
      return [&pp, &m](double t) { return quantum_fi_g(pp, m, t); };
    case ScanTarget::EffectiveMultiparam:
      return [&pp, &m](double t) { return fisher_matrix(pp, m, t).effective; };
  }
  throw Error(Errc::InvalidParams, "unknown scan target");
}

// FlatFunction means zero sensitivity at this point, recorded as (0, 0).
TimeMaximum maximize_or_zero(const std::function<double(double)>& f, double t_max, int grid) {
  try {
    return maximize_over_time(f, t_max, grid);
  } catch (const Error& e) {
    if (e.code() != Errc::FlatFunction) throw;
    return {};
  }
}

void require_increasing(std::span<const double> grid) {
  if (grid.empty()) throw Error(Errc::InvalidParams, "empty beta grid");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw Error(Errc::InvalidParams, "beta grid not increasing");
  }
  if (!(grid.front() > 0.0)) throw Error(Errc::InvalidParams, "beta ratios must be positive");
}

}  // namespace

ScanResult beta_scan(const DickeParams& tmpl, const ProbeParams& pp,
                     std::span<const double> beta_ratio_grid, std::span<const ScanTarget> targets,
                     const ScanOptions& options) {
  tmpl.validate();
  pp.validate();
  require_increasing(beta_ratio_grid);
  if (targets.empty()) throw Error(Errc::InvalidParams, "no scan target");
  const std::size_t n = beta_ratio_grid.size();

  ScanResult result;
  result.beta_ratio.assign(beta_ratio_grid.begin(), beta_ratio_grid.end());
  result.method.resize(n);
  for (ScanTarget target : targets) {
    result.curves.push_back({target, std::vector<double>(n), std::vector<double>(n)});
  }

  numerics::parallel_for(n, [&](std::size_t i) {
    const double ratio = beta_ratio_grid[i];
    const PhotonMoments m = moments_at(tmpl, ratio, options.method, true);
    result.method[i] = m.method;
    const double t_max = default_t_max(pp, m);
    for (auto& c : result.curves) {
      const TimeMaximum best = maximize_or_zero(target_function(c.target, pp, m), t_max,
                                                options.time_grid);
      c.t_opt[i] = best.t_opt;
      c.f_max[i] = best.f_max;
    }
  });
  return result;
}

std::vector<double> linspace(double lo, double hi, int points) {
  if (points < 2) throw Error(Errc::InvalidParams, "linspace needs at least 2 points");
  std::vector<double> v(points);
  const double step = (hi - lo) / (points - 1);
  for (int i = 0; i < points; ++i) v[i] = lo + i * step;
  v.back() = hi;
  return v;
}

std::vector<double> default_beta_grid() { return linspace(0.5, 1.5, 101); }

PowerLawFit fit_power_law(std::span<const double> beta_ratio, std::span<const double> f,
                          Phase branch, FitWindow window) {
  if (beta_ratio.size() != f.size()) throw Error(Errc::InvalidParams, "length mismatch");
  const double slack = 1e-9;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double r = beta_ratio[i];
    if (r < window.lo - slack || r > window.hi + slack) continue;
    if (!(f[i] > 0.0) || !std::isfinite(f[i])) continue;
    xs.push_back(std::log(r));
    ys.push_back(std::log(f[i]));
  }
  if (xs.size() < 5) {
    throw Error(Errc::InsufficientPoints,
                "power-law fit needs 5 positive points, window has " + std::to_string(xs.size()));
  }
  const double k = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw Error(Errc::InsufficientPoints, "fit window has no spread in beta");

  PowerLawFit fit;
  fit.branch = branch;
  fit.slope = sxy / sxx;
  fit.log_prefactor = my - fit.slope * mx;
  fit.exponent = branch == Phase::Normal ? fit.slope : -fit.slope;
  fit.window = window;
  fit.points = xs.size();
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double res = ys[i] - (fit.log_prefactor + fit.slope * xs[i]);
    ss += res * res;
  }
  fit.rms_residual = std::sqrt(ss / k);
  return fit;
}

double ensemble_qfi(const ProbeParams& pp, const PhotonMoments& m, double t,
                    const EnsembleSpec& ensemble) {
  switch (ensemble.kind) {
    case EnsembleKind::Uncorrelated: return uncorrelated_qfi(pp, m, t, ensemble.n_probes);
    case EnsembleKind::GHZ: return ghz_qfi(pp, m, t, ensemble.n_probes);
    case EnsembleKind::Werner:
      return werner_qfi(pp, m, t, ensemble.n_probes, ensemble.w.value(), WernerMode::Exact);
  }
  throw Error(Errc::InvalidParams, "unknown ensemble kind");
}

namespace {

TimeMaximum time_optimized(const ProbeParams& pp, const PhotonMoments& m,
                           const EnsembleSpec& ensemble, int time_grid) {
  if (ensemble.kind == EnsembleKind::Uncorrelated) {
    // additivity: optimize one probe, scale exactly
    const TimeMaximum single = maximize_or_zero(
        [&](double t) { return quantum_fi_g(pp, m, t); }, default_t_max(pp, m), time_grid);
    return {single.t_opt, ensemble.n_probes * single.f_max};
  }
  return maximize_or_zero([&](double t) { return ensemble_qfi(pp, m, t, ensemble); },
                          default_t_max(pp, m, ensemble.n_probes), time_grid);
}

}  // namespace

TimeMaximum time_optimized_qfi(const DickeParams& tmpl, const ProbeParams& pp,
                               const EnsembleSpec& ensemble, double beta_ratio,
                               MethodSelector method, int time_grid) {
  ensemble.validate();
  const PhotonMoments m = moments_at(tmpl, beta_ratio, method, true);
  return time_optimized(pp, m, ensemble, time_grid);
}

UltimatePrecision ultimate_precision(const DickeParams& tmpl, const ProbeParams& pp,
                                     const EnsembleSpec& ensemble,
                                     const UltimateOptions& options) {
  tmpl.validate();
  pp.validate();
  ensemble.validate();
  if (ensemble.kind == EnsembleKind::Uncorrelated && ensemble.n_probes > 1) {
    UltimatePrecision single = ultimate_precision(tmpl, pp, {1, EnsembleKind::Uncorrelated, {}},
                                                  options);
    single.value *= ensemble.n_probes;
    return single;
  }
  const std::vector<double>& grid = options.beta_grid;
  require_increasing(grid);
  std::vector<TimeMaximum> row(grid.size());
  numerics::parallel_for(grid.size(), [&](std::size_t i) {
    row[i] = time_optimized_qfi(tmpl, pp, ensemble, grid[i], options.method, options.time_grid);
  });
  std::size_t best = 0;
  for (std::size_t i = 1; i < row.size(); ++i) {
    if (row[i].f_max > row[best].f_max) best = i;
  }
  UltimatePrecision out{row[best].f_max, grid[best], row[best].t_opt};
  if (grid.size() < 2) return out;

  const double lo = grid[best == 0 ? 0 : best - 1];
  const double hi = grid[std::min(best + 1, grid.size() - 1)];
  const auto value_at = [&](double r) {
    return time_optimized_qfi(tmpl, pp, ensemble, r, options.method, options.time_grid).f_max;
  };
  const numerics::Extremum refined =
      numerics::golden_section_maximize(value_at, lo, hi, options.beta_rel_tol);
  if (refined.fx > out.value) {
    const TimeMaximum at =
        time_optimized_qfi(tmpl, pp, ensemble, refined.x, options.method, options.time_grid);
    out = {at.f_max, refined.x, at.t_opt};
  }
  return out;
}

ScalingFit fit_through_origin(std::span<const int> n_probes, std::span<const double> values) {
  if (n_probes.size() != values.size() || n_probes.empty()) {
    throw Error(Errc::InvalidParams, "scaling fit needs matching non-empty lists");
  }
  ScalingFit fit;
  fit.n_probes.assign(n_probes.begin(), n_probes.end());
  fit.values.assign(values.begin(), values.end());
  double snf = 0.0, snn = 0.0, sff = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double n = n_probes[i];
    snf += n * values[i];
    snn += n * n;
    sff += values[i] * values[i];
    mean += values[i];
  }
  mean /= static_cast<double>(values.size());
  fit.slope = snf / snn;
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double res = values[i] - fit.slope * n_probes[i];
    ss_res += res * res;
    ss_tot += (values[i] - mean) * (values[i] - mean);
  }
  fit.r2 = 1.0 - ss_res / sff;
  fit.r2_centered = 1.0 - ss_res / ss_tot;
  return fit;
}

ScalingFit scaling_fit(const DickeParams& tmpl, const ProbeParams& pp,
                       std::span<const int> n_probes, EnsembleKind kind, double w,
                       const ScalingOptions& options) {
  if (n_probes.size() < 4) throw Error(Errc::InsufficientPoints, "scaling fit needs >= 4 values");
  tmpl.validate();
  pp.validate();
  const PhotonMoments m = moments_at(tmpl, options.beta_ratio, options.method, true);
  std::vector<double> values(n_probes.size());
  std::vector<double> t_opt(n_probes.size());
  for (std::size_t i = 0; i < n_probes.size(); ++i) {
    EnsembleSpec ensemble{n_probes[i], kind, {}};
    if (kind == EnsembleKind::Werner) ensemble.w = w;
    ensemble.validate();
    const TimeMaximum best = time_optimized(pp, m, ensemble, options.time_grid);
    values[i] = best.f_max;
    t_opt[i] = best.t_opt;
  }
  ScalingFit fit = fit_through_origin(n_probes, values);
  fit.kind = kind;
  fit.t_opt = std::move(t_opt);
  return fit;
}

}  // namespace critmet
