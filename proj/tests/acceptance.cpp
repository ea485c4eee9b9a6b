// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Tolerances are the contract values; nothing is relaxed to
// make a line pass.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "critmet/cli.hpp"
#include "critmet/dicke_thermo.hpp"
#include "critmet/error.hpp"
#include "critmet/fisher.hpp"
#include "critmet/optimize.hpp"
#include "critmet/probe.hpp"

using namespace critmet;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
  if (!ok) ++failures;
  fmt::print("{} {} {}: {}\n", ok ? "PASS" : "FAIL", id, name, detail);
  std::fflush(stdout);
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

DickeParams at_ratio(double r) {
  const DickeParams p = reference_params();
  return p.with_beta(r * critical_beta(p));
}

// 1. beta_c = 1 for eps = 1, g = 0.3, omega = 4 tanh(1/2) g^2
void critical_temperature() {
  DickeParams p;
  p.epsilon = 1.0;
  p.g = 0.3;
  p.omega = 4.0 * std::tanh(0.5) * p.g * p.g;
  p.n_atoms = 50;
  const double bc = critical_beta(p);
  report(1, "critical temperature", std::abs(bc - 1.0) <= 1e-12,
         fmt::format("beta_c = {:.17g}, |beta_c - 1| = {:.3g} (tol 1e-12)", bc, std::abs(bc - 1.0)));
}

// 2. z0 at beta = 1e6 beta_c against the beta -> infinity limit
void order_parameter_asymptote() {
  const DickeParams p = at_ratio(1e6);
  const double z0 = solve_order_parameter(p).z0;
  // tanh -> 1, so eta -> 4 g^2/(eps omega) = 1/tanh(eps/2)
  const double eta_inf = 1.0 / std::tanh(0.5);
  const double z_inf = p.epsilon * std::sqrt(eta_inf * eta_inf - 1.0) / (4.0 * p.g);
  const bool ok = std::abs(z0 - z_inf) <= 1e-6 && std::abs(z0 - 1.5992) < 5e-5;
  report(2, "order-parameter asymptote", ok,
         fmt::format("z0(1e6 beta_c) = {:.10f}, limit = {:.10f}, |diff| = {:.3g} (tol 1e-6), "
                     "quoted 1.5992",
                     z0, z_inf, std::abs(z0 - z_inf)));
}

// 3. closed-form FI against the generic estimators
void oracle_equivalence() {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> ratio(0.5, 1.5), frac(0.02, 1.0);
  std::uniform_int_distribution<int> probes(1, 10);
  const ProbeParams pp{1.5, 0.1, {}};
  const int samples = 240;
  double worst = 0.0;
  int normal = 0, superradiant = 0;
  for (int i = 0; i < samples; ++i) {
    const double r = ratio(rng);
    (r < 1.0 ? normal : superradiant)++;
    const PhotonMoments m = moment_derivatives(at_ratio(r), MomentMethod::Quadrature);
    const int n = probes(rng);
    const double t = frac(rng) * default_t_max(pp, m, n);

    const SigmaXOutcomes o = sigma_x_outcomes(pp, m, t);
    worst = std::max(worst, rel(classical_fi_g(pp, m, t),
                                classical_fi_from_distribution(o.probs, o.dprobs).value));
    const BlochDerivative b1 = bloch_derivative_g(pp, m, t);
    worst = std::max(worst, rel(quantum_fi_g(pp, m, t), bloch_qfi(b1.r, b1.dr)));
    const BlochDerivative bn = bloch_derivative_g(pp, m, t, n);
    worst = std::max(worst, rel(ghz_qfi(pp, m, t, n), bloch_qfi(bn.r, bn.dr)));
  }
  report(3, "oracle equivalence", worst <= 1e-10 && normal > 0 && superradiant > 0,
         fmt::format("{} samples ({} normal, {} superradiant), worst relative error {:.3g} "
                     "(tol 1e-10)",
                     samples, normal, superradiant, worst));
}

// 4. exact decoherence factor of the truncated N = 2 model
void decoherence_oracle() {
  DickeParams p = at_ratio(1.0);
  p.n_atoms = 2;
  const ProbeParams pp{1.5, 1.5e-3, {}};
  const int n_max = fock_cutoff(p.beta, p.omega);
  const ExactDecoherence exact(p, pp, n_max);
  PhotonMoments m;
  m.n_mean = exact.n_mean();
  m.n2_mean = exact.n2_mean();
  const double t_end = 1.0 / (pp.lambda * std::sqrt(m.n2_mean));  // x = 1
  const int points = 401;
  double worst = 0.0, x_worst = 0.0, x_first_violation = -1.0;
  for (int i = 0; i < points; ++i) {
    const double t = t_end * i / (points - 1);
    const double x = pp.lambda * pp.lambda * t * t * m.n2_mean;
    const double d = std::abs(exact.evaluate(t).value - decoherence_factor(pp, m, t).value);
    if (d > worst) {
      worst = d;
      x_worst = x;
    }
    if (d > 1e-3 && x_first_violation < 0.0) x_first_violation = x;
  }
  report(4, "decoherence-factor oracle", worst <= 1e-3,
         fmt::format("N = 2, n_max = {}, dim = {}, <n> = {:.6g}, <n^2> = {:.6g}; max |L_exact - "
                     "L_closed| = {:.3g} at x = {:.3g} over x in [0, 1] (tol 1e-3){}",
                     n_max, exact.dimension(), m.n_mean, m.n2_mean, worst, x_worst,
                     x_first_violation < 0.0
                         ? std::string()
                         : fmt::format("; first exceeds tol at x = {:.3g}", x_first_violation)));
}

// 5 and 6 share the 101-point quadrature scan
void criticality_and_exponents() {
  const ProbeParams pp{1.5, 0.1, {}};
  const std::vector<double> grid = default_beta_grid();
  const ScanTarget targets[] = {ScanTarget::ClassicalG, ScanTarget::QuantumG,
                                ScanTarget::EffectiveMultiparam};
  const ScanResult scan = beta_scan(reference_params(), pp, grid, targets,
                                    {MethodSelector::Quadrature, 400});
  std::size_t nearest = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (std::abs(grid[i] - 1.0) < std::abs(grid[nearest] - 1.0)) nearest = i;
  }
  const std::size_t iq = scan.curve(ScanTarget::QuantumG).argmax_index();
  const std::size_t ie = scan.curve(ScanTarget::EffectiveMultiparam).argmax_index();
  const auto& fq = scan.curve(ScanTarget::QuantumG).f_max;
  const auto& fe = scan.curve(ScanTarget::EffectiveMultiparam).f_max;
  report(5, "criticality peak", iq == nearest && ie == nearest,
         fmt::format("N = 50, quadrature, 101 points on [0.5, 1.5]: argmax QFI at beta/beta_c = "
                     "{:.4g} (F = {:.6g}; F at 1 = {:.6g}), argmax F_eff at {:.4g} (F_eff = "
                     "{:.6g}; at 1 = {:.6g}); required {:.4g}",
                     grid[iq], fq[iq], fq[nearest], grid[ie], fe[ie], fe[nearest], grid[nearest]));

  std::vector<std::string> lines;
  double mu = std::nan(""), nu = std::nan("");
  for (ScanTarget target : {ScanTarget::ClassicalG, ScanTarget::QuantumG}) {
    const char* name = target == ScanTarget::QuantumG ? "quantum" : "classical";
    for (auto [branch, window] : {std::pair{Phase::Normal, kNormalWindow},
                                  std::pair{Phase::Superradiant, kSuperradiantWindow}}) {
      try {
        const PowerLawFit fit = fit_power_law(grid, scan.curve(target).f_max, branch, window);
        lines.push_back(fmt::format("{} {} = {:.4g} on [{}, {}] ({} points, rms {:.3g})", name,
                                    branch == Phase::Normal ? "mu" : "nu", fit.exponent, window.lo,
                                    window.hi, fit.points, fit.rms_residual));
        if (target == ScanTarget::QuantumG) (branch == Phase::Normal ? mu : nu) = fit.exponent;
      } catch (const Error& e) {
        lines.push_back(fmt::format("{} fit unavailable: {}", name, e.what()));
      }
    }
  }
  const bool ok = nu > mu && mu >= 5.0 && mu <= 15.0 && nu >= 30.0 && nu <= 150.0;
  std::string detail = fmt::format("quantum mu = {:.4g} (need [5, 15]), nu = {:.4g} (need [30, "
                                   "150]), nu > mu required",
                                   mu, nu);
  for (const auto& l : lines) detail += "; " + l;
  report(6, "power-law branch asymmetry", ok, detail);
}

// 7. probe-number scaling at beta_c
void scaling() {
  const ProbeParams pp{1.5, 1e-3, {}};
  const std::vector<int> ns = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const DickeParams p = reference_params();
  const ScalingFit unc = scaling_fit(p, pp, ns, EnsembleKind::Uncorrelated, 0.5);
  const ScalingFit ghz = scaling_fit(p, pp, ns, EnsembleKind::GHZ, 0.5);
  const ScalingFit wer = scaling_fit(p, pp, ns, EnsembleKind::Werner, 0.5);
  bool ordered = true;
  int first_bad = 0;
  for (std::size_t i = 1; i < ns.size(); ++i) {
    if (!(ghz.values[i] > wer.values[i] && wer.values[i] > unc.values[i])) {
      if (ordered) first_bad = ns[i];
      ordered = false;
    }
  }
  const bool linear_unc = std::abs(unc.r2 - 1.0) <= 1e-12;
  const bool ok = linear_unc && ghz.r2 > 0.99 && wer.r2 > 0.99 && ordered;
  report(7, "probe-number scaling", ok,
         fmt::format("R2 unc = {:.15g}, GHZ = {:.6g}, Werner = {:.6g} (through origin; centered "
                     "{:.4g}, {:.4g}); slopes unc = {:.6g}, GHZ = {:.6g}, Werner = {:.6g}; "
                     "ordering GHZ > W > unc for N >= 2: {}; N = 10 values unc = {:.6g}, GHZ = "
                     "{:.6g}, Werner = {:.6g}",
                     unc.r2, ghz.r2, wer.r2, ghz.r2_centered, wer.r2_centered, unc.slope,
                     ghz.slope, wer.slope,
                     ordered ? std::string("holds") : fmt::format("fails from N = {}", first_bad),
                     unc.values.back(), ghz.values.back(), wer.values.back()));
}

// 8. hierarchy, analytic derivatives against finite differences, Werner form
void hierarchy_and_derivatives() {
  const ProbeParams pp{1.5, 0.1, {}};
  double hierarchy_worst = 0.0;
  int sampled = 0;
  for (int k = 0; k <= 20; ++k) {
    const double r = 0.5 + 0.05 * k;
    for (MomentMethod method : {MomentMethod::Quadrature, MomentMethod::ClosedForm}) {
      const PhotonMoments m = moment_derivatives(at_ratio(r), method);
      const double tm = default_t_max(pp, m);
      for (int i = 0; i <= 200; ++i) {
        const double t = tm * i / 200.0;
        const double q = quantum_fi_g(pp, m, t);
        const double f = classical_fi_g(pp, m, t);
        if (q > 0.0) hierarchy_worst = std::max(hierarchy_worst, (f - q) / q);
        if (q == 0.0 && f > 0.0) hierarchy_worst = std::max(hierarchy_worst, 1.0);
        ++sampled;
      }
    }
  }
  const bool hierarchy = hierarchy_worst <= 1e-12;

  // central differences with step 1e-5 of the parameter
  double deriv_worst = 0.0;
  for (double r : {0.6, 0.8, 1.2, 1.5, 2.0}) {
    const DickeParams p = at_ratio(r);
    const double hg = 1e-5 * p.g, ho = 1e-5 * p.omega;
    if (r > 1.0) {
      const Z0SquaredGradient grad = z0_squared_gradient(p);
      const auto z2 = [](const DickeParams& q) {
        const double z = solve_order_parameter(q).z0;
        return z * z;
      };
      const double fd_g = (z2(p.with_g(p.g + hg)) - z2(p.with_g(p.g - hg))) / (2.0 * hg);
      const double fd_o =
          (z2(p.with_omega(p.omega + ho)) - z2(p.with_omega(p.omega - ho))) / (2.0 * ho);
      deriv_worst = std::max({deriv_worst, rel(grad.dg, fd_g), rel(grad.domega, fd_o)});
    }
    const PhotonMoments a = moment_derivatives(p, MomentMethod::ClosedForm);
    const auto moment = [](const DickeParams& q, int k) { return photon_moment_closed(q, k); };
    for (int k : {1, 2}) {
      const double fd_g =
          (moment(p.with_g(p.g + hg), k) - moment(p.with_g(p.g - hg), k)) / (2.0 * hg);
      const double fd_o =
          (moment(p.with_omega(p.omega + ho), k) - moment(p.with_omega(p.omega - ho), k)) /
          (2.0 * ho);
      deriv_worst = std::max(deriv_worst, rel(k == 1 ? a.dg_n : a.dg_n2, fd_g));
      deriv_worst = std::max(deriv_worst, rel(k == 1 ? a.dom_n : a.dom_n2, fd_o));
    }
    if (r > 1.0) {
      for (double t : {0.05, 0.1, 0.2}) {
        const auto r_at = [&](double g) {
          return bloch_derivative_g(pp, moment_derivatives(p.with_g(g), MomentMethod::ClosedForm),
                                    t)
              .r;
        };
        const Eigen::Vector3d fd = (r_at(p.g + hg) - r_at(p.g - hg)) / (2.0 * hg);
        const Eigen::Vector3d dr = bloch_derivative_g(pp, a, t).dr;
        deriv_worst = std::max(deriv_worst, (fd - dr).norm() / dr.norm());
      }
    }
  }
  const bool derivatives = deriv_worst <= 1e-6;

  const PhotonMoments m = moment_derivatives(at_ratio(1.0), MomentMethod::Quadrature);
  const TimeMaximum best = maximize_over_time(
      [&](double t) { return werner_qfi(pp, m, t, 12, 0.5); }, default_t_max(pp, m, 12));
  const double exact = werner_qfi(pp, m, best.t_opt, 12, 0.5);
  const double asym = werner_qfi(pp, m, best.t_opt, 12, 0.5, WernerMode::Asymptotic);
  const double werner_gap = std::abs(exact - asym) / exact;

  report(8, "hierarchy and derivative suites",
         hierarchy && derivatives && werner_gap <= 0.01,
         fmt::format("F <= Q over {} samples (worst (F-Q)/Q = {:.3g}); derivatives worst relative "
                     "deviation from finite differences {:.3g} (tol 1e-6); Werner asymptotic vs "
                     "exact at N = 12, w = 0.5, t_opt = {:.6g}: {:.3g} (tol 0.01)",
                     sampled, hierarchy_worst, deriv_worst, best.t_opt, werner_gap));
}

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::vector<double> numeric(const std::string& name) const {
    const auto k = std::find(header.begin(), header.end(), name) - header.begin();
    std::vector<double> v;
    for (const auto& row : rows) v.push_back(std::stod(row.at(k)));
    return v;
  }
};

Csv parse_csv(const std::string& text) {
  Csv csv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (csv.header.empty()) {
      csv.header = cells;
    } else {
      csv.rows.push_back(cells);
    }
  }
  return csv;
}

// 9. thermo CSV reproduces the structure of the phase diagram
void thermo_structure() {
  cli::RunConfig cfg;
  cfg.command = cli::Command::Thermo;
  cfg.method = MethodSelector::Closed;
  cfg.validate();
  const Csv csv = parse_csv(cli::cmd_thermo(cfg).front().render());
  const auto r = csv.numeric("beta_ratio");
  const auto z0 = csv.numeric("z0");
  const auto jz = csv.numeric("j_z");
  const auto n1 = csv.numeric("n_mean");
  const auto n2 = csv.numeric("n2_mean");

  bool z0_ok = true;
  std::size_t c = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i] < 1.0 && z0[i] != 0.0) z0_ok = false;
    if (r[i] > 1.0 && !(z0[i] > 0.0)) z0_ok = false;
    if (std::abs(r[i] - 1.0) < std::abs(r[c] - 1.0)) c = i;
  }
  // one-sided slopes at beta_c from the two neighbouring rows
  const auto kink = [&](const std::vector<double>& y) {
    const double left = (y[c] - y[c - 1]) / (r[c] - r[c - 1]);
    const double right = (y[c + 1] - y[c]) / (r[c + 1] - r[c]);
    return std::pair{left, right};
  };
  const auto [jl, jr] = kink(jz);
  const auto [nl, nr] = kink(n1);
  const auto [ml, mr] = kink(n2);
  // j_z falls with beta below beta_c and is pinned above it; the photon
  // moments pick up the N z0^2 growth above beta_c
  const bool jz_kink = jl < 0.0 && std::abs(jr) < 1e-6 * std::abs(jl);
  const bool n_kink = nr - nl > 0.5 * std::abs(nl) && mr - ml > 0.5 * std::abs(ml);

  double moment_worst = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const DickeParams p = at_ratio(r[i]);
    moment_worst = std::max({moment_worst, rel(n1[i], photon_moment_closed(p, 1)),
                             rel(n2[i], photon_moment_closed(p, 2))});
  }
  const bool values = moment_worst < 1e-9;

  report(9, "thermo structure", z0_ok && jz_kink && n_kink && values,
         fmt::format("z0 = 0 below and > 0 above beta_c: {}; j_z slopes at beta_c {:.4g} | {:.4g}; "
                     "<n> slopes {:.4g} | {:.4g}; <n^2> slopes {:.4g} | {:.4g}; CSV vs closed-form "
                     "moments worst relative {:.3g}",
                     z0_ok ? "yes" : "no", jl, jr, nl, nr, ml, mr, moment_worst));
}

template <class F>
void guarded(int id, const char* name, F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    report(id, name, false, std::string("threw: ") + e.what());
  }
}

}  // namespace

int main() {
  guarded(1, "critical temperature", critical_temperature);
  guarded(2, "order-parameter asymptote", order_parameter_asymptote);
  guarded(3, "oracle equivalence", oracle_equivalence);
  guarded(4, "decoherence-factor oracle", decoherence_oracle);
  guarded(5, "criticality peak", criticality_and_exponents);
  guarded(7, "probe-number scaling", scaling);
  guarded(8, "hierarchy and derivative suites", hierarchy_and_derivatives);
  guarded(9, "thermo structure", thermo_structure);
  fmt::print("{} criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
