#include "critmet/dicke_thermo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "critmet/error.hpp"
#include "critmet/numerics.hpp"

namespace critmet {

namespace {

constexpr double kResidualTol = 1e-12;
constexpr double kCriticalRelTol = 1e-12;
constexpr double kFiniteDiffStep = 1e-5;
// exp(N (Phi - Phi_max)) below this fraction of its peak is dropped.
const double kLogTruncation = std::log(1e-16);

double sech2(double x) {
  const double e = std::exp(-2.0 * std::abs(x));
  return 4.0 * e / ((1.0 + e) * (1.0 + e));
}

double binomial(int n, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

// C(gamma,k) Gamma(k+1/2) / sqrt(pi)
double moment_coefficient(int gamma, int k) {
  return binomial(gamma, k) * std::tgamma(k + 0.5) / std::sqrt(std::numbers::pi);
}

void require_gamma(int gamma) {
  if (gamma < 1) throw Error(Errc::InvalidParams, "photon moment order must be >= 1");
}

struct MomentSums {
  double value = 0.0;
  double dg = 0.0;
  double domega = 0.0;
};

// Binomial photon-moment sum given averages of z^{2m} and their derivatives.
MomentSums photon_moment_sum(const DickeParams& p, int gamma, const WeightedZMoments& z) {
  const double bw = p.beta * p.omega;
  const double n = p.n_atoms;
  MomentSums out;
  for (int k = 0; k <= gamma; ++k) {
    const int m = gamma - k;
    const double c = moment_coefficient(gamma, k) * std::pow(bw, -k) * std::pow(n, m);
    out.value += c * z.mean[m];
    out.dg += c * z.dg[m];
    out.domega += c * (z.domega[m] - k / p.omega * z.mean[m]);
  }
  return out;
}

PhotonMoments closed_form_moments(const DickeParams& p) {
  const auto sol = solve_order_parameter(p);
  const auto grad = z0_squared_gradient(p);
  const double z2 = sol.z0 * sol.z0;
  const double n = p.n_atoms;
  const double bw = p.beta * p.omega;

  PhotonMoments m;
  m.method = MomentMethod::ClosedForm;
  m.n_mean = 1.0 / (2.0 * bw) + n * z2;
  m.n2_mean = 3.0 / (4.0 * bw * bw) + n * z2 / bw + n * n * z2 * z2;
  m.dg_n = n * grad.dg;
  m.dg_n2 = n / bw * grad.dg + 2.0 * n * n * z2 * grad.dg;
  m.dom_n = -1.0 / (2.0 * p.beta * p.omega * p.omega) + n * grad.domega;
  m.dom_n2 = -3.0 / (2.0 * p.beta * p.beta * std::pow(p.omega, 3)) -
             n * z2 / (p.beta * p.omega * p.omega) + n / bw * grad.domega +
             2.0 * n * n * z2 * grad.domega;
  return m;
}

PhotonMoments finite_difference_moments(const DickeParams& p) {
  PhotonMoments m;
  m.method = MomentMethod::FiniteDifference;
  m.n_mean = photon_moment_closed(p, 1);
  m.n2_mean = photon_moment_closed(p, 2);

  const double hg = kFiniteDiffStep * p.g;
  const auto gp = p.with_g(p.g + hg);
  const auto gm = p.with_g(p.g - hg);
  m.dg_n = (photon_moment_closed(gp, 1) - photon_moment_closed(gm, 1)) / (2.0 * hg);
  m.dg_n2 = (photon_moment_closed(gp, 2) - photon_moment_closed(gm, 2)) / (2.0 * hg);

  const double ho = kFiniteDiffStep * p.omega;
  const auto op = p.with_omega(p.omega + ho);
  const auto om = p.with_omega(p.omega - ho);
  m.dom_n = (photon_moment_closed(op, 1) - photon_moment_closed(om, 1)) / (2.0 * ho);
  m.dom_n2 = (photon_moment_closed(op, 2) - photon_moment_closed(om, 2)) / (2.0 * ho);
  return m;
}

PhotonMoments quadrature_moments(const DickeParams& p) {
  const auto z = weighted_z_moments(p, 2);
  const auto first = photon_moment_sum(p, 1, z);
  const auto second = photon_moment_sum(p, 2, z);
  PhotonMoments m;
  m.method = MomentMethod::Quadrature;
  m.n_mean = first.value;
  m.n2_mean = second.value;
  m.dg_n = first.dg;
  m.dg_n2 = second.dg;
  m.dom_n = first.domega;
  m.dom_n2 = second.domega;
  return m;
}

}  // namespace

void DickeParams::validate() const {
  if (!(epsilon > 0.0) || !(omega > 0.0) || !(g > 0.0) || !(beta > 0.0) || n_atoms < 1 ||
      !std::isfinite(epsilon) || !std::isfinite(omega) || !std::isfinite(g) ||
      !std::isfinite(beta)) {
    throw Error(Errc::InvalidParams,
                "Dicke parameters require epsilon, omega, g, beta > 0 (finite) and N >= 1");
  }
}

DickeParams DickeParams::with_beta(double b) const noexcept {
  auto q = *this;
  q.beta = b;
  return q;
}

DickeParams DickeParams::with_g(double v) const noexcept {
  auto q = *this;
  q.g = v;
  return q;
}

DickeParams DickeParams::with_omega(double v) const noexcept {
  auto q = *this;
  q.omega = v;
  return q;
}

DickeParams reference_params() {
  DickeParams p;
  p.epsilon = 1.0;
  p.g = 0.3;
  p.omega = 4.0 * std::tanh(0.5 * p.epsilon) * p.g * p.g / p.epsilon;
  p.n_atoms = 50;
  p.beta = 1.0;
  return p;
}

std::string_view to_string(Phase phase) noexcept {
  return phase == Phase::Normal ? "normal" : "superradiant";
}

std::string_view to_string(MomentMethod method) noexcept {
  switch (method) {
    case MomentMethod::ClosedForm: return "closed";
    case MomentMethod::Quadrature: return "quadrature";
    case MomentMethod::FiniteDifference: return "finite_difference";
  }
  return "unknown";
}

double critical_beta(const DickeParams& p) {
  p.validate();
  const double ratio = p.coupling_ratio();
  if (!(ratio < 1.0)) {
    throw Error(Errc::NoTransition,
                "eps*omega/(4 g^2) = " + std::to_string(ratio) + " >= 1, no finite critical temperature");
  }
  return 2.0 / p.epsilon * std::atanh(ratio);
}

OrderParameterSolution solve_order_parameter(const DickeParams& p) {
  p.validate();
  OrderParameterSolution sol;
  if (!p.superradiant_capable()) return sol;

  const double beta_c = critical_beta(p);
  const double a = p.coupling_ratio();
  const auto gap = [&](double eta) { return a * eta - std::tanh(0.5 * p.beta * eta * p.epsilon); };

  if (std::abs(p.beta - beta_c) <= kCriticalRelTol * beta_c) {
    sol.phase = Phase::Superradiant;
    sol.eta = 1.0;
    sol.z0 = 0.0;
    sol.residual = std::abs(gap(1.0));
    return sol;
  }
  if (p.beta < beta_c) return sol;

  // gap is convex with gap(1) < 0 <= gap(1/a): a single root in between.
  const auto root = numerics::bisect(gap, 1.0, 1.0 / a, 200);
  sol.phase = Phase::Superradiant;
  sol.eta = root.x;
  sol.iterations = root.iterations;
  sol.residual = std::abs(gap(root.x));
  if (!(sol.residual <= kResidualTol)) {
    throw Error(Errc::NonConvergence,
                "gap equation residual " + std::to_string(sol.residual) + " above tolerance");
  }
  sol.z0 = p.epsilon * std::sqrt(sol.eta * sol.eta - 1.0) / (4.0 * p.g);
  return sol;
}

double phi(double z, const DickeParams& p) {
  const double s = std::sqrt(p.epsilon * p.epsilon + 16.0 * p.g * p.g * z * z);
  return -p.beta * p.omega * z * z + numerics::ln_2cosh(0.5 * p.beta * s);
}

double phi_second_derivative(double z, const DickeParams& p) {
  const double g2 = p.g * p.g;
  const double s = std::sqrt(p.epsilon * p.epsilon + 16.0 * g2 * z * z);
  const double ds = 16.0 * g2 * z / s;
  const double d2s = 16.0 * g2 * p.epsilon * p.epsilon / (s * s * s);
  const double x = 0.5 * p.beta * s;
  return -2.0 * p.beta * p.omega +
         0.5 * p.beta * (0.5 * p.beta * sech2(x) * ds * ds + std::tanh(x) * d2s);
}

double free_energy_per_atom(const DickeParams& p) {
  return phi(solve_order_parameter(p).z0, p);
}

double order_parameter_jz(const DickeParams& p) {
  const double z0 = solve_order_parameter(p).z0;
  const double s = std::sqrt(p.epsilon * p.epsilon + 16.0 * p.g * p.g * z0 * z0);
  return -p.epsilon / (2.0 * s) * std::tanh(0.5 * p.beta * s);
}

double photon_moment_closed(const DickeParams& p, int gamma) {
  require_gamma(gamma);
  const double z0 = solve_order_parameter(p).z0;
  const double nz2 = p.n_atoms * z0 * z0;
  const double bw = p.beta * p.omega;
  double sum = 0.0;
  for (int k = 0; k <= gamma; ++k) {
    sum += moment_coefficient(gamma, k) * std::pow(bw, -k) * std::pow(nz2, gamma - k);
  }
  return sum;
}

WeightedZMoments weighted_z_moments(const DickeParams& p, int max_power) {
  if (max_power < 0) throw Error(Errc::InvalidParams, "max_power must be >= 0");
  const auto sol = solve_order_parameter(p);
  const double z0 = sol.z0;
  const double n = p.n_atoms;
  const double phi0 = phi(z0, p);
  const auto level = [&](double z) { return n * (phi(z, p) - phi0); };

  // Phi decreases monotonically away from z0 on z > z0 (and on 0 < z < z0 in
  // the Superradiant phase), so each level is crossed once per side.
  const auto crossing = [&](double target, double from, double to) {
    return numerics::bisect([&](double z) { return level(z) - target; }, from, to).x;
  };

  double reach = std::max(0.5, z0);
  while (level(z0 + reach) > kLogTruncation) {
    reach *= 2.0;
    if (reach > 1e8) throw Error(Errc::QuadratureFailure, "weight does not decay");
  }
  const double z_max = crossing(kLogTruncation, z0, z0 + reach);

  std::vector<double> breaks{0.0, z_max};
  if (z0 > 0.0) breaks.push_back(z0);
  for (double lv : {-0.5, -4.5}) {
    breaks.push_back(crossing(lv, z0, z_max));
    if (z0 > 0.0 && level(0.0) < lv) breaks.push_back(crossing(lv, 0.0, z0));
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  const std::size_t powers = static_cast<std::size_t>(max_power) + 1;
  const auto integrand = [&](double z, std::span<double> out) {
    const double zz = z * z;
    const double s = std::sqrt(p.epsilon * p.epsilon + 16.0 * p.g * p.g * zz);
    const double w = std::exp(n * (-p.beta * p.omega * zz +
                                   numerics::ln_2cosh(0.5 * p.beta * s) - phi0));
    const double dphi_dg = 8.0 * p.beta * p.g * zz * std::tanh(0.5 * p.beta * s) / s;
    const double dphi_domega = -p.beta * zz;
    double pw = w;
    for (std::size_t m = 0; m < powers; ++m) {
      out[3 * m] = pw;
      out[3 * m + 1] = pw * dphi_dg;
      out[3 * m + 2] = pw * dphi_domega;
      pw *= zz;
    }
  };
  const auto integrals = numerics::adaptive_simpson(integrand, 3 * powers, breaks);

  const double norm = integrals[0];
  const double mean_dg = integrals[1] / norm;
  const double mean_domega = integrals[2] / norm;
  WeightedZMoments out;
  out.mean.resize(powers);
  out.dg.resize(powers);
  out.domega.resize(powers);
  for (std::size_t m = 0; m < powers; ++m) {
    out.mean[m] = integrals[3 * m] / norm;
    out.dg[m] = n * (integrals[3 * m + 1] / norm - out.mean[m] * mean_dg);
    out.domega[m] = n * (integrals[3 * m + 2] / norm - out.mean[m] * mean_domega);
  }
  out.mean[0] = 1.0;
  out.dg[0] = 0.0;
  out.domega[0] = 0.0;
  // The integrand is even; the integral ran over z >= 0 only.
  out.log_norm = n * phi0 + std::log(2.0 * norm);
  return out;
}

double photon_moment_quadrature(const DickeParams& p, int gamma) {
  require_gamma(gamma);
  return photon_moment_sum(p, gamma, weighted_z_moments(p, gamma)).value;
}

Z0SquaredGradient z0_squared_gradient(const DickeParams& p) {
  const auto sol = solve_order_parameter(p);
  if (sol.phase == Phase::Normal) return {};
  const double eta2 = sol.eta * sol.eta;
  const double g2 = p.g * p.g;
  const double eps2 = p.epsilon * p.epsilon;
  const double denom = p.omega - 2.0 * p.beta * g2 * sech2(0.5 * p.beta * sol.eta * p.epsilon);
  Z0SquaredGradient grad;
  grad.dg = eps2 / (4.0 * g2 * p.g) * (-(eta2 - 1.0) / 2.0 + p.omega * eta2 / denom);
  grad.domega = -eps2 * eta2 / (8.0 * g2 * denom);
  return grad;
}

PhotonMoments moment_derivatives(const DickeParams& p, MomentMethod method) {
  switch (method) {
    case MomentMethod::ClosedForm: return closed_form_moments(p);
    case MomentMethod::Quadrature: return quadrature_moments(p);
    case MomentMethod::FiniteDifference: return finite_difference_moments(p);
  }
  throw Error(Errc::InvalidParams, "unknown moment method");
}

double log_partition_laplace(const DickeParams& p) {
  const auto sol = solve_order_parameter(p);
  const double curvature = std::abs(phi_second_derivative(sol.z0, p));
  if (curvature < 1e-12) {
    throw Error(Errc::DegenerateCurvature, "|Phi''(z0)| below 1e-12, Laplace approximation undefined");
  }
  return 0.5 * std::log(2.0 / (p.beta * p.omega * curvature)) + p.n_atoms * phi(sol.z0, p);
}

double log_partition_quadrature(const DickeParams& p) {
  const auto z = weighted_z_moments(p, 0);
  return 0.5 * std::log(p.n_atoms / (std::numbers::pi * p.beta * p.omega)) + z.log_norm;
}

}  // namespace critmet
