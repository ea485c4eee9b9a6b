#pragma once

#include <string_view>
#include <vector>

namespace critmet {

// Dicke model with bath temperature. Units: hbar = k_B = 1, energies usually
// measured in units of epsilon.
struct DickeParams {
  double epsilon = 1.0;  // atomic transition frequency
  double omega = 1.0;    // cavity frequency
  double g = 0.5;        // atom-cavity coupling
  int n_atoms = 1;       // N
  double beta = 1.0;     // inverse temperature

  // Throws Error(InvalidParams) unless epsilon, omega, g, beta > 0 and N >= 1.
  void validate() const;

  // epsilon*omega / (4 g^2); a finite critical temperature exists iff < 1.
  double coupling_ratio() const noexcept { return epsilon * omega / (4.0 * g * g); }
  bool superradiant_capable() const noexcept { return coupling_ratio() < 1.0; }

  DickeParams with_beta(double b) const noexcept;
  DickeParams with_g(double v) const noexcept;
  DickeParams with_omega(double v) const noexcept;
};

// epsilon = 1, g = 0.3, omega = 4 tanh(1/2) g^2, N = 50, beta = beta_c = 1.
DickeParams reference_params();

enum class Phase { Normal, Superradiant };
std::string_view to_string(Phase phase) noexcept;

struct OrderParameterSolution {
  Phase phase = Phase::Normal;
  double eta = 0.0;       // root of the gap equation; 0 in the Normal phase
  double z0 = 0.0;        // saddle point of Phi
  double residual = 0.0;  // |(eps*omega/4g^2) eta - tanh(beta eta eps / 2)|
  int iterations = 0;
};

enum class MomentMethod { ClosedForm, Quadrature, FiniteDifference };
std::string_view to_string(MomentMethod method) noexcept;

// <n>, <n^2> and their partial derivatives with respect to g and omega.
struct PhotonMoments {
  double n_mean = 0.0;
  double n2_mean = 0.0;
  double dg_n = 0.0;
  double dg_n2 = 0.0;
  double dom_n = 0.0;
  double dom_n2 = 0.0;
  MomentMethod method = MomentMethod::ClosedForm;

  // n2_mean - n_mean^2; can be negative for ClosedForm when the saddle-point
  // moments are not self-consistent.
  double variance() const noexcept { return n2_mean - n_mean * n_mean; }
};

// beta_c = (2/eps) artanh(eps*omega / 4g^2). Throws NoTransition when the
// coupling is too weak for a superradiant phase.
double critical_beta(const DickeParams& p);

// Saddle point of Phi. Normal phase (beta < beta_c, or no transition) gives
// z0 = 0 exactly; beta == beta_c (to 1e-12 relative) gives eta = 1, z0 = 0
// labelled Superradiant; otherwise eta is bracketed on (1, 4g^2/(eps*omega))
// and bisected to full double precision.
OrderParameterSolution solve_order_parameter(const DickeParams& p);

// Phi(z) = -beta omega z^2 + ln[2 cosh(beta/2 sqrt(eps^2 + 16 g^2 z^2))].
double phi(double z, const DickeParams& p);
double phi_second_derivative(double z, const DickeParams& p);

// Free energy per atom as printed, f = Phi(z0). With the conventional
// f = -(1/(N beta)) ln Z the thermodynamic value is -Phi(z0)/beta; callers
// wanting that convention divide by -beta themselves.
double free_energy_per_atom(const DickeParams& p);

// <J_z>/N at the saddle point, in (-1/2, 0).
double order_parameter_jz(const DickeParams& p);

// Saddle-point photon moment <n^gamma>:
//   (1/sqrt(pi)) sum_k C(gamma,k) Gamma(k+1/2) (beta omega)^-k (N z0^2)^(gamma-k).
// gamma = 1 gives 1/(2 beta omega) + N z0^2 (the 1/2 is kept as published).
double photon_moment_closed(const DickeParams& p, int gamma);

// Finite-N photon moment: the same binomial sum with (z0^2)^m replaced by the
// average of z^{2m} against exp(N Phi(z)), integrated by adaptive Simpson.
double photon_moment_quadrature(const DickeParams& p, int gamma);

// <n>, <n^2> and their g/omega derivatives.
//   ClosedForm: saddle-point values with analytic derivatives of z0^2
//     (implicit differentiation of the gap equation).
//   Quadrature: finite-N averages; derivatives by differentiating the weight
//     (dPhi/dg, dPhi/domega inside the average).
//   FiniteDifference: closed-form values; derivatives by central differences
//     with h = 1e-5 * parameter. Serves as an independent check.
PhotonMoments moment_derivatives(const DickeParams& p, MomentMethod method);

// d(z0^2)/dg and d(z0^2)/domega from the gap equation. Both zero in the
// Normal phase.
struct Z0SquaredGradient {
  double dg = 0.0;
  double domega = 0.0;
};
Z0SquaredGradient z0_squared_gradient(const DickeParams& p);

// ln Z_D ~ 1/2 ln(2 / (beta omega |Phi''(z0)|)) + N Phi(z0). Throws
// DegenerateCurvature when |Phi''(z0)| < 1e-12 (flat top at beta_c).
double log_partition_laplace(const DickeParams& p);

// ln of sqrt(N/(pi beta omega)) * integral exp(N Phi(z)) dz over the real
// line, evaluated by adaptive quadrature.
double log_partition_quadrature(const DickeParams& p);

// Averages of z^{2m}, m = 0..max_power, against exp(N Phi(z)), together with
// their g and omega derivatives.
struct WeightedZMoments {
  std::vector<double> mean;    // <z^{2m}>, mean[0] == 1
  std::vector<double> dg;      // d<z^{2m}>/dg
  std::vector<double> domega;  // d<z^{2m}>/domega
  double log_norm = 0.0;       // ln of integral of exp(N Phi) over the real line
};
WeightedZMoments weighted_z_moments(const DickeParams& p, int max_power);

}  // namespace critmet
