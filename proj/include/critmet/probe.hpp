#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "critmet/dicke_thermo.hpp"

namespace critmet {

using Complex = std::complex<double>;

// Bare qubit and qubit-cavity parameters the effective probe is derived from.
struct RawProbeParams {
  double omega_q = 0.0;  // bare qubit frequency
  double g_qc = 0.0;     // qubit-cavity coupling
  double delta_q = 0.0;  // detuning
  double chi = 0.0;      // g_qc / delta_q
};

// Effective dephasing probe: H = omega_s sigma+ sigma- + H_D + lambda sigma_z n.
struct ProbeParams {
  double omega_s = 1.5;
  double lambda = 0.1;
  std::optional<RawProbeParams> raw;

  // Throws InvalidParams unless omega_s > 0 and lambda >= 0.
  void validate() const;

  // lambda/omega_s > 0.2: outside the weak-coupling regime of the closed-form
  // decoherence factor.
  bool weak_coupling_warning() const noexcept { return lambda > 0.2 * omega_s; }
  // Raw precursors present and either chi > 0.2 or delta_q/g_qc < 5.
  bool dispersive_warning() const noexcept;
};

// omega_s = omega_q + 3 g_qc^2/delta_q, lambda = omega chi^2 + 2 g_qc chi - omega_q chi^2.
// Throws InvalidRegime when delta_q <= 0 or other inputs are negative.
ProbeParams effective_probe_params(double omega_q, double g_qc, double delta_q, double omega);

struct DecoherenceFactor {
  Complex value{1.0, 0.0};

  double magnitude() const noexcept { return std::abs(value); }
  double phase() const noexcept { return std::arg(value); }
};

// ln L(t) = -i (omega_s + 2 lambda <n>) t - lambda^2 t^2 <n^2>.
Complex log_decoherence(const ProbeParams& pp, const PhotonMoments& m, double t);

// Weak-coupling decoherence factor exp(ln L(t)).
DecoherenceFactor decoherence_factor(const ProbeParams& pp, const PhotonMoments& m, double t);

// Bloch vector of the probe; the scheme always produces r_z = 0.
struct QubitState {
  double rx = 0.0;
  double ry = 0.0;
  double rz = 0.0;

  double norm() const noexcept { return std::sqrt(rx * rx + ry * ry + rz * rz); }
  Eigen::Matrix2cd density() const;
};

// Probe prepared in (|e> + |g>)/sqrt(2): r = (Re L, -Im L, 0).
QubitState reduced_state(const ProbeParams& pp, const PhotonMoments& m, double t);

// Off-diagonal of the GHZ output block in {|e..e>, |g..g>}: L(t)^n_probes.
Complex ghz_coherence(const ProbeParams& pp, const PhotonMoments& m, double t, int n_probes);

enum class EnsembleKind { Uncorrelated, GHZ, Werner };

struct EnsembleSpec {
  int n_probes = 1;
  EnsembleKind kind = EnsembleKind::Uncorrelated;
  std::optional<double> w;  // admixture, Werner only

  // Throws InvalidParams on n_probes < 1, a missing or out-of-range w for
  // Werner, or w given for another kind.
  void validate() const;
};

// Werner output state split as block (+) permutation part. The block lives in
// {|e..e>, |g..g>} and carries all g-dependence; the permutation part is
// diagonal, g-independent and represented only by its total weight.
struct WernerBlock {
  double diagonal = 0.0;        // both diagonal entries: w/2^n + (1-w)/2
  Complex off_diagonal{0.0, 0.0};  // (1-w)/2 L^n
  double residual_weight = 0.0;  // (2^n - 2) w / 2^n

  double trace() const noexcept { return 2.0 * diagonal; }
  Eigen::Matrix2cd matrix() const;
};

WernerBlock werner_block(const ProbeParams& pp, const PhotonMoments& m, double t, int n_probes,
                         double w);

// Computational basis states (bit i set = qubit i excited) of all distinct
// arrangements of n_excited |e> and n_ground |g> factors, ascending.
std::vector<std::uint64_t> permutation_states(int n_excited, int n_ground);

// Exact decoherence factor of the effective model on the full atomic tensor
// space times a truncated Fock space. Diagonalizes once; evaluate() is cheap.
class ExactDecoherence {
 public:
  struct Options {
    std::size_t max_dimension = 4096;
  };

  // Throws InvalidParams for N > 4, CutoffTooSmall when the thermal photon
  // tail beyond n_max exceeds 1e-10, DimensionTooLarge above the cap.
  ExactDecoherence(const DickeParams& p, const ProbeParams& pp, int n_max, Options options);
  ExactDecoherence(const DickeParams& p, const ProbeParams& pp, int n_max)
      : ExactDecoherence(p, pp, n_max, Options{}) {}

  DecoherenceFactor evaluate(double t) const;

  // <n> and <n^2> in the truncated Gibbs state.
  double n_mean() const noexcept { return n_mean_; }
  double n2_mean() const noexcept { return n2_mean_; }
  std::size_t dimension() const noexcept { return dimension_; }

 private:
  double omega_s_;
  std::size_t dimension_;
  double n_mean_ = 0.0;
  double n2_mean_ = 0.0;
  Eigen::VectorXd excited_energies_;
  Eigen::VectorXd ground_energies_;
  Eigen::MatrixXd weights_;  // C_ab of Tr(U_e rho U_g^dagger) = sum_ab C_ab e^{-i t (E_a - F_b)}
};

// Smallest n with thermal tail sum_{k>n} e^{-beta omega k}/sum_k e^{-beta omega k}
// below 1e-10, at least 64.
int fock_cutoff(double beta, double omega);

// Free-photon thermal weight beyond n_max: exp(-beta omega (n_max + 1)).
double thermal_tail_weight(double beta, double omega, int n_max);

DecoherenceFactor decoherence_factor_exact(const DickeParams& p, const ProbeParams& pp, double t,
                                           int n_max);

}  // namespace critmet
