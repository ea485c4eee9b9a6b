#pragma once

#include <array>
#include <span>

#include <Eigen/Dense>

#include "critmet/dicke_thermo.hpp"
#include "critmet/probe.hpp"

namespace critmet {

// Classical Fisher information of a fixed measurement. A vanishing
// probability with a finite derivative makes the FI diverge; that case is
// flagged rather than thrown so scans can carry on.
struct ClassicalFi {
  double value = 0.0;
  bool divergent = false;
};

// sum_u (dp_u)^2 / p_u. Throws InvalidParams on mismatched lengths, negative
// probabilities or a total differing from 1 by more than 1e-12.
ClassicalFi classical_fi_from_distribution(std::span<const double> probs,
                                           std::span<const double> dprobs);

// QFI of a qubit with Bloch vector r: |dr|^2 + (r.dr)^2 / (1 - |r|^2).
// Pure states (1 - |r|^2 < 1e-12) give |dr|^2 provided |r.dr| < 1e-8,
// otherwise SingularBloch.
double bloch_qfi(const Eigen::Vector3d& r, const Eigen::Vector3d& dr);

// QFI from a spectral decomposition; eigenvectors are the columns of vecs,
// their parameter derivatives the columns of dvecs. Sub-normalized spectra
// are accepted. Pairs with pi_l + pi_l' < 1e-14 are skipped. A square vecs
// is taken as a complete orthonormal basis and evaluated in the pairwise
// form, which stays accurate near degenerate eigenvalues.
double spectral_qfi(const Eigen::VectorXd& eigvals, const Eigen::VectorXd& deig,
                    const Eigen::MatrixXcd& vecs, const Eigen::MatrixXcd& dvecs);

// sigma_x measurement probabilities p(+|g), p(-|g) and their g-derivatives.
struct SigmaXOutcomes {
  std::array<double, 2> probs{};
  std::array<double, 2> dprobs{};
};
SigmaXOutcomes sigma_x_outcomes(const ProbeParams& pp, const PhotonMoments& m, double t);

// Closed-form classical FI of the sigma_x measurement.
double classical_fi_g(const ProbeParams& pp, const PhotonMoments& m, double t);

// Closed-form single-probe QFI for g.
double quantum_fi_g(const ProbeParams& pp, const PhotonMoments& m, double t);

// Closed-form QFI of an n-probe GHZ state; equals quantum_fi_g at n = 1.
double ghz_qfi(const ProbeParams& pp, const PhotonMoments& m, double t, int n_probes);

// n_probes * quantum_fi_g.
double uncorrelated_qfi(const ProbeParams& pp, const PhotonMoments& m, double t, int n_probes);

enum class WernerMode { Exact, Asymptotic };

// Exact: spectral QFI of the 2x2 {|e..e>, |g..g>} block, the permutation
// part being g-independent. Asymptotic: (1 - w) * ghz_qfi.
double werner_qfi(const ProbeParams& pp, const PhotonMoments& m, double t, int n_probes, double w,
                  WernerMode mode = WernerMode::Exact);

// Bloch vector of the single-probe state and its g-derivative.
struct BlochDerivative {
  Eigen::Vector3d r = Eigen::Vector3d::Zero();
  Eigen::Vector3d dr = Eigen::Vector3d::Zero();
};
// Coherence L^n_probes; n_probes = 1 is the single probe.
BlochDerivative bloch_derivative_g(const ProbeParams& pp, const PhotonMoments& m, double t,
                                   int n_probes = 1);

// Two-parameter QFI matrix over (omega, g) with identity weight.
struct FisherMatrix {
  Eigen::Matrix2d f = Eigen::Matrix2d::Zero();  // index 0 = omega, 1 = g
  double effective = 0.0;                       // Det / Tr
  bool degenerate = false;                      // Tr < 1e-300

  double trace() const noexcept { return f.trace(); }
  double determinant() const noexcept { return f.determinant(); }
};
FisherMatrix fisher_matrix(const ProbeParams& pp, const PhotonMoments& m, double t);

// One row of a time trace; units 1/g^2, one repetition.
struct FisherRecord {
  double t = 0.0;
  double f_classical = 0.0;
  double f_quantum = 0.0;
};
FisherRecord fisher_record(const ProbeParams& pp, const PhotonMoments& m, double t);

}  // namespace critmet
