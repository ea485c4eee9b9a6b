#include "critmet/probe.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "critmet/error.hpp"

namespace critmet {

void ProbeParams::validate() const {
  if (!(omega_s > 0.0) || !(lambda >= 0.0) || !std::isfinite(omega_s) || !std::isfinite(lambda)) {
    throw Error(Errc::InvalidParams, "probe requires omega_s > 0 and lambda >= 0");
  }
}

bool ProbeParams::dispersive_warning() const noexcept {
  if (!raw) return false;
  return raw->chi > 0.2 || (raw->g_qc > 0.0 && raw->delta_q / raw->g_qc < 5.0);
}

ProbeParams effective_probe_params(double omega_q, double g_qc, double delta_q, double omega) {
  if (!(delta_q > 0.0)) throw Error(Errc::InvalidRegime, "detuning delta_q must be positive");
  if (!(omega_q > 0.0) || !(g_qc >= 0.0) || !(omega > 0.0)) {
    throw Error(Errc::InvalidRegime, "omega_q, omega must be positive and g_qc non-negative");
  }
  const double chi = g_qc / delta_q;
  ProbeParams pp;
  pp.omega_s = omega_q + 3.0 * g_qc * g_qc / delta_q;
  pp.lambda = omega * chi * chi + 2.0 * g_qc * chi - omega_q * chi * chi;
  pp.raw = RawProbeParams{omega_q, g_qc, delta_q, chi};
  return pp;
}

Complex log_decoherence(const ProbeParams& pp, const PhotonMoments& m, double t) {
  const double phase = (pp.omega_s + 2.0 * pp.lambda * m.n_mean) * t;
  const double decay = pp.lambda * pp.lambda * t * t * m.n2_mean;
  return {-decay, -phase};
}

DecoherenceFactor decoherence_factor(const ProbeParams& pp, const PhotonMoments& m, double t) {
  return {std::exp(log_decoherence(pp, m, t))};
}

Eigen::Matrix2cd QubitState::density() const {
  Eigen::Matrix2cd rho;
  rho << Complex(1.0 + rz, 0.0), Complex(rx, -ry), Complex(rx, ry), Complex(1.0 - rz, 0.0);
  return 0.5 * rho;
}

QubitState reduced_state(const ProbeParams& pp, const PhotonMoments& m, double t) {
  const Complex l = decoherence_factor(pp, m, t).value;
  return {l.real(), -l.imag(), 0.0};
}

Complex ghz_coherence(const ProbeParams& pp, const PhotonMoments& m, double t, int n_probes) {
  return std::exp(static_cast<double>(n_probes) * log_decoherence(pp, m, t));
}

void EnsembleSpec::validate() const {
  if (n_probes < 1) throw Error(Errc::InvalidParams, "ensemble needs at least one probe");
  if (kind == EnsembleKind::Werner) {
    if (!w) throw Error(Errc::InvalidParams, "Werner ensemble requires the admixture w");
    if (!(*w >= 0.0 && *w <= 1.0)) throw Error(Errc::InvalidParams, "admixture w must be in [0, 1]");
  } else if (w) {
    throw Error(Errc::InvalidParams, "admixture w applies to Werner ensembles only");
  }
}

Eigen::Matrix2cd WernerBlock::matrix() const {
  Eigen::Matrix2cd m;
  m << Complex(diagonal, 0.0), off_diagonal, std::conj(off_diagonal), Complex(diagonal, 0.0);
  return m;
}

WernerBlock werner_block(const ProbeParams& pp, const PhotonMoments& m, double t, int n_probes,
                         double w) {
  if (n_probes < 1) throw Error(Errc::InvalidParams, "n_probes must be >= 1");
  if (!(w >= 0.0 && w <= 1.0)) throw Error(Errc::InvalidParams, "admixture w must be in [0, 1]");
  const double white = std::ldexp(w, -n_probes);  // w / 2^n
  WernerBlock block;
  block.diagonal = white + 0.5 * (1.0 - w);
  block.off_diagonal = 0.5 * (1.0 - w) * ghz_coherence(pp, m, t, n_probes);
  block.residual_weight = w - 2.0 * white;
  return block;
}

std::vector<std::uint64_t> permutation_states(int n_excited, int n_ground) {
  if (n_excited < 0 || n_ground < 0 || n_excited + n_ground > 62) {
    throw Error(Errc::InvalidParams, "permutation_states supports up to 62 qubits");
  }
  const int width = n_excited + n_ground;
  std::vector<std::uint64_t> states;
  if (n_excited == 0) return {0};
  const std::uint64_t limit = std::uint64_t{1} << width;
  // Gosper's hack: next integer with the same popcount.
  for (std::uint64_t v = (std::uint64_t{1} << n_excited) - 1; v < limit;) {
    states.push_back(v);
    const std::uint64_t c = v & (~v + 1);
    const std::uint64_t r = v + c;
    v = (((r ^ v) >> 2) / c) | r;
  }
  return states;
}

namespace {
const double kTailTolerance = 1e-10;
}

double thermal_tail_weight(double beta, double omega, int n_max) {
  return std::exp(-beta * omega * (n_max + 1.0));
}

int fock_cutoff(double beta, double omega) {
  int n = 64;
  const double estimate = std::ceil(-std::log(kTailTolerance) / (beta * omega)) - 1.0;
  if (estimate > n) n = static_cast<int>(estimate);
  while (thermal_tail_weight(beta, omega, n) >= kTailTolerance) ++n;
  while (n > 64 && thermal_tail_weight(beta, omega, n - 1) < kTailTolerance) --n;
  return n;
}

ExactDecoherence::ExactDecoherence(const DickeParams& p, const ProbeParams& pp, int n_max,
                                   Options options)
    : omega_s_(pp.omega_s) {
  p.validate();
  pp.validate();
  if (p.n_atoms > 4) throw Error(Errc::InvalidParams, "exact oracle supports at most 4 atoms");
  if (n_max < 1) throw Error(Errc::InvalidParams, "photon cutoff must be >= 1");
  const double tail = thermal_tail_weight(p.beta, p.omega, n_max);
  if (tail >= kTailTolerance) {
    throw Error(Errc::CutoffTooSmall,
                "thermal photon tail " + std::to_string(tail) + " beyond n_max exceeds 1e-10");
  }
  const std::size_t fock = static_cast<std::size_t>(n_max) + 1;
  const std::size_t spins = std::size_t{1} << p.n_atoms;
  dimension_ = spins * fock;
  if (dimension_ > options.max_dimension) {
    throw Error(Errc::DimensionTooLarge,
                "dimension " + std::to_string(dimension_) + " exceeds cap " +
                    std::to_string(options.max_dimension));
  }

  const double coupling = p.g / std::sqrt(static_cast<double>(p.n_atoms));
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dimension_, dimension_);
  Eigen::VectorXd photons(dimension_);
  for (std::size_t s = 0; s < spins; ++s) {
    const double jz = std::popcount(s) - 0.5 * p.n_atoms;
    for (std::size_t n = 0; n < fock; ++n) {
      const std::size_t row = s * fock + n;
      photons(row) = static_cast<double>(n);
      h(row, row) = p.epsilon * jz + p.omega * static_cast<double>(n);
      for (int i = 0; i < p.n_atoms; ++i) {
        const std::size_t flipped = s ^ (std::size_t{1} << i);
        if (n + 1 < fock) h(flipped * fock + n + 1, row) += coupling * std::sqrt(n + 1.0);
        if (n > 0) h(flipped * fock + n - 1, row) += coupling * std::sqrt(static_cast<double>(n));
      }
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> bare(h);
  const Eigen::VectorXd& energies = bare.eigenvalues();
  Eigen::VectorXd boltzmann = (-p.beta * (energies.array() - energies.minCoeff())).exp();
  boltzmann /= boltzmann.sum();
  const Eigen::MatrixXd rho =
      bare.eigenvectors() * boltzmann.asDiagonal() * bare.eigenvectors().transpose();

  const Eigen::VectorXd populations = rho.diagonal();
  n_mean_ = populations.dot(photons);
  n2_mean_ = populations.dot(photons.cwiseProduct(photons));

  Eigen::MatrixXd h_excited = h;
  Eigen::MatrixXd h_ground = h;
  h_excited.diagonal() += pp.lambda * photons;
  h_ground.diagonal() -= pp.lambda * photons;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> excited(h_excited);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ground(h_ground);
  excited_energies_ = excited.eigenvalues();
  ground_energies_ = ground.eigenvalues();

  const Eigen::MatrixXd a = excited.eigenvectors().transpose() * rho * ground.eigenvectors();
  const Eigen::MatrixXd b = ground.eigenvectors().transpose() * excited.eigenvectors();
  weights_ = a.cwiseProduct(b.transpose());
}

DecoherenceFactor ExactDecoherence::evaluate(double t) const {
  const std::size_t d = dimension_;
  Eigen::VectorXcd ground_phase(d), excited_phase(d);
  for (std::size_t i = 0; i < d; ++i) {
    ground_phase(i) = std::polar(1.0, t * ground_energies_(i));
    excited_phase(i) = std::polar(1.0, -t * excited_energies_(i));
  }
  const Eigen::VectorXcd mixed = weights_.cast<Complex>() * ground_phase;
  const Complex trace = excited_phase.cwiseProduct(mixed).sum();
  return {std::polar(1.0, -omega_s_ * t) * trace};
}

DecoherenceFactor decoherence_factor_exact(const DickeParams& p, const ProbeParams& pp, double t,
                                           int n_max) {
  return ExactDecoherence(p, pp, n_max).evaluate(t);
}

}  // namespace critmet
