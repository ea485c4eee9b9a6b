#include "critmet/fisher.hpp"

#include <cmath>
#include <limits>

#include "critmet/error.hpp"
#include "critmet/numerics.hpp"

namespace critmet {

namespace {

// Phase phi = omega_s t + 2 lambda t <n> and decay x = lambda^2 t^2 <n^2>
// of ln L = -i phi - x, with their g-derivatives.
struct Encoding {
  double phi = 0.0;
  double x = 0.0;
  double dphi = 0.0;
  double dx = 0.0;
};

Encoding encoding_g(const ProbeParams& pp, const PhotonMoments& m, double t) {
  const double lt = pp.lambda * t;
  return {pp.omega_s * t + 2.0 * lt * m.n_mean, lt * lt * m.n2_mean, 2.0 * lt * m.dg_n,
          lt * lt * m.dg_n2};
}

// lambda^2 t^2 [coth(n x) - 1], finite as t -> 0.
double coth_term(const ProbeParams& pp, const PhotonMoments& m, double t, int n_probes) {
  const double lt2 = pp.lambda * pp.lambda * t * t;
  if (lt2 == 0.0) return 0.0;
  const double tail = numerics::coth_minus_one(n_probes * lt2 * m.n2_mean);
  return tail == 0.0 ? 0.0 : lt2 * tail;
}

}  // namespace

ClassicalFi classical_fi_from_distribution(std::span<const double> probs,
                                           std::span<const double> dprobs) {
  if (probs.size() != dprobs.size()) {
    throw Error(Errc::InvalidParams, "probabilities and derivatives differ in length");
  }
  double total = 0.0;
  for (double p : probs) {
    if (p < 0.0) throw Error(Errc::InvalidParams, "negative probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw Error(Errc::InvalidParams, "probabilities do not sum to 1");
  }
  ClassicalFi fi;
  for (std::size_t u = 0; u < probs.size(); ++u) {
    if (probs[u] < 1e-300) {
      if (std::abs(dprobs[u]) < 1e-150) continue;
      fi.divergent = true;
      fi.value = std::numeric_limits<double>::infinity();
      return fi;
    }
    fi.value += dprobs[u] * dprobs[u] / probs[u];
  }
  return fi;
}

double bloch_qfi(const Eigen::Vector3d& r, const Eigen::Vector3d& dr) {
  const double purity_gap = 1.0 - r.squaredNorm();
  const double overlap = r.dot(dr);
  if (purity_gap < 1e-12) {
    if (std::abs(overlap) < 1e-8) return dr.squaredNorm();
    throw Error(Errc::SingularBloch, "pure state with r.dr != 0");
  }
  return dr.squaredNorm() + overlap * overlap / purity_gap;
}

double spectral_qfi(const Eigen::VectorXd& eigvals, const Eigen::VectorXd& deig,
                    const Eigen::MatrixXcd& vecs, const Eigen::MatrixXcd& dvecs) {
  const Eigen::Index n = eigvals.size();
  if (deig.size() != n || vecs.cols() != n || dvecs.cols() != n || vecs.rows() != dvecs.rows()) {
    throw Error(Errc::InvalidParams, "inconsistent spectral data");
  }
  if (n > 0 && eigvals.minCoeff() < -1e-14) {
    throw Error(Errc::InvalidParams, "negative eigenvalue in spectral QFI");
  }
  const double cut = 1e-14;
  double f = 0.0;
  for (Eigen::Index l = 0; l < n; ++l) {
    const double p = eigvals(l);
    if (p >= cut) f += deig(l) * deig(l) / p;
  }
  if (vecs.rows() == n) {
    // complete basis: the diagonal gauge terms cancel exactly, leaving
    // 2 sum_{k != l} (p_k - p_l)^2 / (p_k + p_l) |<k|dl>|^2
    for (Eigen::Index l = 0; l < n; ++l) {
      for (Eigen::Index k = 0; k < n; ++k) {
        const double s = eigvals(l) + eigvals(k);
        if (k == l || s < cut) continue;
        const double d = eigvals(l) - eigvals(k);
        if (d == 0.0) continue;
        f += 2.0 * d * d / s * std::norm(vecs.col(k).dot(dvecs.col(l)));
      }
    }
    return f;
  }
  for (Eigen::Index l = 0; l < n; ++l) f += 4.0 * eigvals(l) * dvecs.col(l).squaredNorm();
  for (Eigen::Index l = 0; l < n; ++l) {
    for (Eigen::Index k = 0; k < n; ++k) {
      const double s = eigvals(l) + eigvals(k);
      if (s < cut) continue;
      const double overlap = std::norm(dvecs.col(l).dot(vecs.col(k)));
      f -= 8.0 * eigvals(l) * eigvals(k) / s * overlap;
    }
  }
  return f;
}

SigmaXOutcomes sigma_x_outcomes(const ProbeParams& pp, const PhotonMoments& m, double t) {
  const Encoding e = encoding_g(pp, m, t);
  const double envelope = std::exp(-e.x);
  const double c = std::cos(e.phi);
  const double s = std::sin(e.phi);
  const double dc = -0.5 * envelope * (s * e.dphi + c * e.dx);
  SigmaXOutcomes out;
  out.probs = {0.5 + 0.5 * c * envelope, 0.5 - 0.5 * c * envelope};
  out.dprobs = {dc, -dc};
  return out;
}

double classical_fi_g(const ProbeParams& pp, const PhotonMoments& m, double t) {
  if (t == 0.0) return 0.0;
  const Encoding e = encoding_g(pp, m, t);
  const double lt = pp.lambda * t;
  const double c = std::cos(e.phi);
  const double s = std::sin(e.phi);
  const double damp = std::exp(-2.0 * e.x);
  if (damp == 0.0) return 0.0;
  // 1 - cos^2 e^{-2x} written without cancellation
  const double denom = s * s - c * c * std::expm1(-2.0 * e.x);
  if (denom <= 0.0) return 0.0;
  const double bracket = 2.0 * m.dg_n * s + lt * m.dg_n2 * c;
  return lt * lt * damp * bracket * bracket / denom;
}

double ghz_qfi(const ProbeParams& pp, const PhotonMoments& m, double t, int n_probes) {
  if (n_probes < 1) throw Error(Errc::InvalidParams, "n_probes must be >= 1");
  const double lt2 = pp.lambda * pp.lambda * t * t;
  const double n = static_cast<double>(n_probes);
  const double damp = std::exp(-2.0 * n * lt2 * m.n2_mean);
  const double coth = coth_term(pp, m, t, n_probes);
  const double first = damp == 0.0 ? 0.0 : 0.5 * n * n * lt2 * 8.0 * m.dg_n * m.dg_n * damp;
  const double second = coth == 0.0 ? 0.0 : 0.5 * n * n * lt2 * m.dg_n2 * m.dg_n2 * coth;
  return first + second;
}

double quantum_fi_g(const ProbeParams& pp, const PhotonMoments& m, double t) {
  return ghz_qfi(pp, m, t, 1);
}

double uncorrelated_qfi(const ProbeParams& pp, const PhotonMoments& m, double t, int n_probes) {
  if (n_probes < 1) throw Error(Errc::InvalidParams, "n_probes must be >= 1");
  return n_probes * quantum_fi_g(pp, m, t);
}

double werner_qfi(const ProbeParams& pp, const PhotonMoments& m, double t, int n_probes, double w,
                  WernerMode mode) {
  if (mode == WernerMode::Asymptotic) {
    if (!(w >= 0.0 && w <= 1.0)) throw Error(Errc::InvalidParams, "admixture w must be in [0, 1]");
    return (1.0 - w) * ghz_qfi(pp, m, t, n_probes);
  }
  const WernerBlock block = werner_block(pp, m, t, n_probes, w);
  const Encoding e = encoding_g(pp, m, t);
  const double n = static_cast<double>(n_probes);
  const double modulus = std::abs(block.off_diagonal);
  const double dmodulus = modulus == 0.0 ? 0.0 : -n * e.dx * modulus;
  const double dpsi = modulus == 0.0 ? 0.0 : -n * e.dphi;
  const Complex rotor = std::polar(1.0, -std::arg(block.off_diagonal));
  const double h = 1.0 / std::sqrt(2.0);
  const Complex i{0.0, 1.0};

  Eigen::Vector2d eig(block.diagonal + modulus, block.diagonal - modulus);
  Eigen::Vector2d deig(dmodulus, -dmodulus);
  Eigen::Matrix2cd vecs;
  vecs << h, h, h * rotor, -h * rotor;
  Eigen::Matrix2cd dvecs;
  dvecs << 0.0, 0.0, -i * dpsi * h * rotor, i * dpsi * h * rotor;
  return spectral_qfi(eig, deig, vecs, dvecs);
}

BlochDerivative bloch_derivative_g(const ProbeParams& pp, const PhotonMoments& m, double t,
                                   int n_probes) {
  const Encoding e = encoding_g(pp, m, t);
  const double n = static_cast<double>(n_probes);
  const double amp = std::exp(-n * e.x);
  const double c = std::cos(n * e.phi);
  const double s = std::sin(n * e.phi);
  BlochDerivative b;
  b.r = Eigen::Vector3d(amp * c, amp * s, 0.0);
  if (amp == 0.0) {
    b.dr.setZero();
    return b;
  }
  b.dr = n * amp * Eigen::Vector3d(-e.dx * c - e.dphi * s, -e.dx * s + e.dphi * c, 0.0);
  return b;
}

FisherMatrix fisher_matrix(const ProbeParams& pp, const PhotonMoments& m, double t) {
  FisherMatrix fm;
  const double lt2 = pp.lambda * pp.lambda * t * t;
  const Eigen::Vector2d dn(m.dom_n, m.dg_n);
  const Eigen::Vector2d dn2(m.dom_n2, m.dg_n2);
  const double damp = std::exp(-2.0 * lt2 * m.n2_mean);
  const double coth = coth_term(pp, m, t, 1);
  fm.f.setZero();
  if (damp > 0.0) fm.f += 0.5 * lt2 * 8.0 * damp * dn * dn.transpose();
  if (coth > 0.0) fm.f += 0.5 * lt2 * coth * dn2 * dn2.transpose();
  fm.f(1, 0) = fm.f(0, 1);
  const double tr = fm.trace();
  if (tr < 1e-300) {
    fm.degenerate = true;
    fm.effective = 0.0;
  } else {
    // Sum of two rank-one terms: Det = a b (u x v)^2, never negative.
    const double cross = dn(0) * dn2(1) - dn(1) * dn2(0);
    const double det =
        damp > 0.0 && coth > 0.0 ? 0.25 * lt2 * lt2 * 8.0 * damp * coth * cross * cross : 0.0;
    fm.effective = det / tr;
  }
  return fm;
}

FisherRecord fisher_record(const ProbeParams& pp, const PhotonMoments& m, double t) {
  return {t, classical_fi_g(pp, m, t), quantum_fi_g(pp, m, t)};
}

}  // namespace critmet
