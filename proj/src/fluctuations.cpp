#include "spectre/fluctuations.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spectre/errors.hpp"

namespace spectre {
namespace {

Eigen::VectorXd descending_eigenvalues(const Eigen::MatrixXcd& M, double scale) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M, Eigen::EigenvaluesOnly);
  Eigen::VectorXd ev = es.eigenvalues().reverse() * scale;
  if (scale < 0) ev = ev.reverse().eval();
  return ev;
}

}  // namespace

FluctuationParams fluct_params(const EquilibriumContext& ctx, double p, double kappa) {
  FluctuationParams f;
  f.p = p;
  f.kappa = kappa;
  f.rho = spike_location(ctx, p);
  const double c = ctx.c();
  const double m = m_of_x(ctx, f.rho);
  const auto mo = ctx.moments(m);
  const double d = 1.0 - c * m * m * mo.t2_inv2;
  f.m = m;
  f.delta = d;
  // int (t^2 + 2 p t)/(1+cmt)^2 + c (int p m t/(1+cmt)^2)^2
  const double cross = p * m * mo.t_inv2;
  f.alpha = m * m / d * (mo.t2_inv2 + 2.0 * p * mo.t_inv2 + c * cross * cross);
  f.beta = p * p * m * m * mo.inv2;
  const double lin = p * m * mo.inv1;
  f.phi = lin * lin;
  f.psi_breve = f.alpha + f.beta;
  f.psi = f.psi_breve + kappa * f.phi;
  const double mp = m * m / d;
  f.g_prime_at_rho = c * m * m + 2.0 * f.rho * c * m * mp - (1.0 - c) * mp;
  return f;
}

double eigenvalue_variance(const FluctuationParams& f) {
  const double s = f.p * f.g_prime_at_rho;
  return f.psi / (s * s);
}

double power_variance(const FluctuationParams& f) { return f.p * f.p * f.psi; }

double predicted_nmse(const FluctuationParams& f, std::size_t T) {
  return f.psi / static_cast<double>(T);
}

Eigen::MatrixXcd sample_fluct_matrix(const FluctuationParams& f, int j, Rng& rng) {
  if (j < 1) throw DomainError("sample_fluct_matrix: j must be >= 1");
  Eigen::MatrixXcd M(j, j);
  std::normal_distribution<double> diag(0.0, std::sqrt(std::max(f.psi, 0.0)));
  for (int r = 0; r < j; ++r) {
    M(r, r) = diag(rng);
    for (int s = r + 1; s < j; ++s) {
      M(r, s) = complex_normal(rng, f.psi_breve);
      M(s, r) = std::conj(M(r, s));
    }
  }
  return M;
}

Eigen::VectorXd sample_eigenvalue_fluctuations(const FluctuationParams& f, int j, Rng& rng) {
  return descending_eigenvalues(sample_fluct_matrix(f, j, rng), 1.0 / (f.p * f.g_prime_at_rho));
}

Eigen::VectorXd sample_power_fluctuations(const FluctuationParams& f, int j, Rng& rng) {
  return descending_eigenvalues(sample_fluct_matrix(f, j, rng), f.p);
}

double snr_gap(const ArmaSpec& noise) {
  if (noise.is_white()) return 0.0;
  const std::size_t M = noise.quad_points();
  const double h = 1.0 / static_cast<double>(M);
  double s_q = 0.0, s_inv = 0.0, q_max = 0.0, q_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < M; ++i) {
    const double q = spectral_density(noise, static_cast<double>(i) * h);
    q_max = std::max(q_max, q);
    q_min = std::min(q_min, q);
    s_q += q;
    s_inv += 1.0 / q;
  }
  const NuQuadrature nu = build_nu(noise);
  if (!(q_min > 0.0) || !(nu.a_nu > 1e-12 * nu.b_nu))
    throw DomainError("snr_gap: spectral density touches zero; the inverse integral diverges");
  return 10.0 * std::log10(s_q * h * s_inv * h);
}

}  // namespace spectre
