#pragma once

#include <Eigen/Dense>

#include "spectre/equilibrium.hpp"
#include "spectre/rng.hpp"
#include "spectre/spectral_model.hpp"

namespace spectre {

/// Fourth-cumulant parameters: E|s|^4 - 2.
inline constexpr double kKappaQpsk = -1.0;
inline constexpr double kKappaGaussian = 0.0;

/// Second-order coefficients of an isolated spike of power p.
struct FluctuationParams {
  double alpha = 0;
  double beta = 0;
  double phi = 0;
  double kappa = 0;
  double psi = 0;        // alpha + beta + kappa phi
  double psi_breve = 0;  // alpha + beta
  double p = 0;
  double rho = 0;
  double g_prime_at_rho = 0;
  double m = 0;          // m(rho)
  double delta = 0;      // delta(rho)
};

/// Throws SubcriticalError for p <= p_lim.
FluctuationParams fluct_params(const EquilibriumContext& ctx, double p, double kappa);
/// Var of sqrt(T)(lambda - rho_T): psi / (p g'(rho))^2.
double eigenvalue_variance(const FluctuationParams& params);
/// Var of sqrt(T)(p_hat - p): p^2 psi.
double power_variance(const FluctuationParams& params);
/// psi / T
double predicted_nmse(const FluctuationParams& params, std::size_t T);

/// Hermitian j x j matrix: real N(0, psi) diagonal, CN(0, psi_breve) above it.
Eigen::MatrixXcd sample_fluct_matrix(const FluctuationParams& params, int j, Rng& rng);
/// Descending eigenvalues of M / (p g'(rho)) for a fresh sample M.
Eigen::VectorXd sample_eigenvalue_fluctuations(const FluctuationParams& params, int j, Rng& rng);
/// Descending eigenvalues of p M for a fresh sample M.
Eigen::VectorXd sample_power_fluctuations(const FluctuationParams& params, int j, Rng& rng);

/// 10 log10(int q du * int 1/q du). Throws DomainError when q touches zero.
double snr_gap(const ArmaSpec& noise);

}  // namespace spectre
