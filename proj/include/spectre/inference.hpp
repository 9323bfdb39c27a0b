#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spectre/spectral_model.hpp"

namespace spectre {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Eigen-pairs of Y Y^H, eigenvalues in descending order. `eigenvectors`
/// column i belongs to eigenvalues[i]; it is empty for values-only runs.
struct EigenDecomp {
  std::vector<double> eigenvalues;
  CMatrix eigenvectors;
  std::vector<std::string> diagnostics;

  /// Values-only decomposition; sorts into descending order.
  static EigenDecomp from_values(std::vector<double> values);
  std::size_t size() const { return eigenvalues.size(); }
  bool has_vectors() const { return eigenvectors.cols() > 0; }
};

/// Hermitian eigendecomposition of Y Y^H. Rejects non-finite entries; adds a
/// diagnostic when N > T.
EigenDecomp sample_gram_eigs(const CMatrix& Y, bool with_vectors = true);

struct DetectionConfig {
  int L = 5;
  double epsilon = 0.75;
  /// Throws InputError unless 1 <= L < N and epsilon > 0.
  void validate(std::size_t N) const;
};

struct DetectionResult {
  int k_hat = 0;
  /// lambda_k / lambda_{k+1}, k = 1..L
  std::vector<double> ratios;
  std::vector<std::string> diagnostics;
};

/// k_hat = largest k in 1..L with lambda_k / lambda_{k+1} > 1 + epsilon, else 0.
DetectionResult detect_sources(std::span<const double> eigenvalues, const DetectionConfig& cfg);
DetectionResult detect_sources(const EigenDecomp& eigs, const DetectionConfig& cfg);

// Empirical Stieltjes estimators built from the N - k_hat smallest eigenvalues.
double empirical_m_hat(std::span<const double> eigenvalues, int k_hat, double x);
double empirical_m_hat_prime(std::span<const double> eigenvalues, int k_hat, double x);
double empirical_g_hat(std::span<const double> eigenvalues, int k_hat, double c_T, double x);
double empirical_g_hat_prime(std::span<const double> eigenvalues, int k_hat, double c_T, double x);

struct PowerEstimates {
  std::vector<double> powers;
  /// false where g_hat(lambda_i) <= 0 (eigenvalue too close to the bulk)
  std::vector<bool> reliable;
};

/// p_i = 1 / g_hat(lambda_i) for i = 1..k_hat, in eigenvalue order.
PowerEstimates estimate_powers(std::span<const double> eigenvalues, int k_hat, double c_T);

/// g_hat'(l_i) / (m_hat(l_i) g_hat(l_i)) for the 0-based spike index i.
double subspace_weight(std::span<const double> eigenvalues, int k_hat, double c_T, int i);

/// w_i a^H P b, with P the projector onto the eigenvectors listed in `group`
/// (0-based; empty means the singleton {i}).
std::complex<double> bilinear_form_estimate(const EigenDecomp& eigs, int k_hat, double c_T, int i,
                                            std::span<const int> group, const CVector& a,
                                            const CVector& b);

/// Uniform linear array; element spacing in wavelengths.
struct ArrayGeometry {
  double spacing = 1.0;
};

/// h(theta)_n = exp(-2 i pi spacing n sin(theta)) / sqrt(N), n = 0..N-1.
CVector steering_vector(std::size_t N, double theta, const ArrayGeometry& geometry = {});

struct LocalizationScan {
  std::vector<double> theta_grid;    // radians, strictly increasing
  std::vector<double> gamma_values;
  std::vector<double> peaks;         // refined local-maximum angles, by height descending
  std::vector<double> peak_heights;

  /// The k highest peaks (fewer if the scan has fewer).
  std::vector<double> estimates(int k) const;
};

/// Angle grid in radians from lo_deg to hi_deg inclusive.
std::vector<double> angle_grid(double lo_deg, double hi_deg, double step_deg);

/// sum_j weights[j] |h(theta)^H u_j|^2 over the first weights.size() eigenvectors.
LocalizationScan weighted_projection_scan(const EigenDecomp& eigs, std::span<const double> weights,
                                          std::span<const double> grid,
                                          const ArrayGeometry& geometry = {});
LocalizationScan music_scan(const EigenDecomp& eigs, int k_hat, double c_T,
                            std::span<const double> grid, const ArrayGeometry& geometry = {});
LocalizationScan traditional_music_scan(const EigenDecomp& eigs, int k_hat,
                                        std::span<const double> grid,
                                        const ArrayGeometry& geometry = {});

/// Y R^{-1/2}.
CMatrix whiten(const CMatrix& Y, const ToeplitzCovariance& R);
/// Y W for a precomputed real T x T whitening matrix.
CMatrix whiten(const CMatrix& Y, const Eigen::MatrixXd& inverse_sqrt);

int mdl_estimate(std::span<const double> eigenvalues, std::size_t N, std::size_t T, int L);
int aic_estimate(std::span<const double> eigenvalues, std::size_t N, std::size_t T, int L);

}  // namespace spectre
