#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace spectre {

/// ARMA noise filter p(z) = (1 + sum_k ma[k] z^-k) / (1 + sum_k ar[k] z^-k).
///
/// `ar_coeffs` are the denominator taps beta_k, so the AR(1) recursion
/// x_t = a x_{t-1} + e_t has ar_coeffs = {-a}. Use `ArmaSpec::ar1(a)` or
/// `from_recursion` to build from recursion coefficients.
class ArmaSpec {
 public:
  /// White noise.
  ArmaSpec();
  /// Throws InputError if the AR polynomial has a root on or outside the
  /// unit circle or quad_points is too small for a non-white filter.
  ArmaSpec(std::vector<double> ma_coeffs, std::vector<double> ar_coeffs, bool unit_variance = true,
           std::size_t quad_points = 2048);

  static ArmaSpec ar1(double a, bool unit_variance = true, std::size_t quad_points = 2048);
  /// ARMA from x_t = sum_k phi[k] x_{t-k} + e_t + sum_k theta[k] e_{t-k}.
  static ArmaSpec from_recursion(std::vector<double> theta, std::vector<double> phi,
                                 bool unit_variance = true, std::size_t quad_points = 2048);

  const std::vector<double>& ma_coeffs() const { return ma_; }
  const std::vector<double>& ar_coeffs() const { return ar_; }
  bool unit_variance() const { return unit_variance_; }
  std::size_t quad_points() const { return quad_points_; }
  /// Number of retained terms psi_0..psi_{L-1}.
  std::size_t impulse_truncation() const { return psi_.size(); }
  bool is_white() const { return ma_.empty() && ar_.empty(); }

  /// Truncated impulse response, already rescaled when unit_variance is set.
  const std::vector<double>& psi() const { return psi_; }
  /// Factor applied to the raw filter so that r_0 = 1 (1 if not normalizing).
  double scale() const { return scale_; }

 private:
  std::vector<double> ma_;
  std::vector<double> ar_;
  bool unit_variance_ = true;
  std::size_t quad_points_ = 2048;
  std::vector<double> psi_;
  double scale_ = 1.0;
};

/// Discrete representation of nu: integral of f over nu ~ sum_i w_i f(t_i).
struct NuQuadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
  double a_nu = 1.0;
  double b_nu = 1.0;

  /// Atomic measure T^-1 sum delta_{sigma_t}; exactly equal atoms are merged.
  static NuQuadrature from_atoms(std::span<const double> atoms);

  std::size_t size() const { return nodes.size(); }
  /// sum_i w_i t_i^k
  double moment(int k) const;
};

class ToeplitzCovariance {
 public:
  explicit ToeplitzCovariance(std::vector<double> first_row);

  std::size_t dimension() const { return row_.size(); }
  const std::vector<double>& first_row() const { return row_; }
  Eigen::MatrixXd matrix() const;
  /// Ascending eigenvalues.
  std::vector<double> eigenvalues() const;
  /// Square-root factor C with C C^T = R: lower Cholesky, or the symmetric
  /// square root when R is numerically singular.
  Eigen::MatrixXd cholesky_factor() const;
  /// Symmetric R^{-1/2}; throws DomainError when R is singular.
  Eigen::MatrixXd inverse_sqrt() const;
  /// sum of eigenvalues of R^{-1}, divided by T.
  double mean_inverse_eigenvalue() const;

 private:
  std::vector<double> row_;
};

std::vector<double> impulse_response(const ArmaSpec& spec);
double autocovariance(const ArmaSpec& spec, long lag);
double spectral_density(const ArmaSpec& spec, double u);
NuQuadrature build_nu(const ArmaSpec& spec);
ToeplitzCovariance toeplitz_covariance(const ArmaSpec& spec, std::size_t T);

}  // namespace spectre
