#include "spectre/spectral_model.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <string>

#include <boost/math/tools/minima.hpp>

#include "spectre/errors.hpp"

namespace spectre {
namespace {

constexpr double kTailTolerance = 1e-12;
constexpr std::size_t kMaxImpulseLength = 10'000'000;

// Schur-Cohn step-down: all roots of 1 + sum b_k z^-k lie strictly inside
// the unit disk iff every reflection coefficient has modulus < 1.
bool is_stable(const std::vector<double>& beta) {
  std::vector<double> a(beta.size() + 1);
  a[0] = 1.0;
  std::copy(beta.begin(), beta.end(), a.begin() + 1);
  for (std::size_t m = beta.size(); m >= 1; --m) {
    const double k = a[m];
    if (!(std::abs(k) < 1.0)) return false;
    std::vector<double> next(m);
    const double denom = 1.0 - k * k;
    for (std::size_t i = 0; i < m; ++i) next[i] = (a[i] - k * a[m - i]) / denom;
    a = std::move(next);
  }
  return true;
}

double ar_spectral_radius(const std::vector<double>& beta) {
  const auto n = static_cast<Eigen::Index>(beta.size());
  if (n == 0) return 0.0;
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) comp(0, j) = -beta[static_cast<std::size_t>(j)];
  for (Eigen::Index i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

std::vector<double> raw_impulse(const std::vector<double>& ma, const std::vector<double>& ar,
                                std::size_t length) {
  std::vector<double> psi(length, 0.0);
  for (std::size_t l = 0; l < length; ++l) {
    double v = (l == 0) ? 1.0 : (l <= ma.size() ? ma[l - 1] : 0.0);
    for (std::size_t k = 1; k <= ar.size() && k <= l; ++k) v -= ar[k - 1] * psi[l - k];
    psi[l] = v;
  }
  return psi;
}

double raw_density(const std::vector<double>& ma, const std::vector<double>& ar, double u) {
  using C = std::complex<double>;
  auto poly = [u](const std::vector<double>& c) {
    C acc(1.0, 0.0);
    for (std::size_t k = 0; k < c.size(); ++k)
      acc += c[k] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k + 1) * u);
    return acc;
  };
  return std::norm(poly(ma)) / std::norm(poly(ar));
}

}  // namespace

ArmaSpec::ArmaSpec() : psi_{1.0} {}

ArmaSpec::ArmaSpec(std::vector<double> ma_coeffs, std::vector<double> ar_coeffs,
                   bool unit_variance, std::size_t quad_points)
    : ma_(std::move(ma_coeffs)),
      ar_(std::move(ar_coeffs)),
      unit_variance_(unit_variance),
      quad_points_(quad_points) {
  for (double v : ma_)
    if (!std::isfinite(v)) throw InputError("ARMA spec: non-finite MA coefficient");
  for (double v : ar_)
    if (!std::isfinite(v)) throw InputError("ARMA spec: non-finite AR coefficient");
  if (!is_stable(ar_))
    throw InputError("ARMA spec: AR polynomial has a root on or outside the unit circle");
  if (!is_white() && quad_points_ < 64)
    throw InputError("ARMA spec: quad_points must be >= 64 for a non-white filter");

  std::size_t length = ma_.size() + 1;
  const double radius = ar_spectral_radius(ar_);
  if (radius > 0.0) {
    // Geometric tail with margin for repeated poles.
    const double naive = std::log(1e-18) / std::log(radius);
    const double want = 2.0 * naive + 8.0 * static_cast<double>(ar_.size() + ma_.size()) + 16.0;
    if (!(want < static_cast<double>(kMaxImpulseLength)))
      throw InputError("ARMA spec: AR pole too close to the unit circle");
    length = std::max(length, static_cast<std::size_t>(want));
  }
  std::vector<double> psi = raw_impulse(ma_, ar_, length);

  double total = 0.0;
  for (double v : psi) total += std::abs(v);
  double tail = 0.0;
  std::size_t keep = psi.size();
  while (keep > 1) {
    const double next_tail = tail + std::abs(psi[keep - 1]);
    if (!(next_tail < kTailTolerance * total)) break;
    tail = next_tail;
    --keep;
  }
  psi.resize(keep);

  if (unit_variance_) {
    double r0 = 0.0;
    for (double v : psi) r0 += v * v;
    scale_ = 1.0 / std::sqrt(r0);
    for (double& v : psi) v *= scale_;
  }
  psi_ = std::move(psi);
}

ArmaSpec ArmaSpec::ar1(double a, bool unit_variance, std::size_t quad_points) {
  if (a == 0.0) return ArmaSpec({}, {}, unit_variance, quad_points);
  return ArmaSpec({}, {-a}, unit_variance, quad_points);
}

ArmaSpec ArmaSpec::from_recursion(std::vector<double> theta, std::vector<double> phi,
                                  bool unit_variance, std::size_t quad_points) {
  for (double& v : phi) v = -v;
  while (!phi.empty() && phi.back() == 0.0) phi.pop_back();
  while (!theta.empty() && theta.back() == 0.0) theta.pop_back();
  return ArmaSpec(std::move(theta), std::move(phi), unit_variance, quad_points);
}

std::vector<double> impulse_response(const ArmaSpec& spec) { return spec.psi(); }

double autocovariance(const ArmaSpec& spec, long lag) {
  const auto k = static_cast<std::size_t>(lag < 0 ? -lag : lag);
  const auto& psi = spec.psi();
  double r = 0.0;
  for (std::size_t l = 0; l + k < psi.size(); ++l) r += psi[l + k] * psi[l];
  return r;
}

double spectral_density(const ArmaSpec& spec, double u) {
  if (spec.is_white()) return 1.0;
  return spec.scale() * spec.scale() * raw_density(spec.ma_coeffs(), spec.ar_coeffs(), u);
}

NuQuadrature NuQuadrature::from_atoms(std::span<const double> atoms) {
  if (atoms.empty()) throw InputError("nu: empty atom list");
  std::map<double, std::size_t> counts;
  for (double a : atoms) {
    if (!std::isfinite(a) || a < 0.0) throw InputError("nu: atoms must be finite and >= 0");
    ++counts[a];
  }
  NuQuadrature q;
  const auto total = static_cast<double>(atoms.size());
  for (const auto& [value, count] : counts) {
    q.nodes.push_back(value);
    q.weights.push_back(static_cast<double>(count) / total);
  }
  q.a_nu = q.nodes.front();
  q.b_nu = q.nodes.back();
  return q;
}

double NuQuadrature::moment(int k) const {
  double s = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * std::pow(nodes[i], k);
  return s;
}

NuQuadrature build_nu(const ArmaSpec& spec) {
  NuQuadrature q;
  if (spec.is_white()) {
    q.nodes = {1.0};
    q.weights = {1.0};
    q.a_nu = q.b_nu = 1.0;
    return q;
  }
  const std::size_t M = spec.quad_points();
  const double h = 1.0 / static_cast<double>(M);
  q.nodes.resize(M);
  q.weights.assign(M, h);
  for (std::size_t i = 0; i < M; ++i) q.nodes[i] = spectral_density(spec, static_cast<double>(i) * h);

  const auto [lo_it, hi_it] = std::minmax_element(q.nodes.begin(), q.nodes.end());
  const double u_lo = static_cast<double>(lo_it - q.nodes.begin()) * h;
  const double u_hi = static_cast<double>(hi_it - q.nodes.begin()) * h;
  const int bits = std::numeric_limits<double>::digits / 2;
  auto q_of = [&spec](double u) { return spectral_density(spec, u); };
  auto neg_q = [&spec](double u) { return -spectral_density(spec, u); };
  const auto mn = boost::math::tools::brent_find_minima(q_of, u_lo - h, u_lo + h, bits);
  const auto mx = boost::math::tools::brent_find_minima(neg_q, u_hi - h, u_hi + h, bits);
  q.a_nu = std::min(*lo_it, mn.second);
  q.b_nu = std::max(*hi_it, -mx.second);
  return q;
}

ToeplitzCovariance::ToeplitzCovariance(std::vector<double> first_row) : row_(std::move(first_row)) {
  if (row_.empty()) throw InputError("Toeplitz covariance: dimension must be >= 1");
  for (double v : row_)
    if (!std::isfinite(v)) throw InputError("Toeplitz covariance: non-finite entry");
  Eigen::LDLT<Eigen::MatrixXd> ldlt(matrix());
  if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() < -1e-10 * row_[0])
    throw ConvergenceError("Toeplitz covariance: LDL factorization failed (matrix not PSD)");
}

Eigen::MatrixXd ToeplitzCovariance::matrix() const {
  const auto T = static_cast<Eigen::Index>(row_.size());
  Eigen::MatrixXd R(T, T);
  for (Eigen::Index i = 0; i < T; ++i)
    for (Eigen::Index j = 0; j < T; ++j) R(i, j) = row_[static_cast<std::size_t>(std::abs(i - j))];
  return R;
}

std::vector<double> ToeplitzCovariance::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(matrix(), Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

Eigen::MatrixXd ToeplitzCovariance::cholesky_factor() const {
  const Eigen::MatrixXd R = matrix();
  Eigen::LLT<Eigen::MatrixXd> llt(R);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(R);
  const Eigen::VectorXd s = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * s.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::MatrixXd ToeplitzCovariance::inverse_sqrt() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(matrix());
  const Eigen::VectorXd& ev = es.eigenvalues();
  if (!(ev.minCoeff() > 1e-12 * ev.maxCoeff()))
    throw DomainError("Toeplitz covariance is singular; cannot whiten");
  const Eigen::VectorXd s = ev.cwiseSqrt().cwiseInverse();
  return es.eigenvectors() * s.asDiagonal() * es.eigenvectors().transpose();
}

double ToeplitzCovariance::mean_inverse_eigenvalue() const {
  const std::vector<double> ev = eigenvalues();
  if (!(ev.front() > 0.0)) throw DomainError("Toeplitz covariance is singular");
  double s = 0.0;
  for (double v : ev) s += 1.0 / v;
  return s / static_cast<double>(ev.size());
}

ToeplitzCovariance toeplitz_covariance(const ArmaSpec& spec, std::size_t T) {
  if (T < 1) throw InputError("Toeplitz covariance: T must be >= 1");
  std::vector<double> row(T);
  for (std::size_t k = 0; k < T; ++k) row[k] = autocovariance(spec, static_cast<long>(k));
  return ToeplitzCovariance(std::move(row));
}

}  // namespace spectre
