#include "spectre/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "spectre/errors.hpp"
#include "spectre/kernels.hpp"

namespace spectre {
namespace {

constexpr double kClampRelative = 1e-14;

kernels::StieltjesSums bulk_sums(std::span<const double> ev, int k_hat, double x) {
  if (k_hat < 0 || static_cast<std::size_t>(k_hat) >= ev.size())
    throw DomainError("empirical estimator: k_hat must be in [0, N)");
  const auto tail = ev.subspan(static_cast<std::size_t>(k_hat));
  for (double l : tail)
    if (l == x) {
      std::ostringstream os;
      os.precision(17);
      os << "empirical estimator: pole at x = " << x << " (retained eigenvalue)";
      throw DomainError(os.str());
    }
  return kernels::stieltjes_sums(tail.data(), tail.size(), x);
}

void require_finite(const CMatrix& Y) {
  for (Eigen::Index j = 0; j < Y.cols(); ++j)
    for (Eigen::Index i = 0; i < Y.rows(); ++i)
      if (!std::isfinite(Y(i, j).real()) || !std::isfinite(Y(i, j).imag())) {
        std::ostringstream os;
        os << "observation matrix has a non-finite entry at row " << i + 1 << ", column " << j + 1;
        throw InputError(os.str());
      }
}

// Vertex of the parabola through three points.
std::pair<double, double> parabolic_vertex(double x0, double y0, double x1, double y1, double x2,
                                           double y2) {
  const double d01 = (y1 - y0) / (x1 - x0);
  const double d12 = (y2 - y1) / (x2 - x1);
  const double a = (d12 - d01) / (x2 - x0);
  if (!(a < 0.0)) return {x1, y1};
  const double bcoef = d01 - a * (x0 + x1);
  const double xv = std::clamp(-bcoef / (2.0 * a), x0, x2);
  const double yv = y1 + (xv - x1) * (d01 + a * (xv - x0));
  return {xv, yv};
}

std::vector<double> clamped_tail_logs(std::span<const double> ev, double floor_value) {
  std::vector<double> out(ev.size());
  for (std::size_t i = 0; i < ev.size(); ++i) out[i] = std::log(std::max(ev[i], floor_value));
  return out;
}

// -T (N - k) log(geometric mean / arithmetic mean) of lambda_{k+1..N}.
std::vector<double> information_likelihood(std::span<const double> ev, std::size_t N, std::size_t T,
                                           int L) {
  if (ev.size() != N) throw InputError("information criterion: eigenvalue count differs from N");
  if (L < 0 || static_cast<std::size_t>(L) >= N)
    throw InputError("information criterion: requires 0 <= L < N");
  const double floor_value = std::max(ev[0], 0.0) * kClampRelative;
  std::vector<double> ll(static_cast<std::size_t>(L) + 1, 0.0);
  if (!(ev[0] > 0.0)) return ll;
  const std::vector<double> logs = clamped_tail_logs(ev, floor_value);
  for (int k = 0; k <= L; ++k) {
    double sum = 0.0, sum_log = 0.0;
    for (std::size_t n = static_cast<std::size_t>(k); n < N; ++n) {
      sum += std::max(ev[n], floor_value);
      sum_log += logs[n];
    }
    const double count = static_cast<double>(N - static_cast<std::size_t>(k));
    const double log_ratio = std::log(sum / count) - sum_log / count;
    ll[static_cast<std::size_t>(k)] = static_cast<double>(T) * count * std::max(log_ratio, 0.0);
  }
  return ll;
}

int argmin(const std::vector<double>& v) {
  return static_cast<int>(std::min_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

EigenDecomp EigenDecomp::from_values(std::vector<double> values) {
  EigenDecomp e;
  std::sort(values.begin(), values.end(), std::greater<>());
  e.eigenvalues = std::move(values);
  return e;
}

EigenDecomp sample_gram_eigs(const CMatrix& Y, bool with_vectors) {
  if (Y.rows() == 0 || Y.cols() == 0) throw InputError("observation matrix is empty");
  require_finite(Y);
  EigenDecomp out;
  if (Y.rows() > Y.cols()) {
    std::ostringstream os;
    os << "N = " << Y.rows() << " exceeds T = " << Y.cols() << "; Gram matrix is rank deficient";
    out.diagnostics.push_back(os.str());
  }
  const CMatrix G = Y * Y.adjoint();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(
      G, with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw ConvergenceError("Hermitian eigendecomposition failed");
  const Eigen::Index N = G.rows();
  out.eigenvalues.resize(static_cast<std::size_t>(N));
  for (Eigen::Index i = 0; i < N; ++i)
    out.eigenvalues[static_cast<std::size_t>(i)] = es.eigenvalues()(N - 1 - i);
  if (with_vectors) out.eigenvectors = es.eigenvectors().rowwise().reverse();
  return out;
}

void DetectionConfig::validate(std::size_t N) const {
  if (L < 1) throw InputError("detection: L must be >= 1");
  if (static_cast<std::size_t>(L) >= N) throw InputError("detection: L must be < N");
  if (!(epsilon > 0.0)) throw InputError("detection: epsilon must be > 0");
}

DetectionResult detect_sources(std::span<const double> ev, const DetectionConfig& cfg) {
  cfg.validate(ev.size());
  DetectionResult r;
  const double floor_value = std::max(ev[0], 0.0) * kClampRelative;
  bool clamped = false;
  for (int k = 1; k <= cfg.L; ++k) {
    const double num_raw = ev[static_cast<std::size_t>(k - 1)];
    const double den_raw = ev[static_cast<std::size_t>(k)];
    double ratio;
    if (den_raw == 0.0 && num_raw > floor_value) {
      ratio = std::numeric_limits<double>::infinity();
      r.diagnostics.push_back("lambda_" + std::to_string(k + 1) +
                              " = 0; ratio treated as +infinity");
    } else if (ev[0] > 0.0) {
      const double num = std::max(num_raw, floor_value);
      const double den = std::max(den_raw, floor_value);
      if (num != num_raw || den != den_raw) clamped = true;
      ratio = num / den;
    } else {
      ratio = 1.0;
      clamped = true;
    }
    r.ratios.push_back(ratio);
    if (ratio > 1.0 + cfg.epsilon) r.k_hat = k;
  }
  if (clamped)
    r.diagnostics.push_back("eigenvalues below 1e-14 * lambda_1 clamped for ratio computation");
  return r;
}

DetectionResult detect_sources(const EigenDecomp& eigs, const DetectionConfig& cfg) {
  return detect_sources(std::span<const double>(eigs.eigenvalues), cfg);
}

double empirical_m_hat(std::span<const double> ev, int k_hat, double x) {
  const auto s = bulk_sums(ev, k_hat, x);
  return s.s1 / static_cast<double>(ev.size() - static_cast<std::size_t>(k_hat));
}

double empirical_m_hat_prime(std::span<const double> ev, int k_hat, double x) {
  const auto s = bulk_sums(ev, k_hat, x);
  return s.s2 / static_cast<double>(ev.size() - static_cast<std::size_t>(k_hat));
}

double empirical_g_hat(std::span<const double> ev, int k_hat, double c_T, double x) {
  const double m = empirical_m_hat(ev, k_hat, x);
  return m * (x * c_T * m + c_T - 1.0);
}

double empirical_g_hat_prime(std::span<const double> ev, int k_hat, double c_T, double x) {
  const auto s = bulk_sums(ev, k_hat, x);
  const double n = static_cast<double>(ev.size() - static_cast<std::size_t>(k_hat));
  const double m = s.s1 / n;
  const double mp = s.s2 / n;
  return mp * (x * c_T * m + c_T - 1.0) + m * (c_T * m + x * c_T * mp);
}

PowerEstimates estimate_powers(std::span<const double> ev, int k_hat, double c_T) {
  if (k_hat < 1) throw DomainError("estimate_powers: requires k_hat >= 1");
  PowerEstimates out;
  for (int i = 0; i < k_hat; ++i) {
    const double g = empirical_g_hat(ev, k_hat, c_T, ev[static_cast<std::size_t>(i)]);
    out.powers.push_back(1.0 / g);
    out.reliable.push_back(g > 0.0);
  }
  return out;
}

double subspace_weight(std::span<const double> ev, int k_hat, double c_T, int i) {
  if (i < 0 || i >= k_hat) throw DomainError("subspace weight: spike index must be < k_hat");
  const double x = ev[static_cast<std::size_t>(i)];
  const auto s = bulk_sums(ev, k_hat, x);
  const double n = static_cast<double>(ev.size() - static_cast<std::size_t>(k_hat));
  const double m = s.s1 / n;
  const double mp = s.s2 / n;
  const double g = m * (x * c_T * m + c_T - 1.0);
  const double gp = mp * (x * c_T * m + c_T - 1.0) + m * (c_T * m + x * c_T * mp);
  return gp / (m * g);
}

std::complex<double> bilinear_form_estimate(const EigenDecomp& eigs, int k_hat, double c_T, int i,
                                            std::span<const int> group, const CVector& a,
                                            const CVector& b) {
  if (!eigs.has_vectors()) throw DomainError("bilinear form: eigenvectors required");
  const auto N = static_cast<Eigen::Index>(eigs.size());
  if (a.size() != N || b.size() != N) throw DomainError("bilinear form: vector length differs from N");
  const double w = subspace_weight(eigs.eigenvalues, k_hat, c_T, i);
  const int singleton[1] = {i};
  const std::span<const int> members = group.empty() ? std::span<const int>(singleton) : group;
  std::complex<double> acc(0.0, 0.0);
  for (int j : members) {
    if (j < 0 || j >= N) throw DomainError("bilinear form: group index out of range");
    const auto u = eigs.eigenvectors.col(j);
    acc += a.dot(u) * u.dot(b);
  }
  return w * acc;
}

CVector steering_vector(std::size_t N, double theta, const ArrayGeometry& geometry) {
  CVector h(static_cast<Eigen::Index>(N));
  const double scale = 1.0 / std::sqrt(static_cast<double>(N));
  const double phase = -2.0 * std::numbers::pi * geometry.spacing * std::sin(theta);
  for (std::size_t n = 0; n < N; ++n)
    h(static_cast<Eigen::Index>(n)) = std::polar(scale, phase * static_cast<double>(n));
  return h;
}

std::vector<double> LocalizationScan::estimates(int k) const {
  const auto n = std::min<std::size_t>(peaks.size(), static_cast<std::size_t>(std::max(k, 0)));
  return {peaks.begin(), peaks.begin() + static_cast<std::ptrdiff_t>(n)};
}

std::vector<double> angle_grid(double lo_deg, double hi_deg, double step_deg) {
  if (!(step_deg > 0.0) || !(hi_deg > lo_deg)) throw InputError("angle grid: need lo < hi, step > 0");
  if (lo_deg < -90.0 || hi_deg > 90.0) throw InputError("angle grid: must lie within [-90, 90] degrees");
  const auto n = static_cast<std::size_t>(std::floor((hi_deg - lo_deg) / step_deg + 1e-9)) + 1;
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i)
    g[i] = (lo_deg + static_cast<double>(i) * step_deg) * std::numbers::pi / 180.0;
  return g;
}

LocalizationScan weighted_projection_scan(const EigenDecomp& eigs, std::span<const double> weights,
                                          std::span<const double> grid,
                                          const ArrayGeometry& geometry) {
  if (grid.empty()) throw InputError("localization scan: empty grid");
  if (!eigs.has_vectors()) throw DomainError("localization scan: eigenvectors required");
  if (weights.size() > eigs.size()) throw DomainError("localization scan: too many weights");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(std::abs(grid[i]) <= std::numbers::pi / 2 + 1e-12))
      throw InputError("localization scan: grid outside [-pi/2, pi/2]");
    if (i > 0 && !(grid[i] > grid[i - 1]))
      throw InputError("localization scan: grid must be strictly increasing");
  }
  const std::size_t N = eigs.size();
  const std::size_t K = weights.size();
  std::vector<double> u_re(N * K), u_im(N * K), h_re(N), h_im(N);
  for (std::size_t j = 0; j < K; ++j)
    for (std::size_t n = 0; n < N; ++n) {
      const auto v = eigs.eigenvectors(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(j));
      u_re[j * N + n] = v.real();
      u_im[j * N + n] = v.imag();
    }

  LocalizationScan scan;
  scan.theta_grid.assign(grid.begin(), grid.end());
  scan.gamma_values.resize(grid.size());
  const double scale = 1.0 / std::sqrt(static_cast<double>(N));
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double phase = -2.0 * std::numbers::pi * geometry.spacing * std::sin(grid[g]);
    for (std::size_t n = 0; n < N; ++n) {
      h_re[n] = scale * std::cos(phase * static_cast<double>(n));
      h_im[n] = scale * std::sin(phase * static_cast<double>(n));
    }
    double gamma = 0.0;
    for (std::size_t j = 0; j < K; ++j)
      gamma += weights[j] * kernels::projection_power(h_re.data(), h_im.data(), &u_re[j * N],
                                                      &u_im[j * N], N);
    scan.gamma_values[g] = gamma;
  }

  std::vector<std::pair<double, double>> found;  // (height, angle)
  const auto& v = scan.gamma_values;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    if (v[i] > v[i - 1] && v[i] >= v[i + 1]) {
      const auto [xv, yv] = parabolic_vertex(grid[i - 1], v[i - 1], grid[i], v[i], grid[i + 1], v[i + 1]);
      found.emplace_back(yv, xv);
    }
  }
  std::stable_sort(found.begin(), found.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (const auto& [height, angle] : found) {
    scan.peaks.push_back(angle);
    scan.peak_heights.push_back(height);
  }
  return scan;
}

LocalizationScan music_scan(const EigenDecomp& eigs, int k_hat, double c_T,
                            std::span<const double> grid, const ArrayGeometry& geometry) {
  if (k_hat < 1) throw DomainError("music_scan: requires k_hat >= 1");
  std::vector<double> w(static_cast<std::size_t>(k_hat));
  for (int j = 0; j < k_hat; ++j) w[static_cast<std::size_t>(j)] = subspace_weight(eigs.eigenvalues, k_hat, c_T, j);
  return weighted_projection_scan(eigs, w, grid, geometry);
}

LocalizationScan traditional_music_scan(const EigenDecomp& eigs, int k_hat,
                                        std::span<const double> grid,
                                        const ArrayGeometry& geometry) {
  if (k_hat < 1) throw DomainError("traditional_music_scan: requires k_hat >= 1");
  const std::vector<double> w(static_cast<std::size_t>(k_hat), 1.0);
  return weighted_projection_scan(eigs, w, grid, geometry);
}

CMatrix whiten(const CMatrix& Y, const ToeplitzCovariance& R) {
  if (static_cast<std::size_t>(Y.cols()) != R.dimension())
    throw InputError("whiten: covariance dimension differs from the number of columns");
  return whiten(Y, R.inverse_sqrt());
}

CMatrix whiten(const CMatrix& Y, const Eigen::MatrixXd& inverse_sqrt) {
  if (Y.cols() != inverse_sqrt.rows()) throw InputError("whiten: dimension mismatch");
  CMatrix out(Y.rows(), Y.cols());
  out.real() = Y.real() * inverse_sqrt;
  out.imag() = Y.imag() * inverse_sqrt;
  return out;
}

int mdl_estimate(std::span<const double> ev, std::size_t N, std::size_t T, int L) {
  std::vector<double> score = information_likelihood(ev, N, T, L);
  const double logT = std::log(static_cast<double>(T));
  for (int k = 0; k <= L; ++k)
    score[static_cast<std::size_t>(k)] +=
        0.5 * k * (2.0 * static_cast<double>(N) - k) * logT;
  return argmin(score);
}

int aic_estimate(std::span<const double> ev, std::size_t N, std::size_t T, int L) {
  std::vector<double> score = information_likelihood(ev, N, T, L);
  for (int k = 0; k <= L; ++k)
    score[static_cast<std::size_t>(k)] += k * (2.0 * static_cast<double>(N) - k);
  return argmin(score);
}

}  // namespace spectre
