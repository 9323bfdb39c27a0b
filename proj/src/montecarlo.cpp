#include "spectre/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

#include "spectre/errors.hpp"

namespace spectre {

double constellation_kappa(Constellation c) { return c == Constellation::qpsk ? -1.0 : 0.0; }

double amplitude_from_snr_db(double snr_db) { return std::pow(10.0, snr_db / 20.0); }

void Scenario::set_snr_db(double snr_db) {
  amplitudes.assign(static_cast<std::size_t>(std::max(K, 0)), amplitude_from_snr_db(snr_db));
}

void Scenario::validate() const {
  if (N < 1 || T < 1) throw InputError("scenario: N and T must be >= 1");
  if (K < 0) throw InputError("scenario: K must be >= 0");
  if (thetas_deg.size() != static_cast<std::size_t>(K))
    throw InputError("scenario: number of angles differs from K");
  if (amplitudes.size() != static_cast<std::size_t>(K))
    throw InputError("scenario: number of amplitudes differs from K");
  std::set<double> seen;
  for (double t : thetas_deg) {
    if (!(t >= -90.0 && t <= 90.0)) throw InputError("scenario: angles must lie in [-90, 90] degrees");
    if (!seen.insert(t).second) throw InputError("scenario: angles must be distinct");
  }
  for (std::size_t k = 0; k < amplitudes.size(); ++k) {
    if (!(amplitudes[k] > 0.0)) throw InputError("scenario: amplitudes must be > 0");
    if (k > 0 && amplitudes[k] > amplitudes[k - 1])
      throw InputError("scenario: amplitudes must be in descending order");
  }
  detection.validate(N);
  if (K > detection.L) throw InputError("scenario: K exceeds the detection bound L");
  if (!(geometry.spacing > 0.0)) throw InputError("scenario: element spacing must be > 0");
}

NoiseGenerator::NoiseGenerator(const ArmaSpec& spec, std::size_t T)
    : R_(toeplitz_covariance(spec, T)), white_(spec.is_white()) {
  if (white_) return;
  factor_t_ = R_.cholesky_factor().transpose();
  whitener_ = R_.inverse_sqrt();
  gain_ = R_.mean_inverse_eigenvalue();
}

CMatrix NoiseGenerator::sample(std::size_t N, Rng& rng) const {
  const auto T = static_cast<Eigen::Index>(R_.dimension());
  const auto n = static_cast<Eigen::Index>(N);
  Eigen::MatrixXd re(n, T), im(n, T);
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index t = 0; t < T; ++t) {
      re(i, t) = gauss(rng);
      im(i, t) = gauss(rng);
    }
  const double s = 1.0 / std::sqrt(static_cast<double>(T));
  CMatrix V(n, T);
  if (white_) {
    V.real() = re * s;
    V.imag() = im * s;
  } else {
    V.real() = (re * factor_t_.triangularView<Eigen::Upper>()) * s;
    V.imag() = (im * factor_t_.triangularView<Eigen::Upper>()) * s;
  }
  return V;
}

CMatrix synth_observation(const Scenario& sc, const NoiseGenerator& noise, Rng& rng,
                          CMatrix* symbols) {
  if (noise.covariance().dimension() != sc.T)
    throw InputError("synth_observation: noise generator built for a different T");
  const auto N = static_cast<Eigen::Index>(sc.N);
  const auto T = static_cast<Eigen::Index>(sc.T);
  // Symbols are drawn before the noise so signal and noise streams stay aligned
  // across scenarios that differ only in SNR.
  CMatrix S(sc.K, T);
  std::uniform_int_distribution<int> quadrant(0, 3);
  for (int k = 0; k < sc.K; ++k)
    for (Eigen::Index t = 0; t < T; ++t) {
      if (sc.constellation == Constellation::qpsk)
        S(k, t) = std::polar(1.0, std::numbers::pi / 4 + std::numbers::pi / 2 * quadrant(rng));
      else
        S(k, t) = complex_normal(rng, 1.0);
    }
  CMatrix Y = noise.sample(sc.N, rng);
  const double s = 1.0 / std::sqrt(static_cast<double>(T));
  for (int k = 0; k < sc.K; ++k) {
    const CVector h = steering_vector(sc.N, sc.thetas_deg[static_cast<std::size_t>(k)] *
                                                std::numbers::pi / 180.0, sc.geometry);
    const double a = sc.amplitudes[static_cast<std::size_t>(k)] * s;
    for (Eigen::Index t = 0; t < T; ++t)
      for (Eigen::Index n = 0; n < N; ++n) Y(n, t) += a * h(n) * S(k, t);
  }
  if (symbols) *symbols = std::move(S);
  return Y;
}

CMatrix synth_observation(const Scenario& sc, Rng& rng) {
  const NoiseGenerator noise(sc.noise, sc.T);
  return synth_observation(sc, noise, rng);
}

TrialOutcome simulate_trial(const Scenario& sc, const NoiseGenerator& noise, Rng& rng,
                            std::span<const double> grid) {
  const CMatrix Y = synth_observation(sc, noise, rng);
  const EigenDecomp eigs = sample_gram_eigs(Y, true);
  TrialOutcome out;
  const auto det = detect_sources(eigs, sc.detection);
  out.k_hat = det.k_hat;
  const auto top = static_cast<std::size_t>(sc.detection.L) + 1;
  out.top_eigenvalues.assign(eigs.eigenvalues.begin(),
                             eigs.eigenvalues.begin() + static_cast<std::ptrdiff_t>(top));
  if (out.k_hat < 1) return out;
  const double c_T = sc.c_T();
  out.p_hats = estimate_powers(eigs.eigenvalues, out.k_hat, c_T).powers;
  const auto scan = music_scan(eigs, out.k_hat, c_T, grid, sc.geometry);
  for (double th : scan.estimates(out.k_hat)) out.theta_hats_deg.push_back(th * 180.0 / std::numbers::pi);
  std::vector<double> w(static_cast<std::size_t>(out.k_hat));
  for (int j = 0; j < out.k_hat; ++j)
    w[static_cast<std::size_t>(j)] = subspace_weight(eigs.eigenvalues, out.k_hat, c_T, j);
  for (double th : sc.thetas_deg) {
    const double at[1] = {th * std::numbers::pi / 180.0};
    out.gamma_at_truth.push_back(weighted_projection_scan(eigs, w, at, sc.geometry).gamma_values[0]);
  }
  return out;
}

const Curve& ExperimentReport::curve(const std::string& name) const {
  for (const auto& c : curves)
    if (c.name == name) return c;
  throw std::out_of_range("report has no curve named " + name);
}

Curve& ExperimentReport::curve_mut(const std::string& name, bool has_theory) {
  for (auto& c : curves)
    if (c.name == name) return c;
  curves.push_back(Curve{name, has_theory, {}});
  return curves.back();
}

std::size_t worker_count() {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SPECTRE_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap >= 1) n = static_cast<std::size_t>(cap);
  }
  return n;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min(worker_count(), std::max<std::size_t>(n, 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    while (!failed.load(std::memory_order_relaxed)) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) break;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::pair<double, double> wilson_interval(std::size_t successes, std::size_t n) {
  if (n == 0) return {0.0, 1.0};
  const double z = 1.959963984540054;
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  const double denom = 1.0 + z * z / nn;
  const double center = (p + z * z / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z * z / (4.0 * nn * nn)) / denom;
  return {successes == 0 ? 0.0 : std::max(0.0, center - half),
          successes == n ? 1.0 : std::min(1.0, center + half)};
}

double ks_statistic_normal(std::vector<double> sample) {
  if (sample.empty()) return 1.0;
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double F = 0.5 * std::erfc(-sample[i] / std::numbers::sqrt2);
    d = std::max({d, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
  }
  return d;
}

}  // namespace spectre
