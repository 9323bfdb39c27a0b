#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spectre/inference.hpp"
#include "spectre/rng.hpp"
#include "spectre/spectral_model.hpp"

namespace spectre {

enum class Constellation { qpsk, gaussian };

/// kappa = E|s|^4 - 2 for the constellation.
double constellation_kappa(Constellation c);

struct Scenario {
  std::size_t N = 20;
  std::size_t T = 40;
  int K = 1;
  std::vector<double> thetas_deg{10.0};
  std::vector<double> amplitudes{std::sqrt(10.0)};
  Constellation constellation = Constellation::qpsk;
  ArmaSpec noise = ArmaSpec::ar1(0.6);
  DetectionConfig detection;
  ArrayGeometry geometry;

  double c_T() const { return static_cast<double>(N) / static_cast<double>(T); }
  /// Throws InputError on inconsistent fields.
  void validate() const;
  /// Sets all K amplitudes from one SNR in dB (20 log10 a = snr).
  void set_snr_db(double snr_db);
};

double amplitude_from_snr_db(double snr_db);

/// Draws T^-1/2 W C^T with W i.i.d. CN(0,1) and C C^T = R_T.
class NoiseGenerator {
 public:
  NoiseGenerator(const ArmaSpec& spec, std::size_t T);
  CMatrix sample(std::size_t N, Rng& rng) const;
  const ToeplitzCovariance& covariance() const { return R_; }
  /// R_T^{-1/2}, computed on construction.
  const Eigen::MatrixXd& whitener() const { return whitener_; }
  /// T^-1 tr R_T^-1: power gain seen by a whitened source.
  double whitening_gain() const { return gain_; }
  bool white() const { return white_; }

 private:
  ToeplitzCovariance R_;
  bool white_;
  Eigen::MatrixXd factor_t_;  // C^T (upper triangular)
  Eigen::MatrixXd whitener_;
  double gain_ = 1.0;
};

/// `symbols`, when given, receives the K x T symbol matrix (before scaling).
CMatrix synth_observation(const Scenario& sc, const NoiseGenerator& noise, Rng& rng,
                          CMatrix* symbols = nullptr);
CMatrix synth_observation(const Scenario& sc, Rng& rng);

struct TrialOutcome {
  int k_hat = 0;
  std::vector<double> p_hats;
  std::vector<double> theta_hats_deg;
  std::vector<double> gamma_at_truth;
  std::vector<double> top_eigenvalues;  // lambda_1..lambda_{L+1}
};

/// One synthetic trial through the full proposed pipeline.
TrialOutcome simulate_trial(const Scenario& sc, const NoiseGenerator& noise, Rng& rng,
                            std::span<const double> grid);

struct CurvePoint {
  double sweep = 0;
  double metric = 0;
  double ci_low = 0;
  double ci_high = 0;
  std::size_t n_trials = 0;
  std::optional<double> theory;
};

struct Curve {
  std::string name;
  bool has_theory = false;
  std::vector<CurvePoint> points;
};

struct ExperimentReport {
  std::string experiment;
  std::string sweep_name;
  std::vector<Curve> curves;
  std::vector<std::string> notes;

  const Curve& curve(const std::string& name) const;
  Curve& curve_mut(const std::string& name, bool has_theory = false);
};

using ProgressSink = std::function<void(const ExperimentReport&)>;

struct ExperimentOptions {
  std::size_t trials = 10000;
  std::uint64_t seed = 1;
  /// Called with the report so far after each completed sweep point.
  ProgressSink progress;
};

/// Worker threads used for trials: SPECTRE_THREADS when set, else hardware concurrency.
std::size_t worker_count();
/// Runs body(i) for i in [0, n) on worker_count() threads; rethrows the
/// first exception after all workers stop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// 95% Wilson interval for `successes` out of `n`.
std::pair<double, double> wilson_interval(std::size_t successes, std::size_t n);

ExperimentReport run_detection_experiment(const Scenario& base, std::span<const std::size_t> N_values,
                                          const ExperimentOptions& opts);
ExperimentReport run_roc_experiment(const Scenario& sc, std::span<const double> epsilons,
                                    const ExperimentOptions& opts);
ExperimentReport run_power_nmse_experiment(const Scenario& base, std::span<const double> snr_db,
                                           const ExperimentOptions& opts);
ExperimentReport run_music_mse_experiment(const Scenario& base, std::span<const double> snr_db,
                                          const ExperimentOptions& opts);
/// `window_deg` = {lo, hi}; success means exactly two local maxima.
ExperimentReport run_resolution_experiment(const Scenario& base, std::span<const double> snr_db,
                                           const ExperimentOptions& opts,
                                           std::pair<double, double> window_deg = {5.0, 17.0},
                                           double grid_step_deg = 0.05);
ExperimentReport run_fluctuation_experiment(const Scenario& sc, const ExperimentOptions& opts);

/// Kolmogorov-Smirnov distance between a sample and N(0,1).
double ks_statistic_normal(std::vector<double> sample);

}  // namespace spectre
