#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/distributions/chi_squared.hpp>

#include "spectre/equilibrium.hpp"
#include "spectre/errors.hpp"
#include "spectre/fluctuations.hpp"
#include "spectre/montecarlo.hpp"

namespace spectre {
namespace {

enum StreamTag : std::uint64_t {
  kDetection = 1,
  kRoc = 2,
  kPower = 3,
  kMusic = 4,
  kResolution = 5,
  kFluctuation = 6,
};

std::uint64_t stream_id(StreamTag tag, std::size_t point, std::uint64_t variant) {
  return (static_cast<std::uint64_t>(tag) << 48) ^ (static_cast<std::uint64_t>(point) << 8) ^ variant;
}

struct MeanStats {
  double mean = 0;
  double var = 0;  // unbiased
  std::size_t n = 0;
};

MeanStats summarize(const std::vector<double>& x) {
  MeanStats s;
  s.n = x.size();
  if (x.empty()) return s;
  double sum = 0.0;
  for (double v : x) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  double ss = 0.0;
  for (double v : x) ss += (v - s.mean) * (v - s.mean);
  s.var = s.n > 1 ? ss / static_cast<double>(s.n - 1) : 0.0;
  return s;
}

CurvePoint proportion_point(double sweep, std::size_t successes, std::size_t n) {
  const auto [lo, hi] = wilson_interval(successes, n);
  return CurvePoint{sweep, n ? static_cast<double>(successes) / static_cast<double>(n) : 0.0, lo, hi,
                    n, std::nullopt};
}

// Sample mean with a normal 95% interval; clipped at zero for error averages.
CurvePoint mean_point(double sweep, const std::vector<double>& x, bool nonnegative = true) {
  const MeanStats s = summarize(x);
  const double half = 1.959963984540054 * std::sqrt(s.var / static_cast<double>(std::max<std::size_t>(s.n, 1)));
  const double lo = nonnegative ? std::max(0.0, s.mean - half) : s.mean - half;
  return CurvePoint{sweep, s.mean, lo, s.mean + half, s.n, std::nullopt};
}

CurvePoint variance_point(double sweep, const std::vector<double>& x) {
  const MeanStats s = summarize(x);
  CurvePoint p{sweep, s.var, s.var, s.var, s.n, std::nullopt};
  if (s.n > 1) {
    boost::math::chi_squared chi(static_cast<double>(s.n - 1));
    const double dof = static_cast<double>(s.n - 1);
    p.ci_low = dof * s.var / boost::math::quantile(chi, 0.975);
    p.ci_high = dof * s.var / boost::math::quantile(chi, 0.025);
  }
  return p;
}

int k_hat_from_ratios(const std::vector<double>& ratios, double epsilon) {
  int k = 0;
  for (std::size_t i = 0; i < ratios.size(); ++i)
    if (ratios[i] > 1.0 + epsilon) k = static_cast<int>(i) + 1;
  return k;
}

std::vector<double> gram_eigenvalues(const CMatrix& Y) { return sample_gram_eigs(Y, false).eigenvalues; }

CMatrix oracle_view(const CMatrix& Y, const NoiseGenerator& gen) {
  return gen.white() ? Y : whiten(Y, gen.whitener());
}

Scenario noise_only(const Scenario& sc) {
  Scenario s = sc;
  s.K = 0;
  s.thetas_deg.clear();
  s.amplitudes.clear();
  return s;
}

void require_sources(const Scenario& sc, int K, const char* what) {
  if (sc.K != K) {
    std::ostringstream os;
    os << what << " requires K = " << K << " (got " << sc.K << ")";
    throw InputError(os.str());
  }
}

std::optional<double> theory_nmse(const EquilibriumContext& ctx, double p, double kappa, std::size_t T) {
  try {
    return predicted_nmse(fluct_params(ctx, p, kappa), T);
  } catch (const SubcriticalError&) {
    return std::nullopt;
  }
}

void notify(const ExperimentOptions& opts, const ExperimentReport& rep) {
  if (opts.progress) opts.progress(rep);
}

}  // namespace

ExperimentReport run_detection_experiment(const Scenario& base, std::span<const std::size_t> N_values,
                                          const ExperimentOptions& opts) {
  ExperimentReport rep;
  rep.experiment = "detection";
  rep.sweep_name = "N";
  rep.notes.push_back("cdr = P(k_hat = K | signal); cdr_alt = P(k_hat >= K | signal); "
                      "far = P(k_hat >= 1 | K = 0) on companion noise-only trials");
  const double c_T = base.c_T();
  const std::size_t n = opts.trials;
  const char* methods[3] = {"proposed", "mdl", "aic"};
  for (std::size_t pi = 0; pi < N_values.size(); ++pi) {
    Scenario sc = base;
    sc.N = N_values[pi];
    sc.T = static_cast<std::size_t>(std::max(1.0, std::round(static_cast<double>(sc.N) / c_T)));
    sc.validate();
    const Scenario sc0 = noise_only(sc);
    const NoiseGenerator gen(sc.noise, sc.T);
    std::vector<std::array<int, 6>> k(n);
    parallel_for(n, [&](std::size_t i) {
      Rng rs = substream(opts.seed, stream_id(kDetection, pi, 0), i);
      Rng rn = substream(opts.seed, stream_id(kDetection, pi, 1), i);
      const auto ev = gram_eigenvalues(synth_observation(sc, gen, rs));
      const auto ev0 = gram_eigenvalues(synth_observation(sc0, gen, rn));
      const int L = sc.detection.L;
      k[i] = {detect_sources(ev, sc.detection).k_hat, mdl_estimate(ev, sc.N, sc.T, L),
              aic_estimate(ev, sc.N, sc.T, L), detect_sources(ev0, sc.detection).k_hat,
              mdl_estimate(ev0, sc.N, sc.T, L), aic_estimate(ev0, sc.N, sc.T, L)};
    });
    const double x = static_cast<double>(sc.N);
    for (int m = 0; m < 3; ++m) {
      std::size_t eq = 0, ge = 0, fa = 0;
      for (const auto& r : k) {
        eq += r[static_cast<std::size_t>(m)] == sc.K;
        ge += r[static_cast<std::size_t>(m)] >= sc.K;
        fa += r[static_cast<std::size_t>(m) + 3] >= 1;
      }
      const std::string name = methods[m];
      rep.curve_mut(name + "_cdr").points.push_back(proportion_point(x, eq, n));
      rep.curve_mut(name + "_cdr_alt").points.push_back(proportion_point(x, ge, n));
      rep.curve_mut(name + "_far").points.push_back(proportion_point(x, fa, n));
    }
    notify(opts, rep);
  }
  return rep;
}

ExperimentReport run_roc_experiment(const Scenario& sc, std::span<const double> epsilons,
                                    const ExperimentOptions& opts) {
  sc.validate();
  if (sc.K < 1) throw InputError("ROC experiment requires K >= 1");
  ExperimentReport rep;
  rep.experiment = "roc";
  rep.sweep_name = "epsilon";
  rep.notes.push_back("cdr = P(k_hat = K | signal); cdr_alt = P(k_hat >= K | signal); "
                      "far = P(k_hat >= 1 | K = 0) on companion noise-only trials");
  const Scenario sc0 = noise_only(sc);
  const NoiseGenerator gen(sc.noise, sc.T);
  const std::size_t n = opts.trials;
  // ratios[case][trial]: signal, signal whitened, noise, noise whitened
  std::array<std::vector<std::vector<double>>, 4> ratios;
  for (auto& r : ratios) r.resize(n);
  // Ratios do not depend on epsilon; reuse one config for all of them.
  DetectionConfig probe = sc.detection;
  parallel_for(n, [&](std::size_t i) {
    Rng rs = substream(opts.seed, stream_id(kRoc, 0, 0), i);
    Rng rn = substream(opts.seed, stream_id(kRoc, 0, 1), i);
    const CMatrix Y = synth_observation(sc, gen, rs);
    const CMatrix Y0 = synth_observation(sc0, gen, rn);
    ratios[0][i] = detect_sources(gram_eigenvalues(Y), probe).ratios;
    ratios[1][i] = detect_sources(gram_eigenvalues(oracle_view(Y, gen)), probe).ratios;
    ratios[2][i] = detect_sources(gram_eigenvalues(Y0), probe).ratios;
    ratios[3][i] = detect_sources(gram_eigenvalues(oracle_view(Y0, gen)), probe).ratios;
  });
  const char* variants[2] = {"proposed", "oracle"};
  for (double eps : epsilons) {
    if (!(eps > 0.0)) throw InputError("ROC experiment: epsilon must be > 0");
    for (int v = 0; v < 2; ++v) {
      std::size_t eq = 0, ge = 0, fa = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const int ks = k_hat_from_ratios(ratios[static_cast<std::size_t>(v)][i], eps);
        const int k0 = k_hat_from_ratios(ratios[static_cast<std::size_t>(v) + 2][i], eps);
        eq += ks == sc.K;
        ge += ks >= sc.K;
        fa += k0 >= 1;
      }
      const std::string name = variants[v];
      rep.curve_mut(name + "_far").points.push_back(proportion_point(eps, fa, n));
      rep.curve_mut(name + "_cdr").points.push_back(proportion_point(eps, eq, n));
      rep.curve_mut(name + "_cdr_alt").points.push_back(proportion_point(eps, ge, n));
    }
  }
  notify(opts, rep);
  return rep;
}

ExperimentReport run_power_nmse_experiment(const Scenario& base, std::span<const double> snr_db,
                                           const ExperimentOptions& opts) {
  require_sources(base, 1, "power NMSE experiment");
  ExperimentReport rep;
  rep.experiment = "power_nmse";
  rep.sweep_name = "snr_db";
  rep.notes.push_back("forced detection k_hat = 1; proposed theory uses the finite-horizon "
                      "measure of R_T with c_T; oracle error is relative to the realized whitened source power "
                      "p |s R_T^-1/2|^2 / T, oracle theory uses white noise with power p T^-1 tr R_T^-1");
  const NoiseGenerator gen(base.noise, base.T);
  const double c_T = base.c_T();
  const double kappa = constellation_kappa(base.constellation);
  const EquilibriumContext ctx_T = EquilibriumContext::finite_horizon(gen.covariance(), base.N);
  const EquilibriumContext ctx_white(build_nu(ArmaSpec()), c_T);
  const double gain = gen.whitening_gain();
  const std::size_t n = opts.trials;
  std::size_t unreliable = 0;
  for (std::size_t pi = 0; pi < snr_db.size(); ++pi) {
    Scenario sc = base;
    sc.set_snr_db(snr_db[pi]);
    sc.validate();
    const double p = sc.amplitudes[0] * sc.amplitudes[0];
    std::vector<double> err(n), err_o(n);
    std::vector<char> bad(n, 0);
    parallel_for(n, [&](std::size_t i) {
      Rng r = substream(opts.seed, stream_id(kPower, pi, 0), i);
      CMatrix S;
      const CMatrix Y = synth_observation(sc, gen, r, &S);
      const auto ev = gram_eigenvalues(Y);
      const auto est = estimate_powers(ev, 1, c_T);
      bad[i] = !est.reliable[0];
      err[i] = std::pow((est.powers[0] - p) / p, 2);
      // Whitening turns the symbol row s into s R^{-1/2}; its realized power is
      // what the white-noise estimator targets.
      const double realized =
          gen.white() ? (S.row(0).squaredNorm() / static_cast<double>(sc.T))
                      : (S.row(0) * gen.whitener()).squaredNorm() / static_cast<double>(sc.T);
      const double p_eff = p * realized;
      const auto ev_w = gram_eigenvalues(oracle_view(Y, gen));
      const double p_w = estimate_powers(ev_w, 1, c_T).powers[0];
      err_o[i] = std::pow((p_w - p_eff) / p_eff, 2);
    });
    for (char b : bad) unreliable += static_cast<std::size_t>(b);
    CurvePoint pp = mean_point(snr_db[pi], err);
    pp.theory = theory_nmse(ctx_T, p, kappa, sc.T);
    rep.curve_mut("proposed_nmse", true).points.push_back(pp);
    CurvePoint po = mean_point(snr_db[pi], err_o);
    po.theory = theory_nmse(ctx_white, p * gain, kappa, sc.T);
    rep.curve_mut("oracle_nmse", true).points.push_back(po);
    notify(opts, rep);
  }
  if (unreliable)
    rep.notes.push_back(std::to_string(unreliable) +
                        " trials had g_hat(lambda_1) <= 0 (unreliable estimate, kept in the average)");
  return rep;
}

ExperimentReport run_music_mse_experiment(const Scenario& base, std::span<const double> snr_db,
                                          const ExperimentOptions& opts) {
  require_sources(base, 1, "localization MSE experiment");
  ExperimentReport rep;
  rep.experiment = "music_mse";
  rep.sweep_name = "snr_db";
  rep.notes.push_back("forced detection k_hat = 1; target gamma(theta_1) = h^H Pi h = 1");
  const NoiseGenerator gen(base.noise, base.T);
  const double c_T = base.c_T();
  const std::size_t n = opts.trials;
  const double theta = base.thetas_deg[0] * std::numbers::pi / 180.0;
  const CVector h = steering_vector(base.N, theta, base.geometry);
  for (std::size_t pi = 0; pi < snr_db.size(); ++pi) {
    Scenario sc = base;
    sc.set_snr_db(snr_db[pi]);
    sc.validate();
    std::vector<double> e_p(n), e_t(n), e_o(n);
    parallel_for(n, [&](std::size_t i) {
      Rng r = substream(opts.seed, stream_id(kMusic, pi, 0), i);
      const CMatrix Y = synth_observation(sc, gen, r);
      const EigenDecomp eigs = sample_gram_eigs(Y, true);
      const double proj = std::norm(h.dot(eigs.eigenvectors.col(0)));
      const double w = subspace_weight(eigs.eigenvalues, 1, c_T, 0);
      e_p[i] = std::pow(w * proj - 1.0, 2);
      e_t[i] = std::pow(proj - 1.0, 2);
      const EigenDecomp eo = sample_gram_eigs(oracle_view(Y, gen), true);
      const double proj_o = std::norm(h.dot(eo.eigenvectors.col(0)));
      e_o[i] = std::pow(subspace_weight(eo.eigenvalues, 1, c_T, 0) * proj_o - 1.0, 2);
    });
    rep.curve_mut("proposed_mse").points.push_back(mean_point(snr_db[pi], e_p));
    rep.curve_mut("traditional_mse").points.push_back(mean_point(snr_db[pi], e_t));
    rep.curve_mut("oracle_mse").points.push_back(mean_point(snr_db[pi], e_o));
    notify(opts, rep);
  }
  return rep;
}

ExperimentReport run_resolution_experiment(const Scenario& base, std::span<const double> snr_db,
                                           const ExperimentOptions& opts,
                                           std::pair<double, double> window_deg, double grid_step_deg) {
  require_sources(base, 2, "resolution experiment");
  ExperimentReport rep;
  rep.experiment = "resolution";
  rep.sweep_name = "snr_db";
  {
    std::ostringstream os;
    os << "forced detection k_hat = 2; success = exactly two local maxima of the localization "
          "function in ["
       << window_deg.first << ", " << window_deg.second << "] deg, grid step " << grid_step_deg
       << " deg, element spacing " << base.geometry.spacing << " wavelengths";
    rep.notes.push_back(os.str());
  }
  const std::vector<double> grid = angle_grid(window_deg.first, window_deg.second, grid_step_deg);
  const NoiseGenerator gen(base.noise, base.T);
  const double c_T = base.c_T();
  const std::size_t n = opts.trials;
  for (std::size_t pi = 0; pi < snr_db.size(); ++pi) {
    Scenario sc = base;
    sc.set_snr_db(snr_db[pi]);
    sc.validate();
    std::vector<std::array<char, 3>> ok(n);
    parallel_for(n, [&](std::size_t i) {
      Rng r = substream(opts.seed, stream_id(kResolution, pi, 0), i);
      const CMatrix Y = synth_observation(sc, gen, r);
      const EigenDecomp eigs = sample_gram_eigs(Y, true);
      const EigenDecomp eo = sample_gram_eigs(oracle_view(Y, gen), true);
      ok[i][0] = music_scan(eigs, 2, c_T, grid, sc.geometry).peaks.size() == 2;
      ok[i][1] = traditional_music_scan(eigs, 2, grid, sc.geometry).peaks.size() == 2;
      ok[i][2] = music_scan(eo, 2, c_T, grid, sc.geometry).peaks.size() == 2;
    });
    const char* names[3] = {"proposed_resolution", "traditional_resolution", "oracle_resolution"};
    for (std::size_t v = 0; v < 3; ++v) {
      std::size_t s = 0;
      for (const auto& o : ok) s += static_cast<std::size_t>(o[v]);
      rep.curve_mut(names[v]).points.push_back(proportion_point(snr_db[pi], s, n));
    }
    notify(opts, rep);
  }
  return rep;
}

ExperimentReport run_fluctuation_experiment(const Scenario& sc, const ExperimentOptions& opts) {
  require_sources(sc, 1, "fluctuation experiment");
  sc.validate();
  ExperimentReport rep;
  rep.experiment = "fluctuation";
  rep.sweep_name = "p";
  const NoiseGenerator gen(sc.noise, sc.T);
  const double c_T = sc.c_T();
  const double p = sc.amplitudes[0] * sc.amplitudes[0];
  const EquilibriumContext ctx_T = EquilibriumContext::finite_horizon(gen.covariance(), sc.N);
  const FluctuationParams fp = fluct_params(ctx_T, p, constellation_kappa(sc.constellation));
  const double sqrtT = std::sqrt(static_cast<double>(sc.T));
  const std::size_t n = opts.trials;
  std::vector<double> xe(n), xp(n);
  parallel_for(n, [&](std::size_t i) {
    Rng r = substream(opts.seed, stream_id(kFluctuation, 0, 0), i);
    const auto ev = gram_eigenvalues(synth_observation(sc, gen, r));
    xe[i] = sqrtT * (ev[0] - fp.rho);
    xp[i] = sqrtT * (estimate_powers(ev, 1, c_T).powers[0] - p);
  });
  auto standardized = [](const std::vector<double>& x) {
    const MeanStats s = summarize(x);
    std::vector<double> z(x.size());
    const double sd = std::sqrt(s.var);
    for (std::size_t i = 0; i < x.size(); ++i) z[i] = (x[i] - s.mean) / sd;
    return z;
  };
  CurvePoint ve = variance_point(p, xe);
  ve.theory = eigenvalue_variance(fp);
  CurvePoint vp = variance_point(p, xp);
  vp.theory = power_variance(fp);
  rep.curve_mut("eigenvalue_variance", true).points.push_back(ve);
  rep.curve_mut("power_variance", true).points.push_back(vp);
  rep.curve_mut("eigenvalue_mean").points.push_back(mean_point(p, xe, false));
  rep.curve_mut("power_mean").points.push_back(mean_point(p, xp, false));
  const double ks_e = ks_statistic_normal(standardized(xe));
  const double ks_p = ks_statistic_normal(standardized(xp));
  rep.curve_mut("eigenvalue_ks").points.push_back(CurvePoint{p, ks_e, ks_e, ks_e, n, std::nullopt});
  rep.curve_mut("power_ks").points.push_back(CurvePoint{p, ks_p, ks_p, ks_p, n, std::nullopt});
  std::ostringstream os;
  os.precision(10);
  os << "rho_T = " << fp.rho << ", psi = " << fp.psi << ", psi_breve = " << fp.psi_breve
     << ", g'(rho) = " << fp.g_prime_at_rho << "; KS statistics use sample standardization";
  rep.notes.push_back(os.str());
  notify(opts, rep);
  return rep;
}

}  // namespace spectre
