#include "spectre/commands.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <numbers>
#include <optional>
#include <string>

#include "spectre/equilibrium.hpp"
#include "spectre/errors.hpp"
#include "spectre/kernels.hpp"
#include "spectre/matrix_io.hpp"
#include "spectre/report_io.hpp"

namespace spectre {
namespace {

std::string fmt(double v, int digits = 12) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

double deg(double rad) { return rad * 180.0 / std::numbers::pi; }

void run_edge(const RunConfig& cfg, std::ostream& out) {
  const EquilibriumContext ctx(build_nu(cfg.scenario.noise), cfg.c);
  const EdgeSolution& e = ctx.edge();
  out << "c = " << fmt(cfg.c) << "\n"
      << "nu support = [" << fmt(ctx.nu().a_nu) << ", " << fmt(ctx.nu().b_nu) << "]\n"
      << "b = " << fmt(e.b) << "\n"
      << "m_b = " << fmt(e.m_b) << "\n"
      << "p_lim = " << fmt(detectability_threshold(ctx)) << "\n";
}

struct Observation {
  EigenDecomp eigs;
  std::size_t N = 0;
  std::size_t T = 0;
  double c_T() const { return static_cast<double>(N) / static_cast<double>(T); }
};

Observation load(const RunConfig& cfg, bool with_vectors, std::ostream& out) {
  const CMatrix Y = read_matrix(cfg.input);
  Observation o;
  o.N = static_cast<std::size_t>(Y.rows());
  o.T = static_cast<std::size_t>(Y.cols());
  o.eigs = sample_gram_eigs(Y, with_vectors);
  out << "N = " << o.N << ", T = " << o.T << ", c_T = " << fmt(o.c_T()) << "\n";
  for (const auto& d : o.eigs.diagnostics) out << "note: " << d << "\n";
  return o;
}

int resolve_k(const RunConfig& cfg, const Observation& o, std::ostream& out) {
  if (cfg.forced_k) {
    if (static_cast<std::size_t>(*cfg.forced_k) >= o.N)
      throw InputError("detection.k must be smaller than N");
    out << "k_hat = " << *cfg.forced_k << " (forced)\n";
    return *cfg.forced_k;
  }
  const DetectionResult det = detect_sources(o.eigs, cfg.scenario.detection);
  for (const auto& d : det.diagnostics) out << "note: " << d << "\n";
  out << "k_hat = " << det.k_hat << "\n";
  return det.k_hat;
}

void run_detect(const RunConfig& cfg, std::ostream& out) {
  const Observation o = load(cfg, false, out);
  const DetectionConfig& dc = cfg.scenario.detection;
  dc.validate(o.N);
  const DetectionResult det = detect_sources(o.eigs, dc);
  for (const auto& d : det.diagnostics) out << "note: " << d << "\n";
  out << "L = " << dc.L << ", epsilon = " << fmt(dc.epsilon) << "\n";
  for (std::size_t k = 0; k < det.ratios.size(); ++k)
    out << "lambda_" << k + 1 << " = " << fmt(o.eigs.eigenvalues[k]) << ", ratio = " << fmt(det.ratios[k])
        << (det.ratios[k] > 1.0 + dc.epsilon ? "  (above threshold)" : "") << "\n";
  out << "k_hat = " << det.k_hat << "\n"
      << "mdl = " << mdl_estimate(o.eigs.eigenvalues, o.N, o.T, dc.L) << "\n"
      << "aic = " << aic_estimate(o.eigs.eigenvalues, o.N, o.T, dc.L) << "\n";
}

void run_powers(const RunConfig& cfg, std::ostream& out) {
  const Observation o = load(cfg, false, out);
  cfg.scenario.detection.validate(o.N);
  const int k = resolve_k(cfg, o, out);
  if (k == 0) {
    out << "no sources detected\n";
    return;
  }
  const PowerEstimates est = estimate_powers(o.eigs.eigenvalues, k, o.c_T());
  for (int i = 0; i < k; ++i) {
    const auto u = static_cast<std::size_t>(i);
    out << "p_" << i + 1 << " = " << fmt(est.powers[u]);
    if (est.powers[u] > 0.0) out << " (" << fmt(10.0 * std::log10(est.powers[u]), 6) << " dB)";
    if (!est.reliable[u]) out << "  unreliable: eigenvalue too close to the bulk";
    out << "\n";
  }
}

void run_music(const RunConfig& cfg, std::ostream& out) {
  const Observation o = load(cfg, true, out);
  cfg.scenario.detection.validate(o.N);
  const int k = resolve_k(cfg, o, out);
  if (k == 0) {
    out << "no sources detected\n";
    return;
  }
  const auto grid = angle_grid(cfg.window_deg.first, cfg.window_deg.second, cfg.grid_step_deg);
  const LocalizationScan scan = music_scan(o.eigs, k, o.c_T(), grid, cfg.scenario.geometry);
  const auto est = scan.estimates(k);
  if (static_cast<int>(est.size()) < k)
    out << "note: only " << est.size() << " local maxima in the scan window\n";
  for (std::size_t j = 0; j < est.size(); ++j)
    out << "theta_" << j + 1 << " = " << fmt(deg(est[j]), 8) << " deg, gamma = " << fmt(scan.peak_heights[j])
        << "\n";
}

int run_figure(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  std::optional<ExperimentReport> last;
  ExperimentOptions opts;
  opts.trials = cfg.trials;
  opts.seed = cfg.seed;
  opts.progress = [&](const ExperimentReport& r) { last = r; };
  out << command_name(cfg.command) << ": " << cfg.trials << " trials, seed " << cfg.seed << ", "
      << worker_count() << " worker(s), kernels " << kernels::isa_name(kernels::active_isa()) << "\n";
  ExperimentReport rep;
  try {
    const Scenario& sc = cfg.scenario;
    switch (cfg.command) {
      case Command::fig_detection: {
        std::vector<std::size_t> Ns;
        for (double v : cfg.sweep) Ns.push_back(static_cast<std::size_t>(v));
        rep = run_detection_experiment(sc, Ns, opts);
        break;
      }
      case Command::fig_roc:
        rep = run_roc_experiment(sc, cfg.sweep, opts);
        break;
      case Command::fig_power:
        rep = run_power_nmse_experiment(sc, cfg.sweep, opts);
        break;
      case Command::fig_music_mse:
        rep = run_music_mse_experiment(sc, cfg.sweep, opts);
        break;
      case Command::fig_resolution:
        rep = run_resolution_experiment(sc, cfg.sweep, opts, cfg.window_deg, cfg.grid_step_deg);
        break;
      case Command::fig_fluct:
        rep = run_fluctuation_experiment(sc, opts);
        break;
      default:
        throw InputError("not a figure command");
    }
  } catch (const InputError&) {
    throw;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    if (last) {
      for (const auto& p : write_report(*last, cfg.output, true)) err << "partial results: " << p << "\n";
    }
    return kExitRuntime;
  }
  for (const auto& n : rep.notes) out << "note: " << n << "\n";
  for (const auto& p : write_report(rep, cfg.output)) out << "wrote " << p << "\n";
  return kExitOk;
}

}  // namespace

int run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    switch (cfg.command) {
      case Command::edge:
        run_edge(cfg, out);
        return kExitOk;
      case Command::detect:
        run_detect(cfg, out);
        return kExitOk;
      case Command::powers:
        run_powers(cfg, out);
        return kExitOk;
      case Command::music:
        run_music(cfg, out);
        return kExitOk;
      default:
        return run_figure(cfg, out, err);
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace spectre
