#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "spectre/kernels.hpp"
#include "spectre/spectral_model.hpp"

namespace spectre {

struct SolverConfig {
  double abs_tol = 1e-12;
  int max_iter = 200;
  double bracket_expansion = 2.0;
};

/// Right edge b of the limiting spectral support and m_b = m(b+).
struct EdgeSolution {
  double b = 0;
  double m_b = 0;
};

/// Deterministic-equivalent context for a noise measure nu and ratio c.
/// Immutable; copies share the lazily solved edge.
class EquilibriumContext {
 public:
  EquilibriumContext(NuQuadrature nu, double c, SolverConfig solver = {});

  /// Context built on nu_T = T^-1 sum delta_{sigma_t} with ratio c_T.
  static EquilibriumContext finite_horizon(std::span<const double> covariance_eigenvalues,
                                           double c_T, SolverConfig solver = {});
  static EquilibriumContext finite_horizon(const ToeplitzCovariance& R, std::size_t N,
                                           SolverConfig solver = {});

  const NuQuadrature& nu() const;
  double c() const;
  const SolverConfig& solver() const;

  /// Solved on first access; concurrent first calls solve once.
  const EdgeSolution& edge() const;

  /// Resolvent sums of nu at s = c*m.
  kernels::ResolventMoments moments(double m) const;

 private:
  struct State;
  std::shared_ptr<State> state_;
};

double x_of_m(const EquilibriumContext& ctx, double m);
/// Solves the edge equation afresh (no caching).
EdgeSolution edge_solve(const EquilibriumContext& ctx);
double m_of_x(const EquilibriumContext& ctx, double x);
double m_tilde_of_x(const EquilibriumContext& ctx, double x);
/// m'(x) = m(x)^2 / delta(x)
double m_prime(const EquilibriumContext& ctx, double x);
double g_of_x(const EquilibriumContext& ctx, double x);
double g_prime(const EquilibriumContext& ctx, double x);
double delta(const EquilibriumContext& ctx, double x);
double detectability_threshold(const EquilibriumContext& ctx);
/// Unique rho > b with p g(rho) = 1. Throws SubcriticalError for p <= p_lim.
double spike_location(const EquilibriumContext& ctx, double p);
EquilibriumContext finite_horizon(std::span<const double> covariance_eigenvalues, double c_T,
                                  SolverConfig solver = {});
/// f(x) = Im m(x + i eta) / pi with eta = 1e-6.
std::vector<double> limiting_density(const EquilibriumContext& ctx, std::span<const double> grid);

}  // namespace spectre
