#include "spectre/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <sstream>

#include "spectre/errors.hpp"

namespace spectre {

struct EquilibriumContext::State {
  NuQuadrature nu;
  double c;
  SolverConfig solver;
  std::once_flag edge_once;
  EdgeSolution edge;
};

const NuQuadrature& EquilibriumContext::nu() const { return state_->nu; }
double EquilibriumContext::c() const { return state_->c; }
const SolverConfig& EquilibriumContext::solver() const { return state_->solver; }

namespace {

constexpr double kDensityEta = 1e-6;
constexpr int kFixedPointSweeps = 50;

// Bisection on (lo, hi) for an increasing predicate boundary: `positive(m)`
// is false near lo and true near hi. Never evaluates the endpoints. Runs to
// machine resolution or max_iter.
template <class Pred>
std::pair<double, double> bisect(double lo, double hi, const SolverConfig& cfg, Pred positive) {
  for (int it = 0; it < cfg.max_iter; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (positive(mid))
      hi = mid;
    else
      lo = mid;
  }
  return {lo, hi};
}

double x_unchecked(const EquilibriumContext& ctx, double m) {
  return -1.0 / m + ctx.moments(m).t_inv1;
}

void require_above_edge(const EquilibriumContext& ctx, double x) {
  const double b = ctx.edge().b;
  if (!(x > b + 1e-12)) {
    std::ostringstream os;
    os.precision(17);
    os << "x = " << x << " is not above the support edge b = " << b;
    throw DomainError(os.str());
  }
}

// Inverse of x(m) on (m_b, 0) for any x > b.
double m_solve(const EquilibriumContext& ctx, double x) {
  const double m_b = ctx.edge().m_b;
  auto above = [&](double m) { return x_unchecked(ctx, m) > x; };
  const auto [lo, hi] = bisect(m_b, 0.0, ctx.solver(), above);
  if (hi - lo > ctx.solver().abs_tol)
    throw ConvergenceError("m_of_x: bisection did not reach abs_tol within max_iter");
  return 0.5 * (lo + hi);
}

double g_unchecked(const EquilibriumContext& ctx, double x) {
  const double c = ctx.c();
  const double m = m_solve(ctx, x);
  return x * m * (c * m - (1.0 - c) / x);
}

}  // namespace

EquilibriumContext::EquilibriumContext(NuQuadrature nu, double c, SolverConfig solver)
    : state_(std::make_shared<State>()) {
  if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("equilibrium: c must be > 0");
  if (!(solver.abs_tol > 0.0)) throw DomainError("equilibrium: abs_tol must be > 0");
  if (solver.max_iter < 1) throw DomainError("equilibrium: max_iter must be >= 1");
  if (!(solver.bracket_expansion > 1.0))
    throw DomainError("equilibrium: bracket_expansion must be > 1");
  if (nu.nodes.empty() || nu.nodes.size() != nu.weights.size())
    throw DomainError("equilibrium: malformed nu quadrature");
  if (!(nu.b_nu > 0.0)) throw DomainError("equilibrium: nu is the zero measure");
  state_->nu = std::move(nu);
  state_->c = c;
  state_->solver = solver;
}

EquilibriumContext EquilibriumContext::finite_horizon(std::span<const double> covariance_eigenvalues,
                                                     double c_T, SolverConfig solver) {
  return EquilibriumContext(NuQuadrature::from_atoms(covariance_eigenvalues), c_T, solver);
}

EquilibriumContext EquilibriumContext::finite_horizon(const ToeplitzCovariance& R, std::size_t N,
                                                     SolverConfig solver) {
  const std::vector<double> ev = R.eigenvalues();
  return finite_horizon(ev, static_cast<double>(N) / static_cast<double>(R.dimension()), solver);
}

const EdgeSolution& EquilibriumContext::edge() const {
  std::call_once(state_->edge_once, [this] { state_->edge = edge_solve(*this); });
  return state_->edge;
}

kernels::ResolventMoments EquilibriumContext::moments(double m) const {
  const auto& nu = state_->nu;
  return kernels::resolvent_moments(nu.nodes.data(), nu.weights.data(), nu.nodes.size(),
                                    state_->c * m);
}

double x_of_m(const EquilibriumContext& ctx, double m) {
  const double lower = -1.0 / (ctx.c() * ctx.nu().b_nu);
  if (!(m > lower && m < 0.0)) {
    std::ostringstream os;
    os.precision(17);
    os << "x_of_m: m = " << m << " outside (" << lower << ", 0)";
    throw DomainError(os.str());
  }
  return x_unchecked(ctx, m);
}

EdgeSolution edge_solve(const EquilibriumContext& ctx) {
  const double c = ctx.c();
  const double lower = -1.0 / (c * ctx.nu().b_nu);
  // F(m) = m^2 int (t/(1+cmt))^2 - 1/c increases from -1/c at 0- to +inf at `lower`.
  auto negative_side = [&](double m) { return m * m * ctx.moments(m).t2_inv2 - 1.0 / c < 0.0; };
  const auto [lo, hi] = bisect(lower, 0.0, ctx.solver(), negative_side);
  if (lo == lower || hi == 0.0)
    throw ConvergenceError("edge_solve: bracket failure, F(m) does not change sign (degenerate nu)");
  if (hi - lo > ctx.solver().abs_tol)
    throw ConvergenceError("edge_solve: bisection did not reach abs_tol within max_iter");
  EdgeSolution e;
  e.m_b = 0.5 * (lo + hi);
  e.b = x_unchecked(ctx, e.m_b);
  return e;
}

double m_of_x(const EquilibriumContext& ctx, double x) {
  require_above_edge(ctx, x);
  return m_solve(ctx, x);
}

double m_tilde_of_x(const EquilibriumContext& ctx, double x) {
  const double c = ctx.c();
  return c * m_of_x(ctx, x) - (1.0 - c) / x;
}

double delta(const EquilibriumContext& ctx, double x) {
  const double m = m_of_x(ctx, x);
  return 1.0 - ctx.c() * m * m * ctx.moments(m).t2_inv2;
}

double m_prime(const EquilibriumContext& ctx, double x) {
  const double m = m_of_x(ctx, x);
  const double d = 1.0 - ctx.c() * m * m * ctx.moments(m).t2_inv2;
  return m * m / d;
}

double g_of_x(const EquilibriumContext& ctx, double x) {
  const double c = ctx.c();
  const double m = m_of_x(ctx, x);
  const double mt = c * m - (1.0 - c) / x;
  return x * m * mt;
}

double g_prime(const EquilibriumContext& ctx, double x) {
  const double c = ctx.c();
  const double m = m_of_x(ctx, x);
  const double d = 1.0 - c * m * m * ctx.moments(m).t2_inv2;
  const double mp = m * m / d;
  return c * m * m + 2.0 * x * c * m * mp - (1.0 - c) * mp;
}

double detectability_threshold(const EquilibriumContext& ctx) {
  const double m_b = ctx.edge().m_b;
  return 1.0 / (-m_b * ctx.moments(m_b).inv1);
}

double spike_location(const EquilibriumContext& ctx, double p) {
  const double p_lim = detectability_threshold(ctx);
  if (!(p > p_lim)) {
    std::ostringstream os;
    os.precision(17);
    os << "spike_location: p = " << p << " is subcritical (p_lim = " << p_lim << ")";
    throw SubcriticalError(os.str());
  }
  const double b = ctx.edge().b;
  const auto& cfg = ctx.solver();
  double step = std::max(1.0, b);
  double hi = b + step;
  int grow = 0;
  while (p * g_unchecked(ctx, hi) >= 1.0) {
    if (++grow > cfg.max_iter) throw ConvergenceError("spike_location: upper bracket not found");
    step *= cfg.bracket_expansion;
    hi = b + step;
  }
  auto below = [&](double x) { return p * g_unchecked(ctx, x) < 1.0; };
  const auto [lo, up] = bisect(b, hi, cfg, below);
  if (up - lo > cfg.abs_tol * std::max(1.0, up))
    throw ConvergenceError("spike_location: bisection did not reach abs_tol within max_iter");
  return 0.5 * (lo + up);
}

EquilibriumContext finite_horizon(std::span<const double> covariance_eigenvalues, double c_T,
                                  SolverConfig solver) {
  return EquilibriumContext::finite_horizon(covariance_eigenvalues, c_T, solver);
}

std::vector<double> limiting_density(const EquilibriumContext& ctx, std::span<const double> grid) {
  using C = std::complex<double>;
  const auto& nu = ctx.nu();
  const double c = ctx.c();
  const auto& cfg = ctx.solver();
  const std::size_t n = nu.nodes.size();

  // I(m) = int t/(1+cmt) and its derivative -c int t^2/(1+cmt)^2.
  auto integrals = [&](C m, C& I, C& dI) {
    I = 0.0;
    dI = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = nu.nodes[i];
      const C d = 1.0 / (1.0 + c * m * t);
      I += nu.weights[i] * t * d;
      dI -= nu.weights[i] * c * t * t * d * d;
    }
  };

  // Solves x(m) = z for m in C+ starting from m; returns the final residual
  // |1/(I(m) - z) - m| and leaves the iterate in m.
  auto solve = [&](C z, C& m) {
    C I, dI;
    integrals(m, I, dI);
    C target = 1.0 / (I - z);
    double residual = std::abs(target - m);
    const auto done = [&](double r, C mm) { return r < cfg.abs_tol * std::max(1.0, std::abs(mm)); };

    // Damped fixed point m <- (1-w) m + w / (I(m) - z), kept in C+.
    double omega = 1.0;
    for (int it = 0; it < std::min(cfg.max_iter, kFixedPointSweeps) && !done(residual, m); ++it) {
      C next = (1.0 - omega) * m + omega * target;
      if (!(next.imag() > 0.0)) next = C(next.real(), std::abs(next.imag()) + z.imag());
      integrals(next, I, dI);
      const C ntarget = 1.0 / (I - z);
      const double nres = std::abs(ntarget - next);
      if (nres > residual) omega = std::max(0.5 * omega, 1e-3);
      m = next;
      target = ntarget;
      residual = nres;
    }

    // Newton on F(m) = -1/m + I(m) - z with backtracking on |F| inside C+.
    integrals(m, I, dI);
    C F = -1.0 / m + I - z;
    for (int it = 0; it < cfg.max_iter && !done(residual, m); ++it) {
      const C dF = 1.0 / (m * m) + dI;
      C step = F / dF;
      bool accepted = false;
      for (int h = 0; h < 60; ++h, step *= 0.5) {
        const C next = m - step;
        if (!(next.imag() > 0.0)) continue;
        C nI, ndI;
        integrals(next, nI, ndI);
        const C nF = -1.0 / next + nI - z;
        if (std::abs(nF) < std::abs(F) || h == 59) {
          m = next;
          I = nI;
          dI = ndI;
          F = nF;
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
      residual = std::abs(1.0 / (I - z) - m);
      if (std::abs(step) < 1e-16 * std::abs(m)) break;  // stagnated at machine precision
    }
    return residual;
  };
  const double accept = 1e-9;

  std::vector<double> out;
  out.reserve(grid.size());
  C warm(0.0, 0.0);
  for (double x : grid) {
    if (!(x > 0.0)) throw DomainError("limiting_density: grid points must be > 0");
    const C z(x, kDensityEta);
    C m = (warm.imag() > 0.0) ? warm : C(-1.0, 0.0) / z;
    double residual = solve(z, m);
    if (!(residual < accept * std::max(1.0, std::abs(m))) || !(m.imag() > 0.0)) {
      // Continuation in eta: far from the real axis the fixed point contracts;
      // walk down to the target eta from there.
      m = C(-1.0, 0.0) / C(x, 1.0);
      for (double eta = 1.0; eta >= kDensityEta * 0.999; eta *= 0.1) residual = solve(C(x, eta), m);
    }
    if (!(residual < accept * std::max(1.0, std::abs(m))) || !(m.imag() > 0.0)) {
      std::ostringstream os;
      os.precision(17);
      os << "limiting_density: no convergence at x = " << x << " (residual " << residual << ")";
      throw ConvergenceError(os.str());
    }
    warm = m;
    out.push_back(m.imag() / std::numbers::pi);
  }
  return out;
}

}  // namespace spectre
