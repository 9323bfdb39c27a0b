#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <thread>

#include "spectre/equilibrium.hpp"
#include "spectre/errors.hpp"
#include "spectre/montecarlo.hpp"

using namespace spectre;

namespace {

EquilibriumContext white(double c) { return EquilibriumContext(build_nu(ArmaSpec()), c); }
EquilibriumContext ar(double a, double c) { return EquilibriumContext(build_nu(ArmaSpec::ar1(a)), c); }

// Marchenko-Pastur Stieltjes transform on the real axis right of the support.
double mp_stieltjes(double c, double x) {
  return ((1.0 - c) - x + std::sqrt((x - 1.0 - c) * (x - 1.0 - c) - 4.0 * c)) / (2.0 * c * x);
}

double mp_density(double c, double x) {
  const double a = std::pow(1.0 - std::sqrt(c), 2), b = std::pow(1.0 + std::sqrt(c), 2);
  if (x <= a || x >= b) return 0.0;
  return std::sqrt((b - x) * (x - a)) / (2.0 * std::numbers::pi * c * x);
}

double largest_noise_eigenvalue(const NoiseGenerator& gen, std::size_t N, Rng& rng, int K = 0,
                                double p = 0.0) {
  Scenario sc;
  sc.N = N;
  sc.T = gen.covariance().dimension();
  sc.K = K;
  sc.thetas_deg.assign(static_cast<std::size_t>(K), 10.0);
  sc.amplitudes.assign(static_cast<std::size_t>(K), std::sqrt(p));
  return sample_gram_eigs(synth_observation(sc, gen, rng), false).eigenvalues[0];
}

}  // namespace

TEST_CASE("x(m) closed form and monotone growth") {
  CHECK(x_of_m(white(0.25), -4.0 / 3.0) == doctest::Approx(2.25).epsilon(1e-14));
  const auto c1 = white(1.0);
  double prev = x_of_m(c1, -0.1);
  for (double m : {-0.01, -0.001, -1e-5, -1e-8}) {
    const double x = x_of_m(c1, m);
    CHECK(x > prev);
    prev = x;
  }
  CHECK(prev > 1e7);
  CHECK(std::isfinite(x_of_m(ar(0.6, 0.5), -0.1)));
  CHECK_THROWS_AS(x_of_m(ar(0.6, 0.5), -0.6), DomainError);  // below -1/(c b_nu) = -0.5
  CHECK_THROWS_AS(x_of_m(white(0.5), 0.1), DomainError);
}

TEST_CASE("white-noise edge and threshold closed forms") {
  for (double c : {0.1, 0.25, 0.5, 1.0, 2.0}) {
    const auto ctx = white(c);
    const auto e = ctx.edge();
    CHECK(e.b == doctest::Approx(std::pow(1 + std::sqrt(c), 2)).epsilon(1e-10));
    CHECK(e.m_b == doctest::Approx(-1.0 / (c + std::sqrt(c))).epsilon(1e-10));
    CHECK(std::abs(detectability_threshold(ctx) - std::sqrt(c)) < 1e-8);
  }
  CHECK(std::abs(white(0.5).edge().b - std::pow(1 + std::sqrt(0.5), 2)) < 1e-8);
}

TEST_CASE("edge equation residual and stationarity for coloured noise") {
  for (double a : {0.0, 0.3, 0.6, 0.8}) {
    for (double c : {0.2, 0.5, 1.5}) {
      const auto ctx = ar(a, c);
      const auto e = ctx.edge();
      CHECK(e.m_b < 0.0);
      CHECK(e.m_b > -1.0 / (c * ctx.nu().b_nu));
      const auto mo = ctx.moments(e.m_b);
      CHECK(std::abs(e.m_b * e.m_b * mo.t2_inv2 - 1.0 / c) < 1e-9);
      CHECK(std::abs(1.0 / (e.m_b * e.m_b) - c * mo.t2_inv2) < 1e-8 / (e.m_b * e.m_b));
      CHECK(x_of_m(ctx, e.m_b) == doctest::Approx(e.b).epsilon(1e-14));
    }
  }
}

TEST_CASE("m(x) inverts x(m)") {
  const auto ctx = white(0.5);
  const double m = m_of_x(ctx, 10.0);
  CHECK(std::abs(x_of_m(ctx, m) - 10.0) < 1e-10);
  CHECK(m > ctx.edge().m_b);
  CHECK(m < 0.0);
  CHECK(m_of_x(white(0.25), 4.0) == doctest::Approx(mp_stieltjes(0.25, 4.0)).epsilon(1e-10));
  for (double x : {3.0, 5.0, 20.0}) CHECK(m_of_x(ctx, x) == doctest::Approx(mp_stieltjes(0.5, x)).epsilon(1e-10));
  CHECK(1e6 * m_of_x(ctx, 1e6) == doctest::Approx(-1.0).epsilon(1e-5));
  CHECK_THROWS_AS(m_of_x(ctx, ctx.edge().b), DomainError);

  std::mt19937_64 g(5);
  for (double a : {0.0, 0.6}) {
    const auto cx = ar(a, 0.5);
    std::uniform_real_distribution<double> u(cx.edge().m_b, 0.0);
    for (int i = 0; i < 50; ++i) {
      double mm = u(g);
      if (mm - cx.edge().m_b < 1e-6 || mm > -1e-6) continue;
      const double x = x_of_m(cx, mm);
      if (x <= cx.edge().b + 1e-10) continue;
      CHECK(std::abs(m_of_x(cx, x) - mm) < 1e-9);
    }
  }
}

TEST_CASE("m-tilde") {
  const auto c1 = white(1.0);
  CHECK(m_tilde_of_x(c1, 7.0) == doctest::Approx(m_of_x(c1, 7.0)).epsilon(1e-15));
  const auto c5 = white(0.5);
  const double x = 10.0, m = m_of_x(c5, x);
  const double direct = -1.0 / (x * (1.0 + 0.5 * m));
  CHECK(std::abs(m_tilde_of_x(c5, x) - direct) < 1e-10);
  CHECK(1e6 * m_tilde_of_x(ar(0.6, 0.5), 1e6) == doctest::Approx(-1.0).epsilon(1e-5));
}

TEST_CASE("g is positive and decreasing, g' matches finite differences") {
  const auto ctx = white(0.5);
  const double b = ctx.edge().b;
  double prev = g_of_x(ctx, b + 0.01);
  CHECK(prev > 0.0);
  for (int i = 1; i < 100; ++i) {
    const double x = b + 0.01 + 50.0 * i / 99.0;
    const double g = g_of_x(ctx, x);
    CHECK(g < prev);
    CHECK(g > 0.0);
    prev = g;
  }
  CHECK(1e7 * g_of_x(ctx, 1e7) == doctest::Approx(1.0).epsilon(1e-5));
  for (double a : {0.0, 0.6}) {
    const auto cx = ar(a, 0.5);
    const double x = cx.edge().b + 1.0, h = 1e-5;
    const double fd = (g_of_x(cx, x + h) - g_of_x(cx, x - h)) / (2 * h);
    CHECK(g_prime(cx, x) == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("delta limits and the m' identity") {
  const auto ctx = white(0.5);
  const double b = ctx.edge().b;
  CHECK(delta(ctx, b + 1e-6) < 0.01);
  CHECK(delta(ctx, b + 1e-6) > 0.0);
  CHECK(std::abs(delta(ctx, 1e6) - 1.0) < 1e-4);
  for (double a : {0.0, 0.6}) {
    const auto cx = ar(a, 0.5);
    const double x = cx.edge().b + 0.7, h = 1e-5;
    const double mp_fd = (m_of_x(cx, x + h) - m_of_x(cx, x - h)) / (2 * h);
    const double m = m_of_x(cx, x);
    CHECK(std::abs(delta(cx, x) * mp_fd - m * m) < 1e-8);
    CHECK(m_prime(cx, x) == doctest::Approx(mp_fd).epsilon(1e-6));
  }
}

TEST_CASE("spike location") {
  const auto ctx = white(0.5);
  CHECK(std::abs(spike_location(ctx, 1.5) - 10.0 / 3.0) < 1e-8);
  for (double p : {1.0, 2.0, 4.0, 9.0}) {
    const double closed = (1 + p) * (0.5 + p) / p;
    CHECK(std::abs(spike_location(ctx, p) - closed) < 1e-8);
  }
  const double pl = detectability_threshold(ctx);
  CHECK(spike_location(ctx, pl * (1 + 1e-9)) == doctest::Approx(ctx.edge().b).epsilon(1e-5));
  CHECK(spike_location(ctx, 1e6) / 1e6 == doctest::Approx(1.0).epsilon(1e-5));
  CHECK_THROWS_AS(spike_location(ctx, pl), SubcriticalError);
  CHECK_THROWS_AS(spike_location(ctx, 0.5 * pl), SubcriticalError);

  const auto cx = ar(0.6, 0.5);
  CHECK(detectability_threshold(cx) > std::sqrt(0.5));
  const double p_lim = detectability_threshold(cx);
  double r_prev = cx.edge().b;
  for (double f : {1.01, 1.2, 2.0, 5.0}) {
    const double r = spike_location(cx, f * p_lim);
    CHECK(r > r_prev);
    CHECK(f * p_lim * g_of_x(cx, r) == doctest::Approx(1.0).epsilon(1e-9));
    r_prev = r;
  }
}

TEST_CASE("finite-horizon contexts") {
  const std::vector<double> ones(64, 1.0);
  const auto fh = EquilibriumContext::finite_horizon(ones, 0.5);
  const auto w = white(0.5);
  CHECK(fh.edge().b == w.edge().b);
  CHECK(spike_location(fh, 2.0) == spike_location(w, 2.0));

  const auto spec = ArmaSpec::ar1(0.6);
  const auto R = toeplitz_covariance(spec, 200);
  const auto ctx_T = EquilibriumContext::finite_horizon(R, 100);
  CHECK(ctx_T.c() == 0.5);
  CHECK(std::abs(spike_location(ctx_T, 4.0) - spike_location(ar(0.6, 0.5), 4.0)) < 0.05);

  const auto same = EquilibriumContext(build_nu(spec), 0.5);
  CHECK(same.edge().b == ar(0.6, 0.5).edge().b);
}

TEST_CASE("lazy edge is solved once under concurrent first access") {
  const auto ctx = ar(0.6, 0.5);
  std::vector<double> seen(8);
  std::vector<std::thread> th;
  for (int i = 0; i < 8; ++i) th.emplace_back([&, i] { seen[static_cast<std::size_t>(i)] = ctx.edge().b; });
  for (auto& t : th) t.join();
  for (double b : seen) CHECK(b == seen[0]);
  const auto copy = ctx;
  CHECK(&copy.edge() == &ctx.edge());
}

TEST_CASE("limiting density matches Marchenko-Pastur") {
  const double c = 0.5;
  const auto ctx = white(c);
  const double a = std::pow(1 - std::sqrt(c), 2), b = std::pow(1 + std::sqrt(c), 2);
  std::vector<double> grid;
  for (double x = a + 0.05; x <= b - 0.05; x += 0.01) grid.push_back(x);
  const auto f = limiting_density(ctx, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(std::abs(f[i] - mp_density(c, grid[i])) < 1e-4);

  const double out[1] = {b + 0.5};
  CHECK(limiting_density(ctx, out)[0] < 1e-5);

  std::vector<double> fine;
  const double h = 1e-3;
  for (double x = 1e-3; x < b + 0.2; x += h) fine.push_back(x);
  const auto ff = limiting_density(ctx, fine);
  double mass = 0;
  for (double v : ff) mass += v * h;
  CHECK(mass == doctest::Approx(1.0).epsilon(5e-3));
}

TEST_CASE("density of coloured noise integrates to one and vanishes past b") {
  const auto ctx = ar(0.6, 0.5);
  const double b = ctx.edge().b;
  std::vector<double> fine;
  const double h = 2e-3;
  for (double x = h; x < b + 0.3; x += h) fine.push_back(x);
  const auto f = limiting_density(ctx, fine);
  double mass = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    CHECK(f[i] >= 0.0);
    mass += f[i] * h;
    if (fine[i] > b + 0.05) CHECK(f[i] < 1e-4);
  }
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("density for c > 1 is finite (smoke)") {
  const auto ctx = white(2.0);
  const std::vector<double> grid{0.1, 0.5, 1.0, 3.0, 5.0};
  for (double v : limiting_density(ctx, grid)) {
    CHECK(std::isfinite(v));
    CHECK(v >= 0.0);
  }
}

TEST_CASE("Monte Carlo: largest white-noise eigenvalue sits at the edge") {
  const double b = white(0.5).edge().b;
  const NoiseGenerator gen(ArmaSpec(), 800);
  int inside = 0;
  const int trials = 10;
  for (int i = 0; i < trials; ++i) {
    Rng r = substream(99, 0, static_cast<std::uint64_t>(i));
    inside += std::abs(largest_noise_eigenvalue(gen, 400, r) - b) <= 0.15;
  }
  CHECK(inside >= 9);
}

// With correlated noise the largest eigenvalue approaches b from below at
// the slow N^(-2/3) edge rate; check the gap shrinks and is small.
TEST_CASE("Monte Carlo: coloured-noise edge gap shrinks with N") {
  const auto spec = ArmaSpec::ar1(0.6);
  const double b = ar(0.6, 0.5).edge().b;
  double gap[2] = {0, 0};
  const std::size_t Ns[2] = {100, 400};
  const int trials = 8;
  for (int k = 0; k < 2; ++k) {
    const NoiseGenerator gen(spec, 2 * Ns[k]);
    for (int i = 0; i < trials; ++i) {
      Rng r = substream(98, static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(i));
      gap[k] += (b - largest_noise_eigenvalue(gen, Ns[k], r)) / trials;
    }
  }
  CHECK(gap[0] > gap[1]);
  CHECK(gap[1] > 0.0);
  CHECK(gap[1] < 0.25);
}

TEST_CASE("Monte Carlo: spikes separate above the threshold only") {
  const auto spec = ArmaSpec::ar1(0.6);
  const auto ctx = EquilibriumContext(build_nu(spec), 0.5);
  const double b = ctx.edge().b, p_lim = detectability_threshold(ctx);
  const NoiseGenerator gen(spec, 800), gen_w(ArmaSpec(), 800);
  double above = 0, below = 0;
  const int trials = 6;
  for (int i = 0; i < trials; ++i) {
    Rng r1 = substream(7, 1, static_cast<std::uint64_t>(i));
    Rng r2 = substream(7, 2, static_cast<std::uint64_t>(i));
    above += largest_noise_eigenvalue(gen, 400, r1, 1, 2.0 * p_lim) / trials;
    below += largest_noise_eigenvalue(gen, 400, r2, 1, 0.5 * p_lim) / trials;
  }
  CHECK(std::abs(above - spike_location(ctx, 2.0 * p_lim)) < 0.1);
  CHECK(std::abs(below - b) < 0.15);

  const auto w = white(0.5);
  double mean = 0;
  for (int i = 0; i < trials; ++i) {
    Rng r = substream(7, 3, static_cast<std::uint64_t>(i));
    mean += largest_noise_eigenvalue(gen_w, 400, r, 1, 1.5) / trials;
  }
  CHECK(std::abs(mean - 10.0 / 3.0) < 0.05);
}
