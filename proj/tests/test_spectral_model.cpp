#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "spectre/errors.hpp"
#include "spectre/spectral_model.hpp"

using namespace spectre;

TEST_CASE("impulse responses") {
  const auto raw = ArmaSpec::ar1(0.6, false);
  const auto psi = impulse_response(raw);
  for (std::size_t l = 0; l < 30; ++l) CHECK(psi[l] == doctest::Approx(std::pow(0.6, l)).epsilon(1e-14));

  const ArmaSpec ma({0.5}, {}, false);
  const auto pm = impulse_response(ma);
  REQUIRE(pm.size() == 2);
  CHECK(pm[0] == 1.0);
  CHECK(pm[1] == 0.5);

  const auto unit = impulse_response(ArmaSpec::ar1(0.6));
  for (std::size_t l = 0; l < 30; ++l) CHECK(unit[l] == doctest::Approx(0.8 * std::pow(0.6, l)).epsilon(1e-13));
  double e = 0;
  for (double v : unit) e += v * v;
  CHECK(e == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("truncation keeps the discarded tail below 1e-12 of the l1 mass") {
  for (double a : {0.3, 0.6, 0.9, 0.97}) {
    const auto spec = ArmaSpec::ar1(a, false);
    const auto psi = impulse_response(spec);
    const double total = 1.0 / (1.0 - a);  // sum |a|^l
    const double kept = std::accumulate(psi.begin(), psi.end(), 0.0);
    CHECK((total - kept) / total < 1e-12);
  }
}

TEST_CASE("unstable or marginal AR polynomials are rejected") {
  CHECK_THROWS_AS(ArmaSpec::ar1(1.0), InputError);
  CHECK_THROWS_AS(ArmaSpec::ar1(-1.2), InputError);
  // (1 - 1.5 z^-1 + 0.9 z^-2): roots of modulus sqrt(0.9) < 1, stable
  CHECK_NOTHROW(ArmaSpec({}, {-1.5, 0.9}));
  // (1 - 2.5 z^-1 + z^-2) has a root at 2
  CHECK_THROWS_AS(ArmaSpec({}, {-2.5, 1.0}), InputError);
}

TEST_CASE("autocovariance") {
  const auto spec = ArmaSpec::ar1(0.6);
  CHECK(autocovariance(spec, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(autocovariance(spec, 2) == doctest::Approx(0.36).epsilon(1e-12));
  CHECK(autocovariance(spec, -3) == doctest::Approx(0.216).epsilon(1e-12));
  const ArmaSpec white;
  CHECK(autocovariance(white, 0) == 1.0);
  CHECK(autocovariance(white, 1) == 0.0);
  // MA(1) theta: r0 = 1 + th^2, r1 = th (unnormalized)
  const auto ma = ArmaSpec::from_recursion({0.4}, {}, false);
  CHECK(autocovariance(ma, 0) == doctest::Approx(1.16));
  CHECK(autocovariance(ma, 1) == doctest::Approx(0.4));
  CHECK(autocovariance(ma, 2) == doctest::Approx(0.0));
}

TEST_CASE("spectral density of normalized AR(1)") {
  const auto spec = ArmaSpec::ar1(0.6);
  CHECK(spectral_density(spec, 0.0) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(spectral_density(spec, 0.5) == doctest::Approx(0.25).epsilon(1e-12));
  const double u = 0.17;
  const double closed = 0.64 / (1.0 - 1.2 * std::cos(2 * std::numbers::pi * u) + 0.36);
  CHECK(spectral_density(spec, u) == doctest::Approx(closed).epsilon(1e-12));
  CHECK(spectral_density(ArmaSpec(), 0.3) == 1.0);
}

TEST_CASE("nu quadrature") {
  const auto w = build_nu(ArmaSpec());
  REQUIRE(w.size() == 1);
  CHECK(w.nodes[0] == 1.0);
  CHECK(w.weights[0] == 1.0);
  CHECK(w.a_nu == 1.0);
  CHECK(w.b_nu == 1.0);

  const auto nu = build_nu(ArmaSpec::ar1(0.6));
  CHECK(nu.a_nu == doctest::Approx(0.25).epsilon(1e-10));
  CHECK(nu.b_nu == doctest::Approx(4.0).epsilon(1e-10));
  CHECK(nu.moment(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(nu.moment(1) == doctest::Approx(1.0).epsilon(1e-8));
  for (double t : nu.nodes) {
    CHECK(t >= nu.a_nu - 1e-9);
    CHECK(t <= nu.b_nu + 1e-9);
  }
  // int q^2 du = sum r_k^2 = (1 + a^2) / (1 - a^2)
  CHECK(nu.moment(2) == doctest::Approx(1.36 / 0.64).epsilon(1e-8));
}

TEST_CASE("Parseval holds for assorted ARMA specs") {
  const std::vector<ArmaSpec> specs = {
      ArmaSpec::ar1(0.3), ArmaSpec::ar1(-0.7, false), ArmaSpec::from_recursion({0.5, -0.2}, {0.4}),
      ArmaSpec::from_recursion({}, {1.2, -0.5}, false), ArmaSpec::from_recursion({0.9}, {})};
  for (const auto& s : specs) {
    const auto nu = build_nu(s);
    CHECK(nu.moment(1) == doctest::Approx(autocovariance(s, 0)).epsilon(1e-8));
  }
}

TEST_CASE("quadrature convergence under doubling") {
  for (double a : {0.2, 0.5, 0.8}) {
    const auto n1 = build_nu(ArmaSpec::ar1(a, true, 2048));
    const auto n2 = build_nu(ArmaSpec::ar1(a, true, 4096));
    CHECK(std::abs(n1.moment(1) - n2.moment(1)) < 1e-8);
    CHECK(std::abs(n1.moment(2) - n2.moment(2)) < 1e-8);
  }
}

TEST_CASE("atom measures merge equal atoms") {
  const std::vector<double> atoms{1.0, 2.0, 1.0, 3.0};
  const auto q = NuQuadrature::from_atoms(atoms);
  CHECK(q.size() == 3);
  CHECK(q.moment(0) == doctest::Approx(1.0));
  CHECK(q.moment(1) == doctest::Approx(7.0 / 4.0));
  CHECK(q.a_nu == 1.0);
  CHECK(q.b_nu == 3.0);
}

TEST_CASE("Toeplitz covariance") {
  const auto R3 = toeplitz_covariance(ArmaSpec::ar1(0.6), 3);
  CHECK(R3.first_row()[0] == doctest::Approx(1.0));
  CHECK(R3.first_row()[1] == doctest::Approx(0.6));
  CHECK(R3.first_row()[2] == doctest::Approx(0.36));
  const auto I4 = toeplitz_covariance(ArmaSpec(), 4).matrix();
  CHECK((I4 - Eigen::MatrixXd::Identity(4, 4)).norm() == 0.0);

  const auto nu = build_nu(ArmaSpec::ar1(0.6));
  for (std::size_t T : {64u, 512u}) {
    const auto R = toeplitz_covariance(ArmaSpec::ar1(0.6), T);
    const auto M = R.matrix();
    CHECK((M - M.transpose()).norm() == 0.0);
    for (Eigen::Index i = 1; i < M.rows(); ++i) CHECK(M(i, i - 1) == M(0, 1));
    const auto ev = R.eigenvalues();
    CHECK(ev.front() >= nu.a_nu - 0.05);
    CHECK(ev.back() <= nu.b_nu + 0.05);
    const auto C = R.cholesky_factor();
    CHECK((C * C.transpose() - M).norm() < 1e-10 * static_cast<double>(T));
  }
  const auto R = toeplitz_covariance(ArmaSpec::ar1(0.6), 40);
  const auto W = R.inverse_sqrt();
  CHECK((W * R.matrix() * W - Eigen::MatrixXd::Identity(40, 40)).norm() < 1e-10);
  CHECK(R.mean_inverse_eigenvalue() == doctest::Approx(R.matrix().inverse().trace() / 40.0).epsilon(1e-10));
}

TEST_CASE("covariance is PSD for random stable specs up to T = 512") {
  std::mt19937_64 g(3);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  for (int k = 0; k < 12; ++k) {
    const double a1 = u(g), a2 = 0.5 * u(g), th = u(g);
    ArmaSpec s;
    try {
      s = ArmaSpec::from_recursion({th}, {a1, a2});
    } catch (const InputError&) {
      continue;
    }
    const auto ev = toeplitz_covariance(s, 512).eigenvalues();
    CHECK(ev.front() > -1e-10);
  }
}

TEST_CASE("indefinite first rows are rejected") {
  CHECK_THROWS_AS(ToeplitzCovariance({1.0, 1.5, 0.2}), ConvergenceError);
}
