#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "spectre/kernels.hpp"

using namespace spectre::kernels;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); }

struct Data {
  std::vector<double> a, b, c, d;
};

Data make_data(std::size_t n, unsigned seed) {
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<double> u(0.05, 4.0), s(-1.0, 1.0);
  Data x;
  for (std::size_t i = 0; i < n; ++i) {
    x.a.push_back(u(g));
    x.b.push_back(u(g) / static_cast<double>(n));
    x.c.push_back(s(g));
    x.d.push_back(s(g));
  }
  return x;
}

}  // namespace

TEST_CASE("reference resolvent sums match a direct evaluation") {
  const std::vector<double> t{0.5, 1.0, 2.0}, w{0.25, 0.5, 0.25};
  const double s = -0.3;
  double i1 = 0, ti1 = 0, i2 = 0, ti2 = 0, t2i2 = 0;
  for (int k = 0; k < 3; ++k) {
    const double den = 1.0 + s * t[k];
    i1 += w[k] / den;
    ti1 += w[k] * t[k] / den;
    i2 += w[k] / (den * den);
    ti2 += w[k] * t[k] / (den * den);
    t2i2 += w[k] * t[k] * t[k] / (den * den);
  }
  const auto r = scalar::resolvent_moments(t.data(), w.data(), 3, s);
  CHECK(r.inv1 == doctest::Approx(i1).epsilon(1e-15));
  CHECK(r.t_inv1 == doctest::Approx(ti1).epsilon(1e-15));
  CHECK(r.inv2 == doctest::Approx(i2).epsilon(1e-15));
  CHECK(r.t_inv2 == doctest::Approx(ti2).epsilon(1e-15));
  CHECK(r.t2_inv2 == doctest::Approx(t2i2).epsilon(1e-15));
}

TEST_CASE("reference Stieltjes and projection sums") {
  const std::vector<double> l{2.0, 4.0};
  const auto s = scalar::stieltjes_sums(l.data(), 2, 0.0);
  CHECK(s.s1 == doctest::Approx(0.75));
  CHECK(s.s2 == doctest::Approx(0.25 + 0.0625));
  // h = (1, i), u = (i, 1): conj(h).u = i + (-i)(1) = 0
  const double hr[2] = {1, 0}, hi[2] = {0, 1}, ur[2] = {0, 1}, ui[2] = {1, 0};
  CHECK(scalar::projection_power(hr, hi, ur, ui, 2) == doctest::Approx(0.0));
  // u = h gives |h|^4 = 4
  CHECK(scalar::projection_power(hr, hi, hr, hi, 2) == doctest::Approx(4.0));
}

TEST_CASE("dispatcher reports a usable ISA") {
  const Isa isa = active_isa();
  if (isa == Isa::avx2) CHECK(avx2_supported());
  CHECK(std::string(isa_name(isa)).size() > 0);
  const auto x = make_data(33, 7);
  const auto r = resolvent_moments(x.a.data(), x.b.data(), x.a.size(), -0.2);
  const auto q = scalar::resolvent_moments(x.a.data(), x.b.data(), x.a.size(), -0.2);
  CHECK(rel(r.t2_inv2, q.t2_inv2) < 1e-13);
}

#if defined(SPECTRE_HAVE_AVX2)
TEST_CASE("AVX2 kernels agree with the scalar reference") {
  if (!avx2_supported()) return;
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 17u, 64u, 2048u, 2051u}) {
    const auto x = make_data(n, static_cast<unsigned>(n) + 11);
    for (double s : {-0.24, -0.05, 0.0, 0.7}) {
      const auto a = scalar::resolvent_moments(x.a.data(), x.b.data(), n, s);
      const auto b = avx2::resolvent_moments(x.a.data(), x.b.data(), n, s);
      CHECK(rel(a.inv1, b.inv1) < 1e-13);
      CHECK(rel(a.t_inv1, b.t_inv1) < 1e-13);
      CHECK(rel(a.inv2, b.inv2) < 1e-13);
      CHECK(rel(a.t_inv2, b.t_inv2) < 1e-13);
      CHECK(rel(a.t2_inv2, b.t2_inv2) < 1e-13);
    }
    for (double xv : {-1.0, 0.01, 10.0}) {
      const auto a = scalar::stieltjes_sums(x.a.data(), n, xv);
      const auto b = avx2::stieltjes_sums(x.a.data(), n, xv);
      CHECK(rel(a.s1, b.s1) < 1e-12);
      CHECK(rel(a.s2, b.s2) < 1e-12);
    }
    const double pa = scalar::projection_power(x.c.data(), x.d.data(), x.d.data(), x.c.data(), n);
    const double pb = avx2::projection_power(x.c.data(), x.d.data(), x.d.data(), x.c.data(), n);
    CHECK(rel(pa, pb) < 1e-12);
  }
}
#endif
