// Built with -mavx2 -mfma. Keep this file free of library templates so no
// AVX2-compiled inline code can leak into the rest of the program.
#include <immintrin.h>

#include "spectre/kernels.hpp"

namespace spectre::kernels::avx2 {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

}  // namespace

ResolventMoments resolvent_moments(const double* t, const double* w, std::size_t n, double s) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d vs = _mm256_set1_pd(s);
  __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd(), a2 = _mm256_setzero_pd();
  __m256d a3 = _mm256_setzero_pd(), a4 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vt = _mm256_loadu_pd(t + i);
    const __m256d vw = _mm256_loadu_pd(w + i);
    const __m256d d = _mm256_div_pd(one, _mm256_fmadd_pd(vs, vt, one));
    const __m256d wd = _mm256_mul_pd(vw, d);
    const __m256d wtd = _mm256_mul_pd(wd, vt);
    const __m256d td = _mm256_mul_pd(vt, d);
    a0 = _mm256_add_pd(a0, wd);
    a1 = _mm256_add_pd(a1, wtd);
    a2 = _mm256_fmadd_pd(wd, d, a2);
    a3 = _mm256_fmadd_pd(wtd, d, a3);
    a4 = _mm256_fmadd_pd(wtd, td, a4);
  }
  ResolventMoments r{hsum(a0), hsum(a1), hsum(a2), hsum(a3), hsum(a4)};
  for (; i < n; ++i) {
    const double d = 1.0 / (1.0 + s * t[i]);
    const double wd = w[i] * d;
    const double wtd = wd * t[i];
    r.inv1 += wd;
    r.t_inv1 += wtd;
    r.inv2 += wd * d;
    r.t_inv2 += wtd * d;
    r.t2_inv2 += wtd * t[i] * d;
  }
  return r;
}

StieltjesSums stieltjes_sums(const double* lambda, std::size_t n, double x) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d vx = _mm256_set1_pd(x);
  __m256d s1 = _mm256_setzero_pd(), s2 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_div_pd(one, _mm256_sub_pd(_mm256_loadu_pd(lambda + i), vx));
    s1 = _mm256_add_pd(s1, d);
    s2 = _mm256_fmadd_pd(d, d, s2);
  }
  StieltjesSums r{hsum(s1), hsum(s2)};
  for (; i < n; ++i) {
    const double d = 1.0 / (lambda[i] - x);
    r.s1 += d;
    r.s2 += d * d;
  }
  return r;
}

double projection_power(const double* h_re, const double* h_im, const double* u_re,
                        const double* u_im, std::size_t n) {
  __m256d re = _mm256_setzero_pd(), im = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d hr = _mm256_loadu_pd(h_re + i);
    const __m256d hi = _mm256_loadu_pd(h_im + i);
    const __m256d ur = _mm256_loadu_pd(u_re + i);
    const __m256d ui = _mm256_loadu_pd(u_im + i);
    re = _mm256_fmadd_pd(hr, ur, re);
    re = _mm256_fmadd_pd(hi, ui, re);
    im = _mm256_fmadd_pd(hr, ui, im);
    im = _mm256_fnmadd_pd(hi, ur, im);
  }
  double sr = hsum(re), si = hsum(im);
  for (; i < n; ++i) {
    sr += h_re[i] * u_re[i] + h_im[i] * u_im[i];
    si += h_re[i] * u_im[i] - h_im[i] * u_re[i];
  }
  return sr * sr + si * si;
}

}  // namespace spectre::kernels::avx2
