#include "spectre/kernels.hpp"

namespace spectre::kernels::scalar {

ResolventMoments resolvent_moments(const double* t, const double* w, std::size_t n, double s) {
  ResolventMoments r;
  for (std::size_t i = 0; i < n; ++i) {
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
  StieltjesSums r;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = 1.0 / (lambda[i] - x);
    r.s1 += d;
    r.s2 += d * d;
  }
  return r;
}

double projection_power(const double* h_re, const double* h_im, const double* u_re,
                        const double* u_im, std::size_t n) {
  double re = 0, im = 0;
  for (std::size_t i = 0; i < n; ++i) {
    // conj(h) * u
    re += h_re[i] * u_re[i] + h_im[i] * u_im[i];
    im += h_re[i] * u_im[i] - h_im[i] * u_re[i];
  }
  return re * re + im * im;
}

}  // namespace spectre::kernels::scalar
