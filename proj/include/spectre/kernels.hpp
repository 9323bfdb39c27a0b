#pragma once

// Data-parallel inner loops shared by the solvers and estimators. Each kernel
// has a scalar reference version and, on x86-64, an AVX2 version; the public
// entry points dispatch once per process based on the host CPU.

#include <cstddef>

namespace spectre::kernels {

/// Weighted resolvent sums for a discrete measure sum_i w_i delta_{t_i},
/// with d_i = 1 / (1 + s t_i).
struct ResolventMoments {
  double inv1 = 0;     // sum w d
  double t_inv1 = 0;   // sum w t d
  double inv2 = 0;     // sum w d^2
  double t_inv2 = 0;   // sum w t d^2
  double t2_inv2 = 0;  // sum w t^2 d^2
};

/// Sums of 1/(l - x) and 1/(l - x)^2 over a set of eigenvalues.
struct StieltjesSums {
  double s1 = 0;
  double s2 = 0;
};

enum class Isa { scalar, avx2 };

ResolventMoments resolvent_moments(const double* t, const double* w, std::size_t n, double s);
StieltjesSums stieltjes_sums(const double* lambda, std::size_t n, double x);
/// |sum_n conj(h_n) u_n|^2 for split real/imaginary arrays.
double projection_power(const double* h_re, const double* h_im, const double* u_re,
                        const double* u_im, std::size_t n);

/// ISA used by the dispatching entry points. Chosen on first use; the
/// environment variable SPECTRE_SIMD=scalar forces the reference path.
Isa active_isa();
const char* isa_name(Isa isa);
bool avx2_supported();

namespace scalar {
ResolventMoments resolvent_moments(const double* t, const double* w, std::size_t n, double s);
StieltjesSums stieltjes_sums(const double* lambda, std::size_t n, double x);
double projection_power(const double* h_re, const double* h_im, const double* u_re,
                        const double* u_im, std::size_t n);
}  // namespace scalar

#if defined(SPECTRE_HAVE_AVX2)
namespace avx2 {
ResolventMoments resolvent_moments(const double* t, const double* w, std::size_t n, double s);
StieltjesSums stieltjes_sums(const double* lambda, std::size_t n, double x);
double projection_power(const double* h_re, const double* h_im, const double* u_re,
                        const double* u_im, std::size_t n);
}  // namespace avx2
#endif

}  // namespace spectre::kernels
