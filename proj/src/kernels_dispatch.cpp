#include <cstdlib>
#include <cstring>

#include "spectre/kernels.hpp"

namespace spectre::kernels {
namespace {

struct Table {
  Isa isa;
  ResolventMoments (*moments)(const double*, const double*, std::size_t, double);
  StieltjesSums (*stieltjes)(const double*, std::size_t, double);
  double (*projection)(const double*, const double*, const double*, const double*, std::size_t);
};

Table select() {
  Table scalar_table{Isa::scalar, &scalar::resolvent_moments, &scalar::stieltjes_sums,
                     &scalar::projection_power};
  const char* env = std::getenv("SPECTRE_SIMD");
  if (env && std::strcmp(env, "scalar") == 0) return scalar_table;
#if defined(SPECTRE_HAVE_AVX2)
  if (avx2_supported())
    return Table{Isa::avx2, &avx2::resolvent_moments, &avx2::stieltjes_sums,
                 &avx2::projection_power};
#endif
  return scalar_table;
}

const Table& table() {
  static const Table t = select();
  return t;
}

}  // namespace

bool avx2_supported() {
#if defined(SPECTRE_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa active_isa() { return table().isa; }

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

ResolventMoments resolvent_moments(const double* t, const double* w, std::size_t n, double s) {
  return table().moments(t, w, n, s);
}

StieltjesSums stieltjes_sums(const double* lambda, std::size_t n, double x) {
  return table().stieltjes(lambda, n, x);
}

double projection_power(const double* h_re, const double* h_im, const double* u_re,
                        const double* u_im, std::size_t n) {
  return table().projection(h_re, h_im, u_re, u_im, n);
}

}  // namespace spectre::kernels
