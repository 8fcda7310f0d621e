// Compiled with -mavx2 -mfma; only reached after the dispatcher has checked CPUID.

#include <immintrin.h>

#include <cmath>
#include <cstddef>
#include <cstdint>

#include "kernels.hpp"

namespace qgraph::simd::avx2 {
namespace {

constexpr double kLog2e = 1.4426950408889634074;
constexpr double kLn2Hi = 6.93147180369123816490e-01;
constexpr double kLn2Lo = 1.90821492927058770002e-10;
// 2^52 + 2^51: adding it puts a small integer-valued double into the low mantissa bits
constexpr double kMagic = 6755399441055744.0;

inline __m256d exp4(__m256d x) {
  const __m256d hi = _mm256_set1_pd(709.0);
  const __m256d lo = _mm256_set1_pd(-708.0);
  const __m256d underflow = _mm256_cmp_pd(x, lo, _CMP_LT_OQ);
  x = _mm256_min_pd(_mm256_max_pd(x, lo), hi);

  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(kLog2e)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, _mm256_set1_pd(kLn2Hi), x);
  r = _mm256_fnmadd_pd(n, _mm256_set1_pd(kLn2Lo), r);

  // Taylor polynomial of degree 13 on |r| <= ln2/2
  __m256d p = _mm256_set1_pd(1.0 / 6227020800.0);
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 479001600.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 39916800.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 3628800.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 362880.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 40320.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 5040.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 720.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 120.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 24.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 6.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(0.5));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));

  const __m256d magic = _mm256_set1_pd(kMagic);
  const __m256i ni = _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(n, magic)),
                                      _mm256_castpd_si256(magic));
  const __m256i bits = _mm256_slli_epi64(_mm256_add_epi64(ni, _mm256_set1_epi64x(1023)), 52);
  const __m256d result = _mm256_mul_pd(p, _mm256_castsi256_pd(bits));
  return _mm256_andnot_pd(underflow, result);
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline __m256d gauss4(__m256d xv, __m256d shift, __m256d sign, __m256d neg_inv4t) {
  const __m256d a = _mm256_fmadd_pd(sign, xv, shift);
  return exp4(_mm256_mul_pd(_mm256_mul_pd(a, a), neg_inv4t));
}

void exp_impl(std::span<const double> in, std::span<double> out) {
  std::size_t i = 0;
  for (; i + 4 <= in.size(); i += 4) _mm256_storeu_pd(out.data() + i, exp4(_mm256_loadu_pd(in.data() + i)));
  for (; i < in.size(); ++i) out[i] = std::exp(in[i]);
}

double dot_impl(std::span<const double> a, std::span<const double> b) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= a.size(); i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i), acc);
  double s = hsum(acc);
  for (; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double gaussian_weighted_sum_impl(std::span<const double> x, std::span<const double> w,
                                  double shift, double sign, double inv4t) {
  const __m256d vs = _mm256_set1_pd(shift);
  const __m256d vsign = _mm256_set1_pd(sign);
  const __m256d vk = _mm256_set1_pd(-inv4t);
  __m256d acc = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= x.size(); j += 4) {
    const __m256d g = gauss4(_mm256_loadu_pd(x.data() + j), vs, vsign, vk);
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(w.data() + j), g, acc);
  }
  double s = hsum(acc);
  for (; j < x.size(); ++j) {
    const double a = shift + sign * x[j];
    s += w[j] * std::exp(-a * a * inv4t);
  }
  return s;
}

void gaussian_accumulate_impl(std::span<double> out, std::span<const double> x, double shift,
                              double sign, double inv4t, double coef) {
  const __m256d vs = _mm256_set1_pd(shift);
  const __m256d vsign = _mm256_set1_pd(sign);
  const __m256d vk = _mm256_set1_pd(-inv4t);
  const __m256d vc = _mm256_set1_pd(coef);
  std::size_t j = 0;
  for (; j + 4 <= x.size(); j += 4) {
    const __m256d g = gauss4(_mm256_loadu_pd(x.data() + j), vs, vsign, vk);
    _mm256_storeu_pd(out.data() + j, _mm256_fmadd_pd(vc, g, _mm256_loadu_pd(out.data() + j)));
  }
  for (; j < x.size(); ++j) {
    const double a = shift + sign * x[j];
    out[j] += coef * std::exp(-a * a * inv4t);
  }
}

inline __m256d table4(const PanelTable& table, __m256d arg) {
  const __m256d absmask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  const __m256d ax = _mm256_and_pd(arg, absmask);
  const __m256d inside = _mm256_cmp_pd(ax, _mm256_set1_pd(table.x_end()), _CMP_LT_OQ);
  const __m256d width = _mm256_set1_pd(table.width);
  __m256d pf = _mm256_floor_pd(_mm256_div_pd(ax, width));
  pf = _mm256_min_pd(pf, _mm256_set1_pd(table.npanels - 1));
  pf = _mm256_and_pd(pf, inside);  // out-of-range lanes read panel 0 and are masked later
  const __m256d u = _mm256_sub_pd(
      _mm256_div_pd(_mm256_mul_pd(_mm256_set1_pd(2.0), _mm256_fnmadd_pd(pf, width, ax)), width),
      _mm256_set1_pd(1.0));

  const __m256d magic = _mm256_set1_pd(kMagic);
  const __m256i pi = _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(pf, magic)),
                                      _mm256_castpd_si256(magic));
  const __m256i base = _mm256_mul_epi32(pi, _mm256_set1_epi64x(table.ncoef));

  const __m256d two_u = _mm256_add_pd(u, u);
  __m256d b1 = _mm256_setzero_pd();
  __m256d b2 = _mm256_setzero_pd();
  for (int k = table.ncoef - 1; k >= 1; --k) {
    const __m256i idx = _mm256_add_epi64(base, _mm256_set1_epi64x(k));
    const __m256d ck = _mm256_i64gather_pd(table.coeffs, idx, 8);
    const __m256d b0 = _mm256_sub_pd(_mm256_fmadd_pd(two_u, b1, ck), b2);
    b2 = b1;
    b1 = b0;
  }
  const __m256d c0 = _mm256_i64gather_pd(table.coeffs, base, 8);
  const __m256d val = _mm256_sub_pd(_mm256_fmadd_pd(u, b1, c0), b2);
  return _mm256_and_pd(val, inside);
}

double table_weighted_sum_impl(const PanelTable& table, std::span<const double> x,
                               std::span<const double> w, double shift, double sign) {
  const __m256d vs = _mm256_set1_pd(shift);
  const __m256d vsign = _mm256_set1_pd(sign);
  __m256d acc = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= x.size(); j += 4) {
    const __m256d arg = _mm256_fmadd_pd(vsign, _mm256_loadu_pd(x.data() + j), vs);
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(w.data() + j), table4(table, arg), acc);
  }
  double s = hsum(acc);
  for (; j < x.size(); ++j) s += w[j] * table_eval(table, shift + sign * x[j]);
  return s;
}

void table_accumulate_impl(const PanelTable& table, std::span<double> out,
                           std::span<const double> x, double shift, double sign, double coef) {
  const __m256d vs = _mm256_set1_pd(shift);
  const __m256d vsign = _mm256_set1_pd(sign);
  const __m256d vc = _mm256_set1_pd(coef);
  std::size_t j = 0;
  for (; j + 4 <= x.size(); j += 4) {
    const __m256d arg = _mm256_fmadd_pd(vsign, _mm256_loadu_pd(x.data() + j), vs);
    _mm256_storeu_pd(out.data() + j,
                     _mm256_fmadd_pd(vc, table4(table, arg), _mm256_loadu_pd(out.data() + j)));
  }
  for (; j < x.size(); ++j) out[j] += coef * table_eval(table, shift + sign * x[j]);
}

}  // namespace

const KernelSet& kernel_set() {
  static const KernelSet set{exp_impl,
                             dot_impl,
                             gaussian_weighted_sum_impl,
                             gaussian_accumulate_impl,
                             table_weighted_sum_impl,
                             table_accumulate_impl};
  return set;
}

}  // namespace qgraph::simd::avx2
