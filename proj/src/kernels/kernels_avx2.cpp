// AVX2/FMA variants. This translation unit is compiled with -mavx2 -mfma and
// must only be entered after the runtime check in dispatch.cpp.
//
// Complex values are std::complex<double>, i.e. interleaved (re, im) pairs, so
// one __m256d holds two complex numbers.

#include "pixyz/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>

namespace pixyz::kernels::avx2 {
namespace {

inline const double* as_doubles(const cplx* p) { return reinterpret_cast<const double*>(p); }
inline double* as_doubles(cplx* p) { return reinterpret_cast<double*>(p); }

// [a0 a1 a2 a3] -> [a1 a0 a3 a2]
inline __m256d swap_pairs(__m256d v) { return _mm256_permute_pd(v, 0b0101); }

inline __m256d load_two(const cplx* x, int c0, int c1) {
  const __m128d lo = _mm_loadu_pd(as_doubles(x + c0));
  const __m128d hi = _mm_loadu_pd(as_doubles(x + c1));
  return _mm256_insertf128_pd(_mm256_castpd128_pd256(lo), hi, 1);
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// v0 - v1 + v2 - v3
inline double alt_sum(__m256d v) {
  const __m256d sign = _mm256_set_pd(-1.0, 1.0, -1.0, 1.0);
  return hsum(_mm256_mul_pd(v, sign));
}

}  // namespace

void spmv(const CsrView& a, const cplx* x, cplx* y) {
  for (std::size_t r = 0; r < a.rows; ++r) {
    int k = a.outer[r];
    const int end = a.outer[r + 1];
    __m256d acc_re = _mm256_setzero_pd();  // [vr xr, vi xi, ...]
    __m256d acc_im = _mm256_setzero_pd();  // [vr xi, vi xr, ...]
    for (; k + 1 < end; k += 2) {
      const __m256d v = _mm256_loadu_pd(as_doubles(a.values + k));
      const __m256d xv = load_two(x, a.inner[k], a.inner[k + 1]);
      acc_re = _mm256_fmadd_pd(v, xv, acc_re);
      acc_im = _mm256_fmadd_pd(v, swap_pairs(xv), acc_im);
    }
    double re = alt_sum(acc_re);
    double im = hsum(acc_im);
    if (k < end) {
      const cplx v = a.values[k];
      const cplx xv = x[a.inner[k]];
      re += v.real() * xv.real() - v.imag() * xv.imag();
      im += v.real() * xv.imag() + v.imag() * xv.real();
    }
    y[r] = cplx(re, im);
  }
}

void spmv_real(const CsrRealView& a, const cplx* x, cplx* y) {
  for (std::size_t r = 0; r < a.rows; ++r) {
    int k = a.outer[r];
    const int end = a.outer[r + 1];
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    for (; k + 3 < end; k += 4) {
      const __m256d v01 = _mm256_set_pd(a.values[k + 1], a.values[k + 1], a.values[k], a.values[k]);
      const __m256d v23 = _mm256_set_pd(a.values[k + 3], a.values[k + 3], a.values[k + 2], a.values[k + 2]);
      acc0 = _mm256_fmadd_pd(v01, load_two(x, a.inner[k], a.inner[k + 1]), acc0);
      acc1 = _mm256_fmadd_pd(v23, load_two(x, a.inner[k + 2], a.inner[k + 3]), acc1);
    }
    const __m256d acc = _mm256_add_pd(acc0, acc1);
    const __m128d folded = _mm_add_pd(_mm256_castpd256_pd128(acc), _mm256_extractf128_pd(acc, 1));
    double re = _mm_cvtsd_f64(folded);
    double im = _mm_cvtsd_f64(_mm_unpackhi_pd(folded, folded));
    for (; k < end; ++k) {
      const double v = a.values[k];
      re += v * x[a.inner[k]].real();
      im += v * x[a.inner[k]].imag();
    }
    y[r] = cplx(re, im);
  }
}

cplx dotc(const cplx* x, const cplx* y, std::size_t n) {
  const double* xd = as_doubles(x);
  const double* yd = as_doubles(y);
  __m256d acc_re0 = _mm256_setzero_pd();
  __m256d acc_im0 = _mm256_setzero_pd();
  __m256d acc_re1 = _mm256_setzero_pd();
  __m256d acc_im1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 3 < n; i += 4) {
    const __m256d x0 = _mm256_loadu_pd(xd + 2 * i);
    const __m256d y0 = _mm256_loadu_pd(yd + 2 * i);
    const __m256d x1 = _mm256_loadu_pd(xd + 2 * i + 4);
    const __m256d y1 = _mm256_loadu_pd(yd + 2 * i + 4);
    acc_re0 = _mm256_fmadd_pd(x0, y0, acc_re0);
    acc_im0 = _mm256_fmadd_pd(x0, swap_pairs(y0), acc_im0);
    acc_re1 = _mm256_fmadd_pd(x1, y1, acc_re1);
    acc_im1 = _mm256_fmadd_pd(x1, swap_pairs(y1), acc_im1);
  }
  // re: xr yr + xi yi ; im: xr yi - xi yr
  double re = hsum(_mm256_add_pd(acc_re0, acc_re1));
  double im = alt_sum(_mm256_add_pd(acc_im0, acc_im1));
  for (; i < n; ++i) {
    re += x[i].real() * y[i].real() + x[i].imag() * y[i].imag();
    im += x[i].real() * y[i].imag() - x[i].imag() * y[i].real();
  }
  return {re, im};
}

void axpy(cplx alpha, const cplx* x, cplx* y, std::size_t n) {
  const double* xd = as_doubles(x);
  double* yd = as_doubles(y);
  const __m256d ar = _mm256_set1_pd(alpha.real());
  const __m256d ai = _mm256_set1_pd(alpha.imag());
  std::size_t i = 0;
  for (; i + 1 < n; i += 2) {
    const __m256d xv = _mm256_loadu_pd(xd + 2 * i);
    const __m256d prod = _mm256_fmaddsub_pd(ar, xv, _mm256_mul_pd(ai, swap_pairs(xv)));
    _mm256_storeu_pd(yd + 2 * i, _mm256_add_pd(_mm256_loadu_pd(yd + 2 * i), prod));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void axpy_real(double alpha, const cplx* x, cplx* y, std::size_t n) {
  const double* xd = as_doubles(x);
  double* yd = as_doubles(y);
  const std::size_t m = 2 * n;
  const __m256d a = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 7 < m; i += 8) {
    const __m256d y0 = _mm256_fmadd_pd(a, _mm256_loadu_pd(xd + i), _mm256_loadu_pd(yd + i));
    const __m256d y1 = _mm256_fmadd_pd(a, _mm256_loadu_pd(xd + i + 4), _mm256_loadu_pd(yd + i + 4));
    _mm256_storeu_pd(yd + i, y0);
    _mm256_storeu_pd(yd + i + 4, y1);
  }
  for (; i < m; ++i) yd[i] += alpha * xd[i];
}

void scal(cplx alpha, cplx* x, std::size_t n) {
  double* xd = as_doubles(x);
  const __m256d ar = _mm256_set1_pd(alpha.real());
  const __m256d ai = _mm256_set1_pd(alpha.imag());
  std::size_t i = 0;
  for (; i + 1 < n; i += 2) {
    const __m256d xv = _mm256_loadu_pd(xd + 2 * i);
    _mm256_storeu_pd(xd + 2 * i, _mm256_fmaddsub_pd(ar, xv, _mm256_mul_pd(ai, swap_pairs(xv))));
  }
  for (; i < n; ++i) x[i] *= alpha;
}

double nrm2(const cplx* x, std::size_t n) {
  const double* xd = as_doubles(x);
  const std::size_t m = 2 * n;
  const __m256d abs_mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  __m256d vmax = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 3 < m; i += 4) vmax = _mm256_max_pd(vmax, _mm256_and_pd(abs_mask, _mm256_loadu_pd(xd + i)));
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, vmax);
  double scale = std::max(std::max(lanes[0], lanes[1]), std::max(lanes[2], lanes[3]));
  for (std::size_t t = i; t < m; ++t) scale = std::max(scale, std::abs(xd[t]));
  if (scale == 0.0) return 0.0;

  const __m256d inv = _mm256_set1_pd(1.0 / scale);
  __m256d acc = _mm256_setzero_pd();
  i = 0;
  for (; i + 3 < m; i += 4) {
    const __m256d v = _mm256_mul_pd(_mm256_loadu_pd(xd + i), inv);
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  double sum = hsum(acc);
  for (; i < m; ++i) {
    const double v = xd[i] / scale;
    sum += v * v;
  }
  return scale * std::sqrt(sum);
}

}  // namespace pixyz::kernels::avx2

#else

namespace pixyz::kernels::avx2 {
namespace {
[[noreturn]] void unavailable() { throw std::runtime_error("AVX2 kernels were not compiled into this build"); }
}  // namespace
void spmv(const CsrView&, const cplx*, cplx*) { unavailable(); }
void spmv_real(const CsrRealView&, const cplx*, cplx*) { unavailable(); }
cplx dotc(const cplx*, const cplx*, std::size_t) { unavailable(); }
void axpy(cplx, const cplx*, cplx*, std::size_t) { unavailable(); }
void axpy_real(double, const cplx*, cplx*, std::size_t) { unavailable(); }
void scal(cplx, cplx*, std::size_t) { unavailable(); }
double nrm2(const cplx*, std::size_t) { unavailable(); }
}  // namespace pixyz::kernels::avx2

#endif
