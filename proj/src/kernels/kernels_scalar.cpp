#include "pixyz/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace pixyz::kernels::scalar {

void spmv(const CsrView& a, const cplx* x, cplx* y) {
  for (std::size_t r = 0; r < a.rows; ++r) {
    double re = 0.0;
    double im = 0.0;
    for (int k = a.outer[r]; k < a.outer[r + 1]; ++k) {
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
    double re = 0.0;
    double im = 0.0;
    for (int k = a.outer[r]; k < a.outer[r + 1]; ++k) {
      const double v = a.values[k];
      const cplx xv = x[a.inner[k]];
      re += v * xv.real();
      im += v * xv.imag();
    }
    y[r] = cplx(re, im);
  }
}

cplx dotc(const cplx* x, const cplx* y, std::size_t n) {
  double re = 0.0;
  double im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    re += x[i].real() * y[i].real() + x[i].imag() * y[i].imag();
    im += x[i].real() * y[i].imag() - x[i].imag() * y[i].real();
  }
  return {re, im};
}

void axpy(cplx alpha, const cplx* x, cplx* y, std::size_t n) {
  const double ar = alpha.real();
  const double ai = alpha.imag();
  for (std::size_t i = 0; i < n; ++i) {
    const double xr = x[i].real();
    const double xi = x[i].imag();
    y[i] = cplx(y[i].real() + ar * xr - ai * xi, y[i].imag() + ar * xi + ai * xr);
  }
}

void axpy_real(double alpha, const cplx* x, cplx* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = cplx(y[i].real() + alpha * x[i].real(), y[i].imag() + alpha * x[i].imag());
  }
}

void scal(cplx alpha, cplx* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

double nrm2(const cplx* x, std::size_t n) {
  // two-pass scaled sum to stay finite for huge or tiny entries
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    scale = std::max(scale, std::max(std::abs(x[i].real()), std::abs(x[i].imag())));
  }
  if (scale == 0.0) return 0.0;
  double sum = 0.0;
  const double inv = 1.0 / scale;
  for (std::size_t i = 0; i < n; ++i) {
    const double re = x[i].real() * inv;
    const double im = x[i].imag() * inv;
    sum += re * re + im * im;
  }
  return scale * std::sqrt(sum);
}

}  // namespace pixyz::kernels::scalar
