#pragma once

// Data-parallel inner loops used by the Krylov eigensolver and the
// matrix-free product-basis Liouvillian. Every kernel has a scalar reference
// implementation and an AVX2/FMA variant; the variant is picked once at
// startup from CPUID and can be overridden (tests, benchmarking) through
// set_isa() or the PIXYZ_ISA environment variable ("scalar" | "avx2").

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>

namespace pixyz::kernels {

using cplx = std::complex<double>;

enum class Isa { scalar, avx2 };

/// Compressed sparse row view with complex values. Layout matches a
/// row-major Eigen::SparseMatrix<cplx, RowMajor, int> after makeCompressed().
struct CsrView {
  std::size_t rows = 0;
  const int* outer = nullptr;  // rows + 1 entries
  const int* inner = nullptr;
  const cplx* values = nullptr;
};

/// Same layout with real values.
struct CsrRealView {
  std::size_t rows = 0;
  const int* outer = nullptr;
  const int* inner = nullptr;
  const double* values = nullptr;
};

Isa active_isa() noexcept;
bool isa_available(Isa isa) noexcept;
/// Throws std::invalid_argument if the requested ISA is not supported here.
void set_isa(Isa isa);
const char* isa_name(Isa isa) noexcept;

/// y = A x
void spmv(const CsrView& a, std::span<const cplx> x, std::span<cplx> y);
/// y = A x with a real matrix and complex vectors.
void spmv_real(const CsrRealView& a, std::span<const cplx> x, std::span<cplx> y);
/// sum_i conj(x_i) y_i
cplx dotc(std::span<const cplx> x, std::span<const cplx> y);
/// y += alpha x
void axpy(cplx alpha, std::span<const cplx> x, std::span<cplx> y);
/// y += alpha x, alpha real
void axpy_real(double alpha, std::span<const cplx> x, std::span<cplx> y);
/// x *= alpha
void scal(cplx alpha, std::span<cplx> x);
/// Euclidean norm.
double nrm2(std::span<const cplx> x);

// Direct access to each variant, used by the equivalence tests.
namespace scalar {
void spmv(const CsrView& a, const cplx* x, cplx* y);
void spmv_real(const CsrRealView& a, const cplx* x, cplx* y);
cplx dotc(const cplx* x, const cplx* y, std::size_t n);
void axpy(cplx alpha, const cplx* x, cplx* y, std::size_t n);
void axpy_real(double alpha, const cplx* x, cplx* y, std::size_t n);
void scal(cplx alpha, cplx* x, std::size_t n);
double nrm2(const cplx* x, std::size_t n);
}  // namespace scalar

namespace avx2 {
void spmv(const CsrView& a, const cplx* x, cplx* y);
void spmv_real(const CsrRealView& a, const cplx* x, cplx* y);
cplx dotc(const cplx* x, const cplx* y, std::size_t n);
void axpy(cplx alpha, const cplx* x, cplx* y, std::size_t n);
void axpy_real(double alpha, const cplx* x, cplx* y, std::size_t n);
void scal(cplx alpha, cplx* x, std::size_t n);
double nrm2(const cplx* x, std::size_t n);
}  // namespace avx2

}  // namespace pixyz::kernels
