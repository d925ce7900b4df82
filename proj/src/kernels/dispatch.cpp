#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <string_view>

#include "pixyz/kernels.hpp"

namespace pixyz::kernels {
namespace {

bool cpu_has_avx2() noexcept {
#if defined(PIXYZ_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa detect() noexcept {
  if (const char* env = std::getenv("PIXYZ_ISA")) {
    if (std::string_view(env) == "scalar") return Isa::scalar;
  }
  return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

Isa active_isa() noexcept { return current().load(std::memory_order_relaxed); }

bool isa_available(Isa isa) noexcept { return isa == Isa::scalar || cpu_has_avx2(); }

void set_isa(Isa isa) {
  if (!isa_available(isa)) throw std::invalid_argument(std::string("ISA not available: ") + isa_name(isa));
  current().store(isa, std::memory_order_relaxed);
}

const char* isa_name(Isa isa) noexcept { return isa == Isa::avx2 ? "avx2" : "scalar"; }

void spmv(const CsrView& a, std::span<const cplx> x, std::span<cplx> y) {
  if (y.size() < a.rows) throw std::invalid_argument("spmv: output too short");
  if (active_isa() == Isa::avx2) return avx2::spmv(a, x.data(), y.data());
  scalar::spmv(a, x.data(), y.data());
}

void spmv_real(const CsrRealView& a, std::span<const cplx> x, std::span<cplx> y) {
  if (y.size() < a.rows) throw std::invalid_argument("spmv_real: output too short");
  if (active_isa() == Isa::avx2) return avx2::spmv_real(a, x.data(), y.data());
  scalar::spmv_real(a, x.data(), y.data());
}

cplx dotc(std::span<const cplx> x, std::span<const cplx> y) {
  if (x.size() != y.size()) throw std::invalid_argument("dotc: size mismatch");
  if (active_isa() == Isa::avx2) return avx2::dotc(x.data(), y.data(), x.size());
  return scalar::dotc(x.data(), y.data(), x.size());
}

void axpy(cplx alpha, std::span<const cplx> x, std::span<cplx> y) {
  if (x.size() != y.size()) throw std::invalid_argument("axpy: size mismatch");
  if (active_isa() == Isa::avx2) return avx2::axpy(alpha, x.data(), y.data(), x.size());
  scalar::axpy(alpha, x.data(), y.data(), x.size());
}

void axpy_real(double alpha, std::span<const cplx> x, std::span<cplx> y) {
  if (x.size() != y.size()) throw std::invalid_argument("axpy_real: size mismatch");
  if (active_isa() == Isa::avx2) return avx2::axpy_real(alpha, x.data(), y.data(), x.size());
  scalar::axpy_real(alpha, x.data(), y.data(), x.size());
}

void scal(cplx alpha, std::span<cplx> x) {
  if (active_isa() == Isa::avx2) return avx2::scal(alpha, x.data(), x.size());
  scalar::scal(alpha, x.data(), x.size());
}

double nrm2(std::span<const cplx> x) {
  if (active_isa() == Isa::avx2) return avx2::nrm2(x.data(), x.size());
  return scalar::nrm2(x.data(), x.size());
}

}  // namespace pixyz::kernels
