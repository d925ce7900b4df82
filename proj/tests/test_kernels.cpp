#include <doctest.h>

#include <Eigen/Sparse>
#include <vector>

#include "pixyz/kernels.hpp"
#include "test_util.hpp"

using namespace pixyz;
namespace k = pixyz::kernels;

namespace {

std::vector<k::cplx> random_vector(std::size_t n) {
  std::vector<k::cplx> v(n);
  for (auto& x : v) x = {test::uniform(-1, 1), test::uniform(-1, 1)};
  return v;
}

Eigen::SparseMatrix<k::cplx, Eigen::RowMajor, int> random_sparse(int n, double fill) {
  std::vector<Eigen::Triplet<k::cplx, int>> t;
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      if (test::uniform(0, 1) < fill) t.emplace_back(r, c, k::cplx(test::uniform(-1, 1), test::uniform(-1, 1)));
  Eigen::SparseMatrix<k::cplx, Eigen::RowMajor, int> m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

double max_diff(const std::vector<k::cplx>& a, const std::vector<k::cplx>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

TEST_CASE("scalar kernels match straightforward Eigen expressions") {
  const int n = 37;
  const auto m = random_sparse(n, 0.2);
  const auto x = random_vector(n);
  std::vector<k::cplx> y(n);
  k::scalar::spmv({static_cast<std::size_t>(n), m.outerIndexPtr(), m.innerIndexPtr(), m.valuePtr()}, x.data(), y.data());
  const Eigen::VectorXcd ref = m * Eigen::Map<const Eigen::VectorXcd>(x.data(), n);
  for (int i = 0; i < n; ++i) CHECK(std::abs(y[i] - ref[i]) < 1e-13);

  const auto z = random_vector(n);
  const k::cplx dot = k::scalar::dotc(x.data(), z.data(), n);
  const k::cplx dref = Eigen::Map<const Eigen::VectorXcd>(x.data(), n).dot(Eigen::Map<const Eigen::VectorXcd>(z.data(), n));
  CHECK(std::abs(dot - dref) < 1e-13);
  CHECK(k::scalar::nrm2(x.data(), n) == doctest::Approx(Eigen::Map<const Eigen::VectorXcd>(x.data(), n).norm()).epsilon(1e-14));
}

TEST_CASE("AVX2 kernels agree with the scalar reference") {
  if (!k::isa_available(k::Isa::avx2)) {
    MESSAGE("AVX2 unavailable on this host; equivalence test skipped");
    return;
  }
  for (int n : {0, 1, 2, 3, 5, 8, 17, 64, 129}) {
    CAPTURE(n);
    const auto m = random_sparse(n, 0.3);
    const auto x = random_vector(n);
    const auto z = random_vector(n);
    const k::CsrView view{static_cast<std::size_t>(n), m.outerIndexPtr(), m.innerIndexPtr(), m.valuePtr()};
    std::vector<k::cplx> ys(n), yv(n);
    k::scalar::spmv(view, x.data(), ys.data());
    k::avx2::spmv(view, x.data(), yv.data());
    CHECK(max_diff(ys, yv) < 1e-13);

    Eigen::SparseMatrix<double, Eigen::RowMajor, int> mr = m.real();
    mr.makeCompressed();
    const k::CsrRealView rview{static_cast<std::size_t>(n), mr.outerIndexPtr(), mr.innerIndexPtr(), mr.valuePtr()};
    k::scalar::spmv_real(rview, x.data(), ys.data());
    k::avx2::spmv_real(rview, x.data(), yv.data());
    CHECK(max_diff(ys, yv) < 1e-13);

    CHECK(std::abs(k::scalar::dotc(x.data(), z.data(), n) - k::avx2::dotc(x.data(), z.data(), n)) < 1e-12);
    CHECK(k::scalar::nrm2(x.data(), n) == doctest::Approx(k::avx2::nrm2(x.data(), n)).epsilon(1e-14));

    const k::cplx alpha(0.3, -1.7);
    auto a1 = z, a2 = z;
    k::scalar::axpy(alpha, x.data(), a1.data(), n);
    k::avx2::axpy(alpha, x.data(), a2.data(), n);
    CHECK(max_diff(a1, a2) < 1e-14);

    a1 = z;
    a2 = z;
    k::scalar::axpy_real(-0.7, x.data(), a1.data(), n);
    k::avx2::axpy_real(-0.7, x.data(), a2.data(), n);
    CHECK(max_diff(a1, a2) < 1e-15);

    a1 = x;
    a2 = x;
    k::scalar::scal(alpha, a1.data(), n);
    k::avx2::scal(alpha, a2.data(), n);
    CHECK(max_diff(a1, a2) < 1e-14);
  }
}

TEST_CASE("ISA selection") {
  const auto before = k::active_isa();
  k::set_isa(k::Isa::scalar);
  CHECK(k::active_isa() == k::Isa::scalar);
  if (!k::isa_available(k::Isa::avx2)) CHECK_THROWS_AS(k::set_isa(k::Isa::avx2), std::invalid_argument);
  k::set_isa(before);
  std::vector<k::cplx> a(3), b(4);
  CHECK_THROWS_AS(k::dotc(a, b), std::invalid_argument);
}

TEST_CASE("nrm2 is scale-safe") {
  std::vector<k::cplx> big(10, k::cplx(1e200, -1e200));
  CHECK(k::nrm2(big) == doctest::Approx(std::sqrt(20.0) * 1e200));
  std::vector<k::cplx> zero(5);
  CHECK(k::nrm2(zero) == 0.0);
}
