#include <doctest.h>

#include <algorithm>

#include "pixyz/spectral.hpp"
#include "test_util.hpp"

using namespace pixyz;

namespace {

ModelParams local_only(int N, double Jy = 1.0) { return {0.6, Jy, 1.0, 1.0, 0.0, N}; }

Eigen::VectorXcd random_vector(Eigen::Index n) {
  Eigen::VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = {test::uniform(-1, 1), test::uniform(-1, 1)};
  return v;
}

}  // namespace

TEST_CASE("pure decay spectrum is a tensor sum of single-spin rates") {
  const auto r = full_spectrum(build_full_liouvillian({0, 0, 0, 1.0, 0.0, 2}));
  REQUIRE(r.eigenvalues.size() == 16);
  // single spin {0, -1/2, -1/2, -1}: pair sums give multiplicities 1,4,6,4,1 on 0, -1/2, -1, -3/2, -2
  const double expect[] = {0, -0.5, -0.5, -0.5, -0.5, -1, -1, -1, -1, -1, -1, -1.5, -1.5, -1.5, -1.5, -2};
  for (int i = 0; i < 16; ++i) {
    CHECK(std::abs(r.eigenvalues[i].real() - expect[i]) < 1e-12);
    CHECK(std::abs(r.eigenvalues[i].imag()) < 1e-12);
  }
  CHECK(r.gap == doctest::Approx(0.5).epsilon(1e-12));
  REQUIRE(r.eta.has_value());
  CHECK(*r.eta == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("detect_pt on toy spectra") {
  const std::vector<cplx> two{0.0, -1.0};
  REQUIRE(detect_pt(two).has_value());
  CHECK(*detect_pt(two) == 0.5);
  const std::vector<cplx> broken{0.0, -1.0, -0.3};
  CHECK_FALSE(detect_pt(broken).has_value());
  const std::vector<cplx> pairs{0.0, {-0.2, 1.5}, {-0.2, -1.5}, {-0.8, 1.5}, {-0.8, -1.5}, -1.0};
  REQUIRE(detect_pt(pairs).has_value());
  CHECK(*detect_pt(pairs) == doctest::Approx(0.5));
  const std::vector<cplx> skew{0.0, {-0.2, 1.5}, {-0.2, -1.5}, {-0.8, 1.4}, {-0.8, -1.4}, -1.0};
  CHECK_FALSE(detect_pt(skew).has_value());
}

TEST_CASE("mirror axis: local dissipation has one, collective does not") {
  const int N = 4;
  const auto local = full_spectrum(build_full_liouvillian(local_only(N)));
  REQUIRE(local.pt_symmetric);
  CHECK(std::abs(*local.eta - N / 2.0) < 1e-8);
  CHECK(std::abs(local.eigenvalues[0]) < 1e-9);
  for (const cplx& z : local.eigenvalues) CHECK(z.real() < 1e-9);
  const auto mixed = full_spectrum(build_full_liouvillian({0.6, 1.0, 1.0, 1.0 / 3, 2.0 / 3, N}));
  CHECK_FALSE(mixed.pt_symmetric);
  CHECK_FALSE(mixed.antigap().has_value());
}

TEST_CASE("antigap identity on dense spectra") {
  for (int N : {2, 3, 4, 5}) {
    for (int trial = 0; trial < 3; ++trial) {
      CAPTURE(N);
      const ModelParams p{test::uniform(-2, 2), test::uniform(-2, 3), test::uniform(-2, 2), test::uniform(0.3, 2), 0.0, N};
      const auto r = full_spectrum(build_full_liouvillian(p));
      REQUIRE(r.pt_symmetric);
      CHECK(std::abs(*r.eta - N * p.gamma / 2) < 1e-8);
      CHECK(std::abs(*r.antigap() - r.gap) < 1e-8);
    }
  }
}

TEST_CASE("spectrum is closed under conjugation") {
  const auto r = full_spectrum(build_full_liouvillian({0.6, 1.3, 1.0, 0.7, 0.4, 3}));
  for (const cplx& z : r.eigenvalues) {
    double best = 1e300;
    for (const cplx& w : r.eigenvalues) best = std::min(best, std::abs(w - std::conj(z)));
    CHECK(best < 1e-9);
  }
}

TEST_CASE("dense limit guard") {
  CHECK_THROWS_AS(full_spectrum(build_full_liouvillian(local_only(4)), 100), ResourceLimitError);
}

TEST_CASE("matrix-free product-basis operator matches the assembled one") {
  for (int N : {2, 3, 4, 5}) {
    for (int config = 0; config < 3; ++config) {
      CAPTURE(N);
      CAPTURE(config);
      ModelParams p{test::uniform(-2, 2), test::uniform(-2, 2), test::uniform(-2, 2), 0.0, 0.0, N};
      if (config != 1) p.gamma = test::uniform(0.2, 2);
      if (config != 0) p.Gamma = test::uniform(0.2, 2);
      const Probe probe = config == 2 ? Probe{0.2, -0.1} : Probe{};
      const auto L = build_full_liouvillian(p, probe);
      const auto op = full_liouvillian_operator(p, probe);
      REQUIRE(op.dim == L.dim());
      const Eigen::VectorXcd x = random_vector(L.dim());
      Eigen::VectorXcd y(L.dim());
      op.apply(x.data(), y.data());
      CHECK((y - L.apply(x)).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("Krylov-Schur on a diagonal operator with known spectrum") {
  const Eigen::Index n = 400;
  Eigen::VectorXcd diag(n);
  for (Eigen::Index i = 0; i < n; ++i) diag[i] = {-0.01 * static_cast<double>(i), std::sin(0.7 * static_cast<double>(i))};
  LinearOperator op{n, [&](const cplx* x, cplx* y) {
                      for (Eigen::Index i = 0; i < n; ++i) y[i] = diag[i] * x[i];
                    }};
  ArnoldiOptions o;
  o.nev = 4;
  o.ncv = 20;
  const auto r = eigs_largest_real(op, o);
  REQUIRE(r.converged == 4);
  for (int i = 0; i < 4; ++i) CHECK(std::abs(r.values[i] - diag[i]) < 1e-9);
  // tiny operators go through the dense path
  LinearOperator small{10, [&](const cplx* x, cplx* y) {
                         for (int i = 0; i < 10; ++i) y[i] = diag[i] * x[i];
                       }};
  const auto s = eigs_largest_real(small, o);
  CHECK(std::abs(s.values[1] - diag[1]) < 1e-12);
}

TEST_CASE("antigap gap matches the dense gap") {
  for (int N : {3, 4, 5}) {
    for (double Jy : {-0.5, 1.2, 2.5}) {
      CAPTURE(N);
      CAPTURE(Jy);
      const ModelParams p = local_only(N, Jy);
      const auto L = build_full_liouvillian(p);
      const auto dense = full_spectrum(L);
      REQUIRE(dense.eta.has_value());
      CHECK(std::abs(gap_via_antigap(L, *dense.eta) - dense.gap) < 1e-8);
      const auto mf = gap_via_antigap(full_liouvillian_operator(p), N * p.gamma / 2);
      CHECK(std::abs(mf.gap - dense.gap) < 1e-8);
      CHECK(std::abs(mf.top - cplx(N * p.gamma)) < 1e-8);
    }
  }
}

TEST_CASE("fastest decay rate fixes the mirror axis") {
  for (int N : {3, 4, 6}) {
    CAPTURE(N);
    const ModelParams p = local_only(N, 1.7);
    CHECK(max_damping(full_liouvillian_operator(p)) == doctest::Approx(N * p.gamma).epsilon(1e-9));
  }
}
