#include <doctest.h>

#include <filesystem>

#include "pixyz/liouvillian.hpp"
#include "test_util.hpp"

using namespace pixyz;

namespace {

ModelParams random_params(int N, int config) {
  ModelParams p{test::uniform(-2, 2), test::uniform(-2, 2), test::uniform(-2, 2), 0.0, 0.0, N};
  if (config == 0 || config == 2) p.gamma = test::uniform(0.2, 2.0);
  if (config == 1 || config == 2) p.Gamma = test::uniform(0.2, 2.0);
  return p;
}

}  // namespace

TEST_CASE("symmetric Liouvillian matches the product-basis action") {
  for (int N : {2, 3, 4, 5}) {
    for (int config = 0; config < 3; ++config) {
      for (int trial = 0; trial < 4; ++trial) {
        CAPTURE(N);
        CAPTURE(config);
        const ModelParams p = random_params(N, config);
        const Probe probe = trial == 3 ? Probe{0.3, -0.2} : Probe{};
        const auto Ls = build_symmetric_liouvillian(p, probe);
        const auto Lf = build_full_liouvillian(p, probe);
        const auto rho = test::random_hermitian(N);
        const Eigen::VectorXcd out_sym = Ls.apply(vectorize(rho));
        const Eigen::VectorXcd out_full = Lf.apply(vectorize_full(embed_in_product_basis(rho)));
        const auto projected = project_from_product_basis(unvectorize_full(out_full, N), N);
        CHECK(max_abs_diff(unvectorize(out_sym, N), projected) < 1e-10);
      }
    }
  }
}

TEST_CASE("structural invariants") {
  for (int N : {2, 3, 4, 7, 12}) {
    CAPTURE(N);
    const ModelParams p = random_params(N, 2);
    const auto L = build_symmetric_liouvillian(p);
    const auto rho = test::random_hermitian(N);
    const Eigen::VectorXcd out = L.apply(vectorize(rho));
    // trace preservation and Hermiticity preservation
    CHECK(std::abs(vec_trace(out, Basis::symmetric, N)) < 1e-12 * inf_norm(L.matrix));
    CHECK(unvectorize(out, N).hermiticity_error() < 1e-12);
    CHECK(z2_commutator_norm(L, build_z2(N, Basis::symmetric)) < 1e-12);
    if (N <= 4) {
      const auto Lf = build_full_liouvillian(p);
      CHECK(z2_commutator_norm(Lf, build_z2(N, Basis::full)) < 1e-12);
      const Eigen::VectorXcd ones = vectorize_full(Eigen::MatrixXcd::Identity(1 << N, 1 << N));
      CHECK((Lf.matrix.adjoint() * ones).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("Z2 acts trivially on diagonal states and is an involution") {
  const auto z = build_z2(5, Basis::symmetric);
  const auto rho = test::random_hermitian(5);
  const Eigen::VectorXcd v = vectorize(rho);
  CHECK((z.apply(z.apply(v)) - v).cwiseAbs().maxCoeff() == 0.0);
  DickeBlockMatrix diag(shared_layout(5));
  for (std::size_t b = 0; b < diag.num_blocks(); ++b) diag.block(b).diagonal() = rho.block(b).diagonal();
  CHECK((z.apply(vectorize(diag)) - vectorize(diag)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("collective-only dynamics conserves the total spin") {
  const int N = 6;
  const ModelParams p{0.6, 1.3, 1.0, 0.0, 0.7, N};
  const auto L = build_symmetric_liouvillian(p);
  const auto l = shared_layout(N);
  const auto x = collective_operator(l, Collective::Sx);
  const auto y = collective_operator(l, Collective::Sy);
  const auto z = collective_operator(l, Collective::Sz);
  const auto s2 = x * x + y * y + z * z;
  const auto out = unvectorize(L.apply(vectorize(test::random_density(N))), N);
  CHECK(std::abs(expectation(out, s2)) < 1e-11);
  // no block-to-block coupling
  auto block_of = [&](Eigen::Index v) {
    std::size_t b = 0;
    while (b + 1 < l->blocks.size() && static_cast<Eigen::Index>(l->blocks[b + 1].offset) <= v) ++b;
    return b;
  };
  bool coupled = false;
  for (Eigen::Index r = 0; r < L.matrix.outerSize(); ++r)
    for (SparseMatrixC::InnerIterator it(L.matrix, r); it; ++it) coupled |= block_of(r) != block_of(it.col());
  CHECK_FALSE(coupled);
  CHECK_THROWS_AS(steady_state(L), MultiplicityError);
  SteadyStateOptions complex_route;
  complex_route.method = SteadyStateMethod::complex_bordered;
  CHECK_THROWS_AS(steady_state(L, complex_route), MultiplicityError);
}

TEST_CASE("steady state: routes agree and match the product basis") {
  for (int N : {2, 3, 4, 5}) {
    for (int config : {0, 2}) {
      CAPTURE(N);
      CAPTURE(config);
      const ModelParams p = random_params(N, config);
      const auto Ls = build_symmetric_liouvillian(p);
      SteadyStateOptions real_route, complex_route;
      real_route.method = SteadyStateMethod::real_sector;
      complex_route.method = SteadyStateMethod::complex_bordered;
      const auto a = steady_state_symmetric(Ls, real_route);
      const auto b = steady_state_symmetric(Ls, complex_route);
      CHECK(max_abs_diff(a, b) < 1e-10);
      CHECK(std::abs(a.trace() - 1.0) < 1e-12);
      CHECK(min_eigenvalue(a) > -1e-9);

      const auto Lf = build_full_liouvillian(p);
      const Eigen::MatrixXcd full = steady_state_full(Lf, complex_route);
      CHECK((full - embed_in_product_basis(a)).cwiseAbs().maxCoeff() < 1e-9);
      const Eigen::MatrixXcd full_real = steady_state_full(Lf, real_route);
      CHECK((full - full_real).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("isotropic couplings relax to the all-down state") {
  const int N = 9;
  const auto rho = steady_state_symmetric(build_symmetric_liouvillian({0.7, 0.7, 0.7, 1.3, 0.4, N}));
  CHECK(max_abs_diff(rho, dicke_state(shared_layout(N), -N)) < 1e-10);
}

TEST_CASE("steady state is Z2 symmetric") {
  const int N = 20;
  const auto rho = steady_state_symmetric(build_symmetric_liouvillian({0.6, 1.4, 1.0, 1.0, 0.0, N}));
  const auto l = shared_layout(N);
  CHECK(std::abs(expectation(rho, collective_operator(l, Collective::Sx))) < 1e-10);
  CHECK(std::abs(expectation(rho, collective_operator(l, Collective::Sy))) < 1e-10);
}

TEST_CASE("full basis size guard") {
  CHECK_THROWS_AS(build_full_liouvillian({0.6, 1, 1, 1, 0, 9}), ResourceLimitError);
}

TEST_CASE("Liouvillian cache round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "pixyz_cache_test";
  std::filesystem::remove_all(dir);
  LiouvillianCache cache(dir);
  const ModelParams p{0.6, 1.2, 1.0, 1.0, 0.1, 7};
  CHECK_FALSE(cache.load(p).has_value());
  const auto built = cache.get_or_build(p);
  const auto hit = cache.load(p);
  REQUIRE(hit.has_value());
  CHECK((hit->matrix - built.matrix).norm() == 0.0);
  CHECK_FALSE(cache.load({0.6, 1.2000001, 1.0, 1.0, 0.1, 7}).has_value());
  CHECK(LiouvillianCache::key(p, {}) != LiouvillianCache::key(p, {1e-3, 0}));
  std::filesystem::remove_all(dir);
}

TEST_CASE("real-sector solve stays accurate at moderate size") {
  const int N = 40;
  const auto L = build_symmetric_liouvillian({0.6, 1.3, 1.0, 1.0, 0.0, N});
  SteadyStateOptions real_route, complex_route;
  real_route.method = SteadyStateMethod::real_sector;
  complex_route.method = SteadyStateMethod::complex_bordered;
  const auto a = steady_state(L, real_route);
  const auto b = steady_state(L, complex_route);
  CHECK(a.residual < 1e-12 * inf_norm(L.matrix));
  CHECK((a.vec - b.vec).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("probe field: real route covers both parities") {
  for (int N : {3, 5}) {
    CAPTURE(N);
    const ModelParams p{0.6, 1.4, 1.0, 1.0, 0.0, N};
    const Probe probe{0.05, -0.03};
    const auto Ls = build_symmetric_liouvillian(p, probe);
    SteadyStateOptions real_route, complex_route;
    real_route.method = SteadyStateMethod::real_sector;
    complex_route.method = SteadyStateMethod::complex_bordered;
    const auto a = steady_state_symmetric(Ls, real_route);
    const auto b = steady_state_symmetric(Ls, complex_route);
    CHECK(max_abs_diff(a, b) < 1e-10);
    CHECK(std::abs(expectation(a, collective_operator(shared_layout(N), Collective::Sx))) > 1e-4);
    const Eigen::MatrixXcd full = steady_state_full(build_full_liouvillian(p, probe), complex_route);
    CHECK((full - embed_in_product_basis(a)).cwiseAbs().maxCoeff() < 1e-9);
  }
}
