#include <doctest.h>

#include <boost/math/special_functions/binomial.hpp>

#include "pixyz/observables.hpp"
#include "test_util.hpp"

using namespace pixyz;

namespace {

struct FullObservables {
  double Sxx, Syy, Mz, entropy, purity, Bc_x, Bc_y;
};

// Brute force on a 2^N x 2^N density matrix.
FullObservables full_observables(const Eigen::MatrixXcd& rho, int N) {
  const Eigen::MatrixXcd sx = Eigen::MatrixXcd(product_basis_operator(N, Collective::Sx));
  const Eigen::MatrixXcd sy = Eigen::MatrixXcd(product_basis_operator(N, Collective::Sy));
  const Eigen::MatrixXcd sz = Eigen::MatrixXcd(product_basis_operator(N, Collective::Sz));
  auto tr = [&](const Eigen::MatrixXcd& op) { return (rho * op).trace().real(); };
  const Eigen::MatrixXcd x2 = sx * sx, y2 = sy * sy;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double l = es.eigenvalues()[i];
    if (l > 1e-300) s -= l * std::log(l);
  }
  const double nn = static_cast<double>(N) * (N - 1);
  return {(tr(x2) - N) / nn, (tr(y2) - N) / nn, tr(sz) / N, s / N, (rho * rho).trace().real(),
          tr(x2) * tr(x2) / tr(x2 * x2), tr(y2) * tr(y2) / tr(y2 * y2)};
}

void check_match(const ObservableReport& a, const FullObservables& b, double tol) {
  CHECK(std::abs(a.Sxx - b.Sxx) < tol);
  CHECK(std::abs(a.Syy - b.Syy) < tol);
  CHECK(std::abs(a.Mz - b.Mz) < tol);
  CHECK(std::abs(a.entropy_per_spin - b.entropy) < tol);
  CHECK(std::abs(a.purity - b.purity) < tol);
  CHECK(std::abs(a.Bc_x - b.Bc_x) < tol);
  CHECK(std::abs(a.Bc_y - b.Bc_y) < tol);
}

// Product state with every spin along +x, as a j = N/2 coherent state.
DickeBlockMatrix all_plus_x(int N) {
  DickeBlockMatrix rho(shared_layout(N));
  Eigen::VectorXcd c(N + 1);
  for (int k = 0; k <= N; ++k) c[k] = std::sqrt(boost::math::binomial_coefficient<double>(N, k) / std::ldexp(1.0, N));
  rho.block(0) = c * c.adjoint();
  return rho;
}

}  // namespace

TEST_CASE("observables of random states match the product-basis oracle") {
  for (int N : {2, 3, 4, 5}) {
    CAPTURE(N);
    for (int trial = 0; trial < 4; ++trial) {
      const auto rho = test::random_density(N);
      check_match(static_observables(rho), full_observables(embed_in_product_basis(rho), N), 1e-10);
    }
  }
}

TEST_CASE("steady-state observables match the product-basis oracle") {
  for (int N : {2, 3, 4, 5}) {
    for (int config : {0, 2}) {
      CAPTURE(N);
      CAPTURE(config);
      ModelParams p{test::uniform(-2, 2), test::uniform(-2, 2), test::uniform(-2, 2), test::uniform(0.2, 2), 0.0, N};
      if (config == 2) p.Gamma = test::uniform(0.2, 2);
      const auto sym = solve_observables(p, false);
      const Eigen::MatrixXcd full = steady_state_full(build_full_liouvillian(p));
      check_match(sym.report, full_observables(full, N), 1e-9);
    }
  }
}

TEST_CASE("reference states") {
  for (int N : {2, 3, 4, 10, 40}) {
    CAPTURE(N);
    const auto l = shared_layout(N);
    const auto down = dicke_state(l, -N);
    CHECK(spin_structure_factor(down, Axis::x) == doctest::Approx(0.0).scale(1.0));
    CHECK(z_magnetization(down) == doctest::Approx(-1.0));
    CHECK(bimodality(down, Axis::x) == doctest::Approx(static_cast<double>(N) / (3 * N - 2)).epsilon(1e-12));
    const auto plus = all_plus_x(N);
    CHECK(spin_structure_factor(plus, Axis::x) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(bimodality(plus, Axis::x) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(z_magnetization(maximally_mixed(l)) == doctest::Approx(0.0).scale(1.0));
  }
  CHECK(bimodality(dicke_state(shared_layout(2), -2), Axis::x) == doctest::Approx(0.5));
  DickeBlockMatrix zero(shared_layout(3));
  CHECK_THROWS_AS(bimodality(zero, Axis::x), DomainError);
}

TEST_CASE("Z2 nulls and axis dominance on the critical cut") {
  for (double Jy : {0.8, 1.1, 1.3, 1.4, 1.7}) {
    CAPTURE(Jy);
    const ModelParams p{0.6, Jy, 1.0, 1.0, 0.0, 10};
    const auto s = solve_observables(p, false);
    const auto l = shared_layout(10);
    CHECK(std::abs(expectation(s.rho, collective_operator(l, Collective::Sx))) < 1e-8);
    CHECK(std::abs(expectation(s.rho, collective_operator(l, Collective::Sy))) < 1e-8);
    // Steady-state balance ties the two structure factors together exactly,
    // so x dominates only once Jy exceeds 2 Jz - Jx.
    CHECK(s.report.Sxx * (1.0 - 0.6) == doctest::Approx(s.report.Syy * (Jy - 1.0)).scale(1.0).epsilon(1e-9));
    if (Jy >= 2 * 1.0 - 0.6 - 1e-12) CHECK(s.report.Sxx >= s.report.Syy - 1e-9);
    CHECK(s.report.entropy_per_spin >= -1e-9);
    CHECK(s.report.entropy_per_spin <= std::log(2.0) + 1e-9);
    CHECK(s.report.purity > 0.0);
    CHECK(s.report.purity <= 1.0 + 1e-9);
  }
}

TEST_CASE("susceptibility: linear response agrees with perturbed solves") {
  for (int N : {4, 8}) {
    for (double Jy : {0.9, 1.4}) {
      CAPTURE(N);
      CAPTURE(Jy);
      const ModelParams p{0.6, Jy, 1.0, 1.0, 0.0, N};
      SusceptibilityOptions lin, pert;
      lin.n_theta = pert.n_theta = 16;
      pert.method = ChiMethod::perturbed;
      pert.h = 1e-4;
      const auto a = averaged_susceptibility(p, lin);
      const auto b = averaged_susceptibility(p, pert);
      CHECK(b.linear_regime);
      REQUIRE(b.chi_av_half.has_value());
      CHECK(std::abs(a.chi_av - b.chi_av) < 1e-4 * a.chi_av);
      CHECK(std::abs(a.chi_av - *b.chi_av_half) < 1e-4 * a.chi_av);
      CHECK(a.chi_av > 0.0);
    }
  }
}

TEST_CASE("susceptibility matches a product-basis finite difference") {
  const int N = 3;
  const ModelParams p{0.6, 1.3, 1.0, 1.0, 0.4, N};
  const double h = 1e-6;
  const int n_theta = 8;
  const Eigen::MatrixXcd sx = Eigen::MatrixXcd(product_basis_operator(N, Collective::Sx));
  const Eigen::MatrixXcd sy = Eigen::MatrixXcd(product_basis_operator(N, Collective::Sy));
  double avg = 0.0;
  for (int k = 0; k < n_theta; ++k) {
    const double th = 2 * std::numbers::pi * k / n_theta;
    const Eigen::MatrixXcd rho = steady_state_full(build_full_liouvillian(p, {h * std::cos(th), h * std::sin(th)}));
    avg += std::hypot((rho * sx).trace().real(), (rho * sy).trace().real()) / N / h / n_theta;
  }
  SusceptibilityOptions o;
  o.n_theta = n_theta;
  CHECK(averaged_susceptibility(p, o).chi_av == doctest::Approx(avg).epsilon(1e-5));
}

TEST_CASE("susceptibility argument checks") {
  SusceptibilityOptions o;
  o.n_theta = 4;
  CHECK_THROWS_AS(averaged_susceptibility(ModelParams{0.6, 1.2, 1, 1, 0, 4}, o), DomainError);
}
