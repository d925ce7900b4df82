#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "pixyz/harness.hpp"
#include "pixyz/tables.hpp"
#include "test_util.hpp"

using namespace pixyz;

namespace {

std::string csv(const Table& t) {
  std::ostringstream s;
  write_csv(s, t);
  return s.str();
}

std::filesystem::path scratch_dir(const char* name) {
  auto d = std::filesystem::temp_directory_path() / ("pixyz_test_" + std::string(name));
  std::filesystem::remove_all(d);
  return d;
}

}  // namespace

TEST_CASE("power_law_fit") {
  const std::vector<double> xs{2, 3, 5, 8, 13};
  std::vector<double> ys;
  for (double x : xs) ys.push_back(2.0 * std::pow(x, -0.5));
  const FitResult f = power_law_fit(xs, ys);
  CHECK(f.beta == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(f.alpha == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(f.residual < 1e-12);
  CHECK(f.points == 5);
  CHECK(f.x_min == 2);
  CHECK(f.x_max == 13);

  SUBCASE("residual is reported for noisy data") {
    std::vector<double> noisy = ys;
    noisy[2] *= 1.1;
    CHECK(power_law_fit(xs, noisy).residual > 0.01);
  }
  SUBCASE("invalid input") {
    CHECK_THROWS_AS(power_law_fit(std::vector<double>{1, 2}, std::vector<double>{1, 2}), DomainError);
    CHECK_THROWS_AS(power_law_fit(std::vector<double>{1, 2, 3}, std::vector<double>{1, 0, 3}), DomainError);
    CHECK_THROWS_AS(power_law_fit(std::vector<double>{-1, 2, 3}, std::vector<double>{1, 2, 3}), DomainError);
    CHECK_THROWS_AS(power_law_fit(std::vector<double>{2, 2, 2}, std::vector<double>{1, 2, 3}), DomainError);
  }
}

TEST_CASE("curve_intersection") {
  const auto xs = linspace(0.0, 2.0, 9);
  std::vector<double> up, down, shifted;
  for (double x : xs) {
    up.push_back(x);
    down.push_back(2.0 - x);
    shifted.push_back(x + 1.0);
  }
  const Crossing c = curve_intersection(xs, up, down);
  CHECK(c.x == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(c.count == 1);
  CHECK_FALSE(c.multiple);
  CHECK_THROWS_AS(curve_intersection(xs, up, shifted), NoIntersectionError);

  SUBCASE("off-grid crossing is linearly interpolated") {
    const std::vector<double> x3{0, 1, 2}, a{0, 1, 2}, b{0.5, 0.5, 0.5};
    CHECK(curve_intersection(x3, a, b).x == doctest::Approx(0.5));
  }
  SUBCASE("multiple crossings pick the one nearest the reference") {
    const auto grid = linspace(0.0, 10.0, 201);
    std::vector<double> s, zero(grid.size(), 0.0);
    for (double x : grid) s.push_back(std::sin(x));
    const Crossing far = curve_intersection(grid, s, zero, 6.0);
    CHECK(far.multiple);
    CHECK(far.count == 4);
    CHECK(far.x == doctest::Approx(2 * std::numbers::pi).epsilon(1e-3));
    CHECK(curve_intersection(grid, s, zero).x == doctest::Approx(0.0));
  }
  CHECK_THROWS_AS(curve_intersection(std::vector<double>{0, 1}, std::vector<double>{0}, std::vector<double>{1, 2}),
                  DomainError);
}

TEST_CASE("critical_point_extrapolation") {
  std::vector<std::pair<double, double>> pts;
  for (int N : {10, 15, 20, 25, 30, 35, 40}) {
    const double x = 1.0 / N;
    pts.emplace_back(x, 1.15625 - 2.0 * x + 5.0 * x * x - 30.0 * x * x * x);
  }
  for (int degree : {3, 4}) {
    const PolyFit f = critical_point_extrapolation(pts, degree);
    CHECK(f.intercept == doctest::Approx(1.15625).epsilon(1e-10));
    CHECK(f.residual < 1e-10);
  }
  std::vector<std::pair<double, double>> flat{{0.1, 1.2}, {0.05, 1.2}, {0.02, 1.2}, {0.01, 1.2}, {0.005, 1.2}};
  CHECK(critical_point_extrapolation(flat, 4).intercept == doctest::Approx(1.2).epsilon(1e-10));
  CHECK_THROWS_AS(critical_point_extrapolation(std::span(flat).first(4), 4), DomainError);
}

TEST_CASE("sweep: single point, bookkeeping, tags") {
  SweepSpec s;
  s.lo = 2.5;
  s.hi = 2.5;
  s.points = 1;
  const SweepResult r = run_sweep({0.6, 1.0, 1.0, 1.0, 0.0, 6}, s);
  REQUIRE(r.points.size() == 1);
  const PointResult& p = r.points[0];
  CHECK(p.ok);
  CHECK(p.value == 2.5);
  CHECK(p.params.Jy == 2.5);
  CHECK(p.high_anisotropy);
  CHECK(p.mf.kind == MfPhase::ferromagnetic);
  CHECK(p.dSxx >= 0.0);
  CHECK(p.dMz >= 0.0);
  CHECK(p.dS >= 0.0);
  CHECK(p.dMz == doctest::Approx(std::abs(p.quantum.Mz - p.mf.state.sz)));
  CHECK(r.failures() == 0);
}

TEST_CASE("sweep: failures are recorded and the sweep continues") {
  SweepSpec s;
  s.param = SweepParam::gamma;
  s.lo = 0.0;  // gamma = 0 with Gamma > 0 has a degenerate steady state
  s.hi = 1.0;
  s.points = 2;
  const SweepResult r = run_sweep({0.6, 1.2, 1.0, 1.0, 0.5, 4}, s);
  REQUIRE(r.points.size() == 2);
  CHECK_FALSE(r.points[0].ok);
  CHECK_FALSE(r.points[0].error.empty());
  CHECK(r.points[1].ok);
  CHECK(r.failures() == 1);
  CHECK(csv(observables_table(r)).find("\n4,0,,,,") != std::string::npos);
}

TEST_CASE("sweep: workers and checkpoints do not change the output") {
  const ModelParams base{0.6, 1.0, 1.0, 1.0, 0.0, 8};
  SweepSpec s;
  s.lo = 0.9;
  s.hi = 1.5;
  s.points = 5;
  s.Ns = {6, 9};
  RunOptions serial;
  serial.with_chi = true;
  serial.n_theta = 16;
  const std::string reference = csv(steady_state_table(run_sweep(base, s, serial)));
  CHECK(reference == csv(steady_state_table(run_sweep(base, s, serial))));

  RunOptions pool = serial;
  pool.workers = 3;
  CHECK(reference == csv(steady_state_table(run_sweep(base, s, pool))));

  const auto dir = scratch_dir("ckpt");
  RunOptions ck = serial;
  ck.checkpoint_dir = dir;
  CHECK(reference == csv(steady_state_table(run_sweep(base, s, ck))));
  CHECK(std::distance(std::filesystem::directory_iterator(dir), {}) == 10);

  ck.resume = true;
  int reused = 0;
  ck.on_point = [&](const PointResult& p) { reused += p.from_checkpoint; };
  CHECK(reference == csv(steady_state_table(run_sweep(base, s, ck))));
  CHECK(reused == 10);

  // Another configuration must not pick up these files.
  reused = 0;
  SweepSpec other = s;
  other.hi = 1.6;
  run_sweep(base, other, ck);
  CHECK(reused == 0);
  std::filesystem::remove_all(dir);

  RunOptions bad;
  bad.resume = true;
  CHECK_THROWS_AS(run_sweep(base, s, bad), ConfigError);
}

TEST_CASE("Bc crossings of neighbouring sizes bracket the mean-field point") {
  SweepSpec s;
  s.lo = 1.0;
  s.hi = 1.4;
  s.points = 11;
  s.Ns = {10, 15, 20};
  const auto r = run_sweep({0.6, 1.0, 1.0, 1.0, 0.0, 10}, s);
  const auto cs = bc_crossings(r);
  REQUIRE(cs.size() == 2);
  for (const auto& c : cs) {
    REQUIRE(c.crossing.has_value());
    CHECK(c.crossing->x > 1.1);
    CHECK(c.crossing->x < 1.2);
  }
  // The crossing drifts down towards the thermodynamic value.
  CHECK(cs[1].crossing->x < cs[0].crossing->x);
}

TEST_CASE("phase diagram") {
  const std::vector<double> Jx{0.2, 0.6, 0.9};
  const auto Jy = linspace(0.0, 1.8, 10);
  const PhaseDiagram d = phase_diagram(Jx, Jy, 1.0, 1.0, 8, 13);
  REQUIRE(d.columns.size() == 3);
  CHECK(d.columns[2].Jy_mf.value() == doctest::Approx(1.625).epsilon(1e-12));
  CHECK(d.columns[1].Jy_mf.value() == doctest::Approx(1.15625).epsilon(1e-12));
  for (const auto& c : d.columns) {
    CAPTURE(c.Jx);
    for (std::size_t i = 0; i < Jy.size(); ++i)
      if (Jy[i] <= c.Jx) CHECK(c.cells[i] == Phase::paramagnetic);
  }
  REQUIRE(d.columns[1].Jy_cross.has_value());
  CHECK(d.columns[1].Jy_cross.value() == doctest::Approx(1.15).epsilon(0.05));
  CHECK(d.columns[1].cells.back() == Phase::ferromagnetic);
  CHECK_THROWS_AS(phase_diagram(Jx, Jy, 1.0, 1.0, 13, 8), ConfigError);

  const Table t = phase_table(d);
  CHECK(t.rows.size() == Jx.size() * Jy.size());
}

TEST_CASE("gap: dense and antigap methods agree") {
  for (int N : {3, 4}) {
    for (double Jy : {-0.5, 1.3}) {
      CAPTURE(N);
      CAPTURE(Jy);
      const ModelParams p{0.6, Jy, 1.0, 1.0, 0.0, N};
      GapOptions dense;
      dense.method = GapMethod::dense;
      GapOptions anti;
      anti.verify_mirror = true;
      const GapPoint a = liouvillian_gap(p, dense), b = liouvillian_gap(p, anti);
      REQUIRE(a.ok);
      REQUIRE(b.ok);
      CHECK(a.pt_detected);
      CHECK(b.pt_detected);
      CHECK(a.eta.value() == doctest::Approx(0.5 * N).epsilon(1e-8));
      CHECK(b.gap == doctest::Approx(a.gap).epsilon(1e-8));
    }
  }
  const GapPoint collective = liouvillian_gap({0.6, 1.0, 1.0, 1.0 / 3, 2.0 / 3, 3});
  CHECK_FALSE(collective.ok);
  GapOptions dense;
  dense.method = GapMethod::dense;
  const GapPoint cd = liouvillian_gap({0.6, 1.0, 1.0, 1.0 / 3, 2.0 / 3, 3}, dense);
  CHECK(cd.ok);
  CHECK_FALSE(cd.pt_detected);
  CHECK_FALSE(cd.eta.has_value());
}

TEST_CASE("gap: minimum over Jy and no closing for Jy <= 0") {
  GapOptions dense;
  dense.method = GapMethod::dense;
  const GapMinimum m = minimize_gap_over_Jy({0.6, 1.0, 1.0, 1.0, 0.0, 3}, 0.5, 2.5, 9, dense);
  for (const auto& g : m.scan) CHECK(m.gap <= g.gap + 1e-12);
  CHECK(m.Jy > 1.0);
  CHECK(m.Jy < 1.6);

  std::vector<GapPoint> pts;
  for (int N : {2, 3, 4, 5})
    for (double Jy : {-2.0, -1.0, -0.5, 0.0}) pts.push_back(liouvillian_gap({0.6, Jy, 1.0, 1.0, 0.0, N}, dense));
  const GapSanity s = gap_sanity(pts);
  CHECK_FALSE(s.closing);
  CHECK(s.N_small == 2);
  CHECK(s.N_large == 5);
}

TEST_CASE("susceptibility peak sits above the mean-field point") {
  const ChiPeak c = maximize_chi_over_Jy({0.6, 1.0, 1.0, 1.0, 0.0, 10}, 0.9, 2.0, 12, 16);
  for (const auto& [x, chi] : c.scan) CHECK(c.chi_max >= chi - 1e-12);
  CHECK(c.Jy > 1.15625);
}

TEST_CASE("mean-field bifurcation is unchanged by collective emission at fixed total rate") {
  SweepSpec s;
  s.lo = 1.0;
  s.hi = 1.4;
  s.points = 161;
  ModelParams local{0.6, 1.0, 1.0, 1.0, 0.0, kInfiniteN};
  ModelParams mixed{0.6, 1.0, 1.0, 1.0 / 3, 2.0 / 3, kInfiniteN};
  const auto a = mf_bifurcation(mf_sweep(local, s));
  const auto b = mf_bifurcation(mf_sweep(mixed, s));
  REQUIRE(a.has_value());
  REQUIRE(b.has_value());
  CHECK(*a == doctest::Approx(1.1575).epsilon(1e-12));  // first grid value above 1.15625
  CHECK(*b == *a);
  const Table t = mf_table(mf_sweep(local, s), SweepParam::Jy);
  CHECK(csv(t).rfind("Jy,sx,sy,sz,Sxx_mf,entropy_per_spin,branch\n", 0) == 0);
}

TEST_CASE("tables") {
  Table t{{"a", "b", "c"}, {}, {}};
  t.add({1.0 / 3, std::string("x,y"), Cell()});
  t.add({static_cast<long long>(2), true, 0.5});
  CHECK(csv(t) == "a,b,c\n0.333333333333333,\"x,y\",\n2,true,0.5\n");
  std::ostringstream j;
  write_json(j, t);
  CHECK(j.str().find("\"c\": null") != std::string::npos);
  CHECK_THROWS(t.add({1.0}));
  CHECK_THROWS_AS(format_from_string("xml"), ConfigError);

  GapPoint g;
  g.N = 4;
  g.Jy = 1.2;
  g.gap = 0.25;
  g.ok = true;
  g.eta = 2.0;
  g.pt_detected = true;
  CHECK(csv(gap_table({g})) == "N,Jy,gap,method,eta,pt_detected\n4,1.2,0.25,antigap,2,true\n");
}
