#include "pixyz/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>
#include <nlohmann/json.hpp>

namespace pixyz {

using json = nlohmann::json;

namespace {

// Runs fn(0..n-1) on up to `workers` threads. fn must not throw.
template <class F>
void parallel_for(int n, int workers, F&& fn) {
  if (workers <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::jthread> pool;
  const int w = std::min(workers, n);
  pool.reserve(static_cast<std::size_t>(w));
  for (int t = 0; t < w; ++t)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) fn(i);
    });
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int precision_bits(double lo, double hi, double xtol) {
  const double scale = std::max({std::abs(lo), std::abs(hi), 1.0});
  return std::clamp(static_cast<int>(std::ceil(-std::log2(xtol / scale))) + 1, 4, 40);
}

// Bracket around the smallest sample of a scan.
std::pair<double, double> bracket(const std::vector<double>& xs, const std::vector<double>& ys) {
  const auto k = static_cast<std::size_t>(std::min_element(ys.begin(), ys.end()) - ys.begin());
  return {xs[k == 0 ? 0 : k - 1], xs[std::min(k + 1, xs.size() - 1)]};
}

// ---- checkpoint records -------------------------------------------------

json report_json(const ObservableReport& r) {
  json j{{"Sxx", r.Sxx}, {"Syy", r.Syy}, {"Mz", r.Mz}, {"entropy_per_spin", r.entropy_per_spin},
         {"purity", r.purity}, {"Bc_x", r.Bc_x}, {"Bc_y", r.Bc_y}};
  j["chi_av"] = r.chi_av ? json(*r.chi_av) : json(nullptr);
  return j;
}

ObservableReport report_from(const json& j) {
  ObservableReport r;
  r.Sxx = j.at("Sxx");
  r.Syy = j.at("Syy");
  r.Mz = j.at("Mz");
  r.entropy_per_spin = j.at("entropy_per_spin");
  r.purity = j.at("purity");
  r.Bc_x = j.at("Bc_x");
  r.Bc_y = j.at("Bc_y");
  if (!j.at("chi_av").is_null()) r.chi_av = j.at("chi_av").get<double>();
  return r;
}

json point_json(const PointResult& p, std::uint64_t hash) {
  return json{{"hash", hash},
              {"N", p.N},
              {"index", p.index},
              {"value", p.value},
              {"ok", p.ok},
              {"error", p.error},
              {"quantum", report_json(p.quantum)},
              {"mf", {{"kind", to_string(p.mf.kind)},
                      {"sx", p.mf.state.sx},
                      {"sy", p.mf.state.sy},
                      {"sz", p.mf.state.sz},
                      {"entropy_per_spin", p.mf.entropy_per_spin}}},
              {"dSxx", p.dSxx},
              {"dMz", p.dMz},
              {"dS", p.dS},
              {"high_anisotropy", p.high_anisotropy},
              {"residual", p.residual},
              {"seconds", p.seconds}};
}

std::filesystem::path checkpoint_path(const std::filesystem::path& dir, int N, int index) {
  char name[64];
  std::snprintf(name, sizeof name, "N%03d_i%05d.json", N, index);
  return dir / name;
}

std::optional<PointResult> load_checkpoint(const std::filesystem::path& file, std::uint64_t hash,
                                           const ModelParams& params, int index) {
  std::ifstream in(file);
  if (!in) return std::nullopt;
  try {
    const json j = json::parse(in);
    if (j.at("hash").get<std::uint64_t>() != hash || j.at("N").get<int>() != params.N ||
        j.at("index").get<int>() != index || !j.at("ok").get<bool>())
      return std::nullopt;
    PointResult p;
    p.N = params.N;
    p.index = index;
    p.params = params;
    p.value = j.at("value");
    p.ok = true;
    p.quantum = report_from(j.at("quantum"));
    const json& m = j.at("mf");
    p.mf.kind = m.at("kind").get<std::string>() == to_string(MfPhase::ferromagnetic) ? MfPhase::ferromagnetic
                                                                                     : MfPhase::paramagnetic;
    p.mf.state = {m.at("sx"), m.at("sy"), m.at("sz")};
    p.mf.entropy_per_spin = m.at("entropy_per_spin");
    p.dSxx = j.at("dSxx");
    p.dMz = j.at("dMz");
    p.dS = j.at("dS");
    p.high_anisotropy = j.at("high_anisotropy");
    p.residual = j.at("residual");
    p.seconds = j.at("seconds");
    p.from_checkpoint = true;
    return p;
  } catch (const std::exception&) {
    return std::nullopt;  // unreadable or foreign file: recompute
  }
}

void store_checkpoint(const std::filesystem::path& file, const PointResult& p, std::uint64_t hash) {
  const auto tmp = std::filesystem::path(file).concat(".tmp");
  {
    std::ofstream out(tmp);
    if (!out) throw Error("cannot write checkpoint " + tmp.string());
    out << point_json(p, hash).dump() << '\n';
  }
  std::filesystem::rename(tmp, file);
}

}  // namespace

// ---------------------------------------------------------------------------
// Sweeps

int SweepResult::failures() const noexcept {
  return static_cast<int>(std::count_if(points.begin(), points.end(), [](const PointResult& p) { return !p.ok; }));
}

std::vector<const PointResult*> SweepResult::series(int N) const {
  std::vector<const PointResult*> out;
  for (const auto& p : points)
    if (p.N == N) out.push_back(&p);
  return out;
}

std::uint64_t config_hash(const ModelParams& b, const SweepSpec& s, const RunOptions& o) {
  // Sizes are excluded so a sweep can be extended to new N without
  // invalidating finished points.
  char buf[512];
  std::snprintf(buf, sizeof buf, "%a|%a|%a|%a|%a|%s|%a|%a|%d|%d|%d", b.Jx, b.Jy, b.Jz, b.gamma, b.Gamma,
                std::string(to_string(s.param)).c_str(), s.lo, s.hi, s.points, o.with_chi ? 1 : 0,
                o.with_chi ? o.n_theta : 0);
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (const char* c = buf; *c; ++c) {
    h ^= static_cast<unsigned char>(*c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

PointResult evaluate_point(const ModelParams& params, bool with_chi, int n_theta) {
  PointResult p;
  p.N = params.N;
  p.params = params;
  p.high_anisotropy = params.Jy / rate_scale(params) > kHighAnisotropyJy;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const SteadyObservables s = solve_observables(params, with_chi, n_theta);
    p.quantum = s.report;
    p.residual = s.residual;
    p.mf = mf_stable_branch(params);
    p.dSxx = std::abs(p.quantum.Sxx - mf_structure_factor_x(p.mf));
    p.dMz = std::abs(p.quantum.Mz - p.mf.state.sz);
    p.dS = std::abs(p.quantum.entropy_per_spin - p.mf.entropy_per_spin);
    p.ok = true;
  } catch (const std::exception& e) {
    p.ok = false;
    p.error = e.what();
  }
  p.seconds = seconds_since(t0);
  return p;
}

SweepResult run_sweep(const ModelParams& base, const SweepSpec& spec, const RunOptions& opts) {
  require_valid(base);
  if (const auto errs = validate(spec); !errs.empty()) throw ConfigError("invalid sweep: " + errs.front());
  if (opts.resume && !opts.checkpoint_dir) throw ConfigError("resume requested without a checkpoint directory");

  SweepResult r;
  r.base = base;
  r.spec = spec;
  r.config_hash = config_hash(base, spec, opts);
  r.started = utc_timestamp();
  const std::vector<int> Ns = spec.Ns.empty() ? std::vector<int>{base.N} : spec.Ns;

  for (int N : Ns)
    for (int i = 0; i < spec.points; ++i) {
      PointResult p;
      p.N = N;
      p.index = i;
      p.value = sweep_value(spec, i);
      p.params = with(base, spec.param, p.value);
      p.params.N = N;
      r.points.push_back(std::move(p));
    }
  if (opts.checkpoint_dir) std::filesystem::create_directories(*opts.checkpoint_dir);

  std::mutex report_mu;
  parallel_for(static_cast<int>(r.points.size()), opts.workers, [&](int k) {
    PointResult& slot = r.points[static_cast<std::size_t>(k)];
    const std::optional<std::filesystem::path> file =
        opts.checkpoint_dir ? std::optional(checkpoint_path(*opts.checkpoint_dir, slot.N, slot.index)) : std::nullopt;
    std::optional<PointResult> done;
    if (opts.resume) done = load_checkpoint(*file, r.config_hash, slot.params, slot.index);
    if (!done) {
      PointResult fresh = evaluate_point(slot.params, opts.with_chi, opts.n_theta);
      fresh.index = slot.index;
      fresh.value = slot.value;
      if (file && fresh.ok) {
        try {
          store_checkpoint(*file, fresh, r.config_hash);
        } catch (const std::exception& e) {
          fresh.error = e.what();  // result kept, checkpoint lost
        }
      }
      done = std::move(fresh);
    }
    slot = std::move(*done);
    if (opts.on_point) {
      const std::lock_guard lock(report_mu);
      opts.on_point(slot);
    }
  });
  r.finished = utc_timestamp();
  return r;
}

// ---------------------------------------------------------------------------
// Fits

FitResult power_law_fit(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw DomainError("power_law_fit: xs and ys differ in length");
  if (xs.size() < 3) throw DomainError("power_law_fit: at least 3 points required");
  const auto n = static_cast<double>(xs.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0) || !std::isfinite(xs[i]) || !std::isfinite(ys[i]))
      throw DomainError("power_law_fit: data must be positive and finite");
    sx += std::log(xs[i]);
    sy += std::log(ys[i]);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = std::log(xs[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(ys[i]) - my);
  }
  if (!(sxx > 0.0)) throw DomainError("power_law_fit: all x values coincide");
  FitResult f;
  f.alpha = sxy / sxx;
  const double lnb = my - f.alpha * mx;
  f.beta = std::exp(lnb);
  double ss = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = std::log(ys[i]) - (lnb + f.alpha * std::log(xs[i]));
    ss += e * e;
  }
  f.residual = std::sqrt(ss / n);
  f.x_min = *std::min_element(xs.begin(), xs.end());
  f.x_max = *std::max_element(xs.begin(), xs.end());
  f.points = static_cast<int>(xs.size());
  return f;
}

Crossing curve_intersection(std::span<const double> xs, std::span<const double> ya, std::span<const double> yb,
                            std::optional<double> reference) {
  if (xs.size() != ya.size() || xs.size() != yb.size()) throw DomainError("curve_intersection: curves must share the grid");
  if (xs.size() < 2) throw DomainError("curve_intersection: at least 2 grid points required");
  Crossing c;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(ya[i]) || !std::isfinite(yb[i])) throw DomainError("curve_intersection: non-finite sample");
    const double d0 = ya[i] - yb[i];
    if (d0 == 0.0) {
      c.all.push_back(xs[i]);
      continue;
    }
    if (i + 1 == xs.size()) break;
    const double d1 = ya[i + 1] - yb[i + 1];
    if (d1 != 0.0 && (d0 < 0.0) != (d1 < 0.0)) c.all.push_back(xs[i] + (xs[i + 1] - xs[i]) * d0 / (d0 - d1));
  }
  if (c.all.empty()) throw NoIntersectionError("curve_intersection: the curves do not cross on the grid");
  c.count = static_cast<int>(c.all.size());
  c.multiple = c.count > 1;
  c.x = c.all.front();
  if (reference)
    for (double x : c.all)
      if (std::abs(x - *reference) < std::abs(c.x - *reference)) c.x = x;
  return c;
}

PolyFit critical_point_extrapolation(std::span<const std::pair<double, double>> points, int degree) {
  if (degree < 0) throw DomainError("critical_point_extrapolation: degree >= 0 required");
  if (points.size() < static_cast<std::size_t>(degree) + 1)
    throw DomainError("critical_point_extrapolation: " + std::to_string(points.size()) + " points cannot fix a degree-" +
                      std::to_string(degree) + " polynomial");
  const auto m = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd V(m, degree + 1);
  Eigen::VectorXd y(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double x = points[static_cast<std::size_t>(i)].first;
    double xp = 1.0;
    for (int k = 0; k <= degree; ++k, xp *= x) V(i, k) = xp;
    y[i] = points[static_cast<std::size_t>(i)].second;
  }
  const auto qr = V.colPivHouseholderQr();
  if (qr.rank() < degree + 1) throw DomainError("critical_point_extrapolation: abscissae do not determine the fit");
  const Eigen::VectorXd c = qr.solve(y);
  PolyFit f;
  f.degree = degree;
  f.coeffs.assign(c.data(), c.data() + c.size());
  f.intercept = c[0];
  f.residual = std::sqrt((V * c - y).squaredNorm() / static_cast<double>(m));
  return f;
}

// ---------------------------------------------------------------------------
// Bc crossings

BcCrossing bc_crossing(const SweepResult& sweep, int N1, int N2) {
  BcCrossing out{N1, N2, std::nullopt, {}};
  if (sweep.spec.param != SweepParam::Jy) {
    out.error = "bimodality crossings need a sweep over Jy";
    return out;
  }
  const auto a = sweep.series(N1), b = sweep.series(N2);
  std::vector<double> xs, ya, yb;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i)
    if (a[i]->ok && b[i]->ok) {
      xs.push_back(a[i]->value);
      ya.push_back(a[i]->quantum.Bc_x);
      yb.push_back(b[i]->quantum.Bc_x);
    }
  std::optional<double> reference;
  try {
    reference = mf_phase_boundary({sweep.base.Jx}, sweep.base.Jz, rate_scale(sweep.base)).front().second;
  } catch (const DomainError&) {
  }
  try {
    out.crossing = curve_intersection(xs, ya, yb, reference);
  } catch (const DomainError& e) {
    out.error = e.what();
  }
  return out;
}

std::vector<BcCrossing> bc_crossings(const SweepResult& sweep) {
  const std::vector<int> Ns = sweep.spec.Ns.empty() ? std::vector<int>{sweep.base.N} : sweep.spec.Ns;
  const std::set<int> have(Ns.begin(), Ns.end());
  std::vector<BcCrossing> out;
  for (int N : have)
    if (have.count(N + kCrossingOffset)) out.push_back(bc_crossing(sweep, N, N + kCrossingOffset));
  return out;
}

// ---------------------------------------------------------------------------
// Phase diagram

const char* to_string(Phase p) noexcept {
  switch (p) {
    case Phase::paramagnetic: return "PM";
    case Phase::ferromagnetic: return "FM";
    case Phase::unresolved: return "unresolved";
  }
  return "?";
}

PhaseDiagram phase_diagram(const std::vector<double>& Jx_grid, const std::vector<double>& Jy_grid, double Jz,
                           double gamma, int N1, int N2, int workers) {
  if (!(N1 < N2)) throw ConfigError("phase_diagram: N1 < N2 required");
  if (Jx_grid.empty() || Jy_grid.size() < 2) throw ConfigError("phase_diagram: empty grid");
  PhaseDiagram d{Jx_grid, Jy_grid, Jz, gamma, N1, N2, {}};
  const int nx = static_cast<int>(Jx_grid.size()), ny = static_cast<int>(Jy_grid.size());

  // Bc_x per (column, size, Jy); NaN marks a failed solve.
  std::vector<double> bc(static_cast<std::size_t>(nx * 2 * ny), std::numeric_limits<double>::quiet_NaN());
  std::vector<std::string> errors(static_cast<std::size_t>(nx));
  std::mutex mu;
  parallel_for(nx * 2 * ny, workers, [&](int k) {
    const int col = k / (2 * ny), which = (k / ny) % 2, row = k % ny;
    const ModelParams p{Jx_grid[static_cast<std::size_t>(col)], Jy_grid[static_cast<std::size_t>(row)], Jz, gamma, 0.0,
                        which == 0 ? N1 : N2};
    try {
      bc[static_cast<std::size_t>(k)] = solve_observables(p, false).report.Bc_x;
    } catch (const std::exception& e) {
      const std::lock_guard lock(mu);
      errors[static_cast<std::size_t>(col)] = e.what();
    }
  });

  for (int col = 0; col < nx; ++col) {
    PhaseColumn c;
    c.Jx = Jx_grid[static_cast<std::size_t>(col)];
    try {
      c.Jy_mf = mf_phase_boundary({c.Jx}, Jz, gamma).front().second;
    } catch (const DomainError&) {
    }
    std::vector<double> xs, ya, yb;
    for (int row = 0; row < ny; ++row) {
      const double a = bc[static_cast<std::size_t>((col * 2) * ny + row)];
      const double b = bc[static_cast<std::size_t>((col * 2 + 1) * ny + row)];
      if (std::isfinite(a) && std::isfinite(b)) {
        xs.push_back(Jy_grid[static_cast<std::size_t>(row)]);
        ya.push_back(a);
        yb.push_back(b);
      }
    }
    c.error = errors[static_cast<std::size_t>(col)];
    try {
      const Crossing x = curve_intersection(xs, ya, yb, c.Jy_mf);
      c.Jy_cross = x.x;
      c.multiple = x.multiple;
    } catch (const DomainError& e) {
      if (c.error.empty()) c.error = e.what();
    }
    const bool all_below = std::all_of(Jy_grid.begin(), Jy_grid.end(), [&](double y) { return y <= c.Jx; });
    for (double y : Jy_grid) {
      if (c.Jy_cross)
        c.cells.push_back(y > *c.Jy_cross ? Phase::ferromagnetic : Phase::paramagnetic);
      else
        c.cells.push_back(all_below || y <= c.Jx ? Phase::paramagnetic : Phase::unresolved);
    }
    d.columns.push_back(std::move(c));
  }
  return d;
}

// ---------------------------------------------------------------------------
// Gap

const char* to_string(GapMethod m) noexcept { return m == GapMethod::dense ? "dense" : "antigap"; }

GapMethod gap_method_from_string(std::string_view s) {
  if (s == "dense") return GapMethod::dense;
  if (s == "antigap") return GapMethod::antigap;
  throw ConfigError("unknown gap method: " + std::string(s));
}

GapPoint liouvillian_gap(const ModelParams& params, const GapOptions& opts) {
  require_valid(params);
  GapPoint g;
  g.N = params.N;
  g.Jy = params.Jy;
  g.method = opts.method;
  try {
    if (opts.method == GapMethod::dense) {
      const SpectrumReport rep = full_spectrum(build_full_liouvillian(params));
      g.gap = rep.gap;
      g.eta = rep.eta;
      g.pt_detected = rep.pt_symmetric;
    } else {
      if (params.Gamma != 0.0)
        throw SymmetryError("antigap: collective dissipation removes the mirror axis; use the dense method");
      const LinearOperator L = full_liouvillian_operator(params);
      const double eta = 0.5 * params.N * params.gamma;
      g.eta = eta;
      g.pt_detected = true;
      if (opts.verify_mirror) {
        const double d = max_damping(L, opts.arnoldi);
        g.pt_detected = std::abs(d - 2.0 * eta) <= 1e-6 * std::max(1.0, 2.0 * eta);
        if (!g.pt_detected) throw SymmetryError("antigap: fastest decay rate " + std::to_string(d) + " is not 2 eta");
      }
      const AntigapResult a = gap_via_antigap(L, eta, opts.arnoldi);
      g.gap = a.gap;
      g.matvecs = a.arnoldi.matvecs;
    }
    g.ok = true;
  } catch (const std::exception& e) {
    g.ok = false;
    g.error = e.what();
  }
  return g;
}

GapMinimum minimize_gap_over_Jy(const ModelParams& params, double lo, double hi, int coarse, const GapOptions& opts,
                                double xtol) {
  if (coarse < 3 || !(lo < hi)) throw ConfigError("minimize_gap_over_Jy: need lo < hi and >= 3 coarse points");
  GapMinimum m;
  m.N = params.N;
  auto gap_at = [&](double Jy) {
    ModelParams p = params;
    p.Jy = Jy;
    GapPoint g = liouvillian_gap(p, opts);
    ++m.evaluations;
    if (!g.ok) throw SolverError("gap at Jy=" + std::to_string(Jy) + ": " + g.error);
    return g;
  };
  const auto xs = linspace(lo, hi, coarse);
  std::vector<double> ys;
  for (double x : xs) {
    m.scan.push_back(gap_at(x));
    ys.push_back(m.scan.back().gap);
  }
  const auto [a, b] = bracket(xs, ys);
  std::uintmax_t iters = 60;
  const auto best = boost::math::tools::brent_find_minima([&](double x) { return gap_at(x).gap; }, a, b,
                                                          precision_bits(lo, hi, xtol), iters);
  m.Jy = best.first;
  m.gap = best.second;
  const auto k = static_cast<std::size_t>(std::min_element(ys.begin(), ys.end()) - ys.begin());
  if (ys[k] < m.gap) {  // Brent may stop on a kink above a grid sample
    m.Jy = xs[k];
    m.gap = ys[k];
  }
  return m;
}

GapSanity gap_sanity(const std::vector<GapPoint>& points) {
  std::map<int, double> smallest;
  for (const auto& g : points)
    if (g.ok && g.Jy <= 0.0) {
      auto [it, fresh] = smallest.try_emplace(g.N, g.gap);
      if (!fresh) it->second = std::min(it->second, g.gap);
    }
  if (smallest.size() < 2) throw DomainError("gap_sanity: need Jy <= 0 points for two sizes");
  GapSanity s;
  s.N_small = smallest.begin()->first;
  s.min_gap_small_N = smallest.begin()->second;
  s.N_large = smallest.rbegin()->first;
  s.min_gap_large_N = smallest.rbegin()->second;
  s.closing = s.min_gap_large_N < 0.5 * s.min_gap_small_N;
  return s;
}

// ---------------------------------------------------------------------------
// Susceptibility

ChiPeak maximize_chi_over_Jy(const ModelParams& params, double lo, double hi, int coarse, int n_theta, double xtol) {
  if (coarse < 3 || !(lo < hi)) throw ConfigError("maximize_chi_over_Jy: need lo < hi and >= 3 coarse points");
  ChiPeak c;
  c.N = params.N;
  auto neg_chi = [&](double Jy) {
    ModelParams p = params;
    p.Jy = Jy;
    SusceptibilityOptions o;
    o.n_theta = n_theta;
    ++c.evaluations;
    return -averaged_susceptibility(p, o).chi_av;
  };
  const auto xs = linspace(lo, hi, coarse);
  std::vector<double> ys;
  for (double x : xs) {
    ys.push_back(neg_chi(x));
    c.scan.emplace_back(x, -ys.back());
  }
  const auto [a, b] = bracket(xs, ys);
  std::uintmax_t iters = 60;
  const auto best = boost::math::tools::brent_find_minima(neg_chi, a, b, precision_bits(lo, hi, xtol), iters);
  c.Jy = best.first;
  c.chi_max = -best.second;
  const auto k = static_cast<std::size_t>(std::min_element(ys.begin(), ys.end()) - ys.begin());
  if (-ys[k] > c.chi_max) {
    c.Jy = xs[k];
    c.chi_max = -ys[k];
  }
  return c;
}

// ---------------------------------------------------------------------------
// Mean field

std::vector<MfRow> mf_sweep(const ModelParams& params, const SweepSpec& spec) {
  if (const auto errs = validate(spec); !errs.empty()) throw ConfigError("invalid sweep: " + errs.front());
  std::vector<MfRow> rows;
  for (int i = 0; i < spec.points; ++i) {
    const double v = sweep_value(spec, i);
    rows.push_back({v, mf_stable_branch(with(params, spec.param, v))});
  }
  return rows;
}

std::optional<double> mf_bifurcation(const std::vector<MfRow>& rows) {
  for (const auto& r : rows)
    if (r.branch.kind == MfPhase::ferromagnetic) return r.value;
  return std::nullopt;
}

// ---------------------------------------------------------------------------

std::vector<double> linspace(double lo, double hi, int n) {
  SweepSpec s;
  s.lo = lo;
  s.hi = hi;
  s.points = n;
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(sweep_value(s, i));
  return v;
}

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace pixyz
