// pixyz: command-line front end for sweeps and finite-size analysis.
//
// Exit codes: 0 success, 1 some points failed (or a run aborted), 2 bad
// configuration or arguments.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "pixyz/harness.hpp"
#include "pixyz/platform.hpp"
#include "pixyz/tables.hpp"

using namespace pixyz;

namespace {

constexpr int kOk = 0;
constexpr int kPartial = 1;
constexpr int kConfig = 2;

struct Common {
  std::string config;
  std::string out;
  std::string format = "csv";
  int workers = 1;
  bool resume = false;
};

Config load_config(const Common& c) {
  if (c.config.empty()) throw ConfigError("--config is required for this subcommand");
  std::ifstream in(c.config);
  if (!in) throw ConfigError("cannot read config file " + c.config);
  std::stringstream buf;
  buf << in.rdbuf();
  Config cfg = parse_config(buf.str());
  require_valid(cfg.params);
  if (const auto errs = validate(cfg.sweep); !errs.empty()) throw ConfigError(errs.front());
  return cfg;
}

std::string output_path(const Common& c, const Config* cfg) {
  if (!c.out.empty()) return c.out;
  return cfg ? cfg->sweep.output : std::string();
}

void emit(const Common& c, const Config* cfg, const Table& t) {
  write_table(output_path(c, cfg), t, format_from_string(c.format));
}

// "lo:hi:n" or a comma-separated list.
std::vector<double> parse_grid(const std::string& s) {
  std::vector<double> v;
  try {
    if (std::count(s.begin(), s.end(), ':') == 2) {
      const auto a = s.find(':'), b = s.rfind(':');
      const double lo = std::stod(s.substr(0, a)), hi = std::stod(s.substr(a + 1, b - a - 1));
      const int n = std::stoi(s.substr(b + 1));
      if (n < 1 || (n > 1 && !(lo < hi))) throw ConfigError("bad grid " + s);
      return linspace(lo, hi, n);
    }
    std::stringstream in(s);
    for (std::string tok; std::getline(in, tok, ',');) v.push_back(std::stod(tok));
  } catch (const std::logic_error&) {
    throw ConfigError("cannot parse grid '" + s + "' (use lo:hi:n or a comma list)");
  }
  if (v.empty()) throw ConfigError("empty grid");
  return v;
}

RunOptions run_options(const Common& c, const Config& cfg, const std::string& checkpoint_dir) {
  RunOptions o;
  o.workers = std::max(1, c.workers);
  o.resume = c.resume;
  std::string dir = checkpoint_dir;
  if (dir.empty() && c.resume) {
    const std::string out = output_path(c, &cfg);
    dir = (out.empty() || out == "-" ? std::string("pixyz") : out) + ".ckpt";
  }
  if (!dir.empty()) o.checkpoint_dir = dir;
  o.on_point = [](const PointResult& p) {
    if (!p.ok) std::cerr << "point N=" << p.N << " index=" << p.index << " failed: " << p.error << '\n';
  };
  return o;
}

int status(int failures) { return failures == 0 ? kOk : kPartial; }

// ---- CSV input for `fit` ----------------------------------------------------

struct CsvData {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::size_t column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ConfigError("column not found: " + name);
    return static_cast<std::size_t>(it - header.begin());
  }
};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        out.back() += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.emplace_back();
    } else if (ch != '\r') {
      out.back() += ch;
    }
  }
  return out;
}

CsvData read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  CsvData d;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path + " is empty");
  d.header = split_csv_line(line);
  while (std::getline(in, line))
    if (!line.empty()) d.rows.push_back(split_csv_line(line));
  return d;
}

}  // namespace

int main(int argc, char** argv) {
  select_reliable_blas_core(argv);

  CLI::App app{"pixyz: all-to-all dissipative XYZ model, steady states and finite-size scaling"};
  app.require_subcommand(1);
  Common c;
  app.add_option("--config", c.config, "JSON configuration file");
  app.add_option("--out", c.out, "output file (default: sweep.output, else stdout)");
  app.add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--workers", c.workers, "worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--resume", c.resume, "reuse per-point checkpoints");

  auto* mf = app.add_subcommand("mf-sweep", "mean-field stable branch along the sweep")->fallthrough();
  bool finite_n = false;
  mf->add_flag("--finite-n", finite_n, "use the configured N in gamma~ instead of N -> infinity");

  std::string ckpt;
  bool with_chi = false;
  int n_theta = 64;
  auto* ss = app.add_subcommand("ss-sweep", "steady states with mean-field discrepancies")->fallthrough();
  ss->add_option("--checkpoint-dir", ckpt, "directory for per-point checkpoints");
  ss->add_flag("--chi", with_chi, "also compute chi_av");
  ss->add_option("--n-theta", n_theta, "probe directions for chi_av")->check(CLI::Range(8, 100000));

  auto* obs = app.add_subcommand("observables", "steady-state observables table")->fallthrough();
  obs->add_option("--checkpoint-dir", ckpt, "directory for per-point checkpoints");
  obs->add_flag("--chi", with_chi, "also compute chi_av");
  obs->add_option("--n-theta", n_theta, "probe directions for chi_av")->check(CLI::Range(8, 100000));

  bool peak = false;
  int coarse = 12;
  auto* chi = app.add_subcommand("chi-sweep", "angular-averaged susceptibility")->fallthrough();
  chi->add_option("--checkpoint-dir", ckpt, "directory for per-point checkpoints");
  chi->add_option("--n-theta", n_theta, "probe directions")->check(CLI::Range(8, 100000));
  chi->add_flag("--peak", peak, "per-N maximum over Jy in [sweep.lo, sweep.hi] instead of the grid");
  chi->add_option("--coarse", coarse, "coarse scan points before refinement")->check(CLI::Range(3, 10000));

  std::string method = "antigap";
  bool minimize = false;
  bool verify = false;
  bool spectrum = false;
  auto* gap = app.add_subcommand("gap-sweep", "Liouvillian gap of the full product-basis operator")->fallthrough();
  gap->add_option("--method", method, "dense or antigap")->check(CLI::IsMember({"dense", "antigap"}));
  gap->add_flag("--min", minimize, "per-N minimum over Jy in [sweep.lo, sweep.hi]");
  gap->add_option("--coarse", coarse, "coarse scan points before refinement")->check(CLI::Range(3, 10000));
  gap->add_flag("--verify-mirror", verify, "antigap: confirm 2 eta from the fastest decay rate");
  gap->add_flag("--spectrum", spectrum, "write the complete dense spectrum at the configured Jy and N instead");

  auto* bc = app.add_subcommand("bc-cross", "bimodality crossings of (N, N+5) and 1/N extrapolation")->fallthrough();
  bc->add_option("--checkpoint-dir", ckpt, "directory for per-point checkpoints");

  std::string jx_grid = "0:1.4:15", jy_grid = "0:3:61";
  std::vector<int> pair{50, 60};
  auto* pd = app.add_subcommand("phase-diagram", "PM/FM classification from Bc crossings")->fallthrough();
  pd->add_option("--jx", jx_grid, "Jx grid (lo:hi:n or list)");
  pd->add_option("--jy", jy_grid, "Jy grid (lo:hi:n or list)");
  pd->add_option("--pair", pair, "system sizes N1 N2")->expected(2);

  std::string input, xcol = "N", ycol, group;
  auto* fit = app.add_subcommand("fit", "power-law fits y = beta x^alpha of a CSV table")->fallthrough();
  fit->add_option("--input", input, "CSV table produced by another subcommand")->required();
  fit->add_option("--x", xcol, "abscissa column");
  fit->add_option("--y", ycol, "ordinate column")->required();
  fit->add_option("--group", group, "fit separately for each value of this column");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (mf->parsed()) {
      Config cfg = load_config(c);
      if (!finite_n) cfg.params.N = kInfiniteN;
      emit(c, &cfg, mf_table(mf_sweep(cfg.params, cfg.sweep), cfg.sweep.param));
      return kOk;
    }

    if (ss->parsed() || obs->parsed()) {
      const Config cfg = load_config(c);
      RunOptions o = run_options(c, cfg, ckpt);
      o.with_chi = with_chi;
      o.n_theta = n_theta;
      const SweepResult r = run_sweep(cfg.params, cfg.sweep, o);
      emit(c, &cfg, ss->parsed() ? steady_state_table(r) : observables_table(r));
      return status(r.failures());
    }

    if (chi->parsed()) {
      const Config cfg = load_config(c);
      if (!peak) {
        RunOptions o = run_options(c, cfg, ckpt);
        o.with_chi = true;
        o.n_theta = n_theta;
        const SweepResult r = run_sweep(cfg.params, cfg.sweep, o);
        emit(c, &cfg, chi_table(r));
        return status(r.failures());
      }
      if (cfg.sweep.param != SweepParam::Jy) throw ConfigError("--peak needs a sweep over Jy");
      const std::vector<int> Ns = cfg.sweep.Ns.empty() ? std::vector<int>{cfg.params.N} : cfg.sweep.Ns;
      Table t{{"N", "Jy_peak", "chi_max", "evaluations"}, {}, {}};
      std::vector<double> xs, ys;
      int failures = 0;
      for (int N : Ns) {
        ModelParams p = cfg.params;
        p.N = N;
        try {
          const ChiPeak k = maximize_chi_over_Jy(p, cfg.sweep.lo, cfg.sweep.hi, coarse, n_theta);
          t.add({static_cast<long long>(N), k.Jy, k.chi_max, static_cast<long long>(k.evaluations)});
          xs.push_back(N);
          ys.push_back(k.chi_max);
        } catch (const SolverError& e) {
          ++failures;
          t.add({static_cast<long long>(N), Cell(), Cell(), Cell()});
          std::cerr << "N=" << N << ": " << e.what() << '\n';
        }
      }
      if (xs.size() >= 3) {
        const FitResult f = power_law_fit(xs, ys);
        t.meta = {{"alpha", std::to_string(f.alpha)}, {"beta", std::to_string(f.beta)},
                  {"residual", std::to_string(f.residual)}};
      }
      emit(c, &cfg, t);
      return status(failures);
    }

    if (gap->parsed()) {
      const Config cfg = load_config(c);
      if (cfg.sweep.param != SweepParam::Jy) throw ConfigError("gap-sweep needs a sweep over Jy");
      if (spectrum) {
        emit(c, &cfg, spectrum_table(cfg.params, full_spectrum(build_full_liouvillian(cfg.params))));
        return kOk;
      }
      GapOptions o;
      o.method = gap_method_from_string(method);
      o.verify_mirror = verify;
      const std::vector<int> Ns = cfg.sweep.Ns.empty() ? std::vector<int>{cfg.params.N} : cfg.sweep.Ns;
      std::vector<GapPoint> points;
      int failures = 0;
      if (minimize) {
        for (int N : Ns) {
          ModelParams p = cfg.params;
          p.N = N;
          try {
            const GapMinimum m = minimize_gap_over_Jy(p, cfg.sweep.lo, cfg.sweep.hi, coarse, o);
            p.Jy = m.Jy;
            GapPoint g = liouvillian_gap(p, o);
            points.push_back(g);
            failures += !g.ok;
          } catch (const SolverError& e) {
            ++failures;
            GapPoint g;
            g.N = N;
            g.method = o.method;
            g.error = e.what();
            points.push_back(g);
          }
        }
      } else {
        for (int N : Ns)
          for (int i = 0; i < cfg.sweep.points; ++i) {
            ModelParams p = cfg.params;
            p.N = N;
            p.Jy = sweep_value(cfg.sweep, i);
            points.push_back(liouvillian_gap(p, o));
            failures += !points.back().ok;
          }
      }
      for (const auto& g : points)
        if (!g.ok) std::cerr << "N=" << g.N << " Jy=" << g.Jy << ": " << g.error << '\n';
      Table t = gap_table(points);
      if (minimize) {
        std::vector<double> xs, ys;
        for (const auto& g : points)
          if (g.ok) {
            xs.push_back(g.N);
            ys.push_back(g.gap);
          }
        if (xs.size() >= 3) {
          const FitResult f = power_law_fit(xs, ys);
          t.meta = {{"alpha", std::to_string(f.alpha)}, {"residual", std::to_string(f.residual)}};
        }
      } else {
        try {
          const GapSanity s = gap_sanity(points);
          t.meta = {{"closing_for_nonpositive_Jy", s.closing ? "true" : "false"}};
          if (s.closing) std::cerr << "warning: gap closes with N for Jy <= 0\n";
        } catch (const DomainError&) {
        }
      }
      emit(c, &cfg, t);
      return status(failures);
    }

    if (bc->parsed()) {
      const Config cfg = load_config(c);
      if (cfg.sweep.param != SweepParam::Jy) throw ConfigError("bc-cross needs a sweep over Jy");
      const SweepResult r = run_sweep(cfg.params, cfg.sweep, run_options(c, cfg, ckpt));
      const auto crossings = bc_crossings(r);
      if (crossings.empty()) throw ConfigError("sweep.Ns contains no pair (N, N+5)");
      std::vector<std::pair<double, double>> pts;
      for (const auto& x : crossings)
        if (x.crossing) pts.emplace_back(1.0 / x.N1, x.crossing->x);
      std::vector<PolyFit> fits;
      for (int degree : {3, 4})
        if (pts.size() >= static_cast<std::size_t>(degree) + 1) fits.push_back(critical_point_extrapolation(pts, degree));
      emit(c, &cfg, bc_table(crossings, fits));
      int failures = r.failures();
      for (const auto& x : crossings) failures += !x.crossing;
      return status(failures);
    }

    if (pd->parsed()) {
      const Config cfg = load_config(c);
      const PhaseDiagram d = phase_diagram(parse_grid(jx_grid), parse_grid(jy_grid), cfg.params.Jz, cfg.params.gamma,
                                           pair[0], pair[1], std::max(1, c.workers));
      emit(c, &cfg, phase_table(d));
      int unresolved = 0;
      for (const auto& col : d.columns)
        if (!col.Jy_cross) {
          ++unresolved;
          std::cerr << "Jx=" << col.Jx << ": unresolved (" << col.error << ")\n";
        }
      return status(unresolved);
    }

    if (fit->parsed()) {
      const CsvData d = read_csv(input);
      const std::size_t ix = d.column(xcol), iy = d.column(ycol);
      const std::optional<std::size_t> ig = group.empty() ? std::nullopt : std::optional(d.column(group));
      std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> series;
      std::vector<std::string> order;
      for (const auto& row : d.rows) {
        if (row.size() != d.header.size()) throw ConfigError("ragged row in " + input);
        if (row[ix].empty() || row[iy].empty()) continue;
        const std::string key = ig ? group + "=" + row[*ig] : ycol;
        if (!series.count(key)) order.push_back(key);
        auto& [xs, ys] = series[key];
        xs.push_back(std::stod(row[ix]));
        ys.push_back(std::stod(row[iy]));
      }
      std::vector<std::pair<std::string, FitResult>> fits;
      int failures = 0;
      for (const auto& key : order) {
        try {
          fits.emplace_back(key, power_law_fit(series[key].first, series[key].second));
        } catch (const DomainError& e) {
          ++failures;
          std::cerr << key << ": " << e.what() << '\n';
        }
      }
      emit(c, nullptr, fit_table(fits));
      return status(failures);
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kPartial;
  }
  return kConfig;
}
