#include "pixyz/tables.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

namespace pixyz {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

std::string csv_cell(const Cell& c) {
  struct V {
    std::string operator()(std::monostate) const { return {}; }
    std::string operator()(double v) const { return format_double(v); }
    std::string operator()(long long v) const { return std::to_string(v); }
    std::string operator()(bool v) const { return v ? "true" : "false"; }
    std::string operator()(const std::string& s) const {
      if (s.find_first_of(",\"\n") == std::string::npos) return s;
      std::string q = "\"";
      for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
      return q + "\"";
    }
  };
  return std::visit(V{}, c);
}

nlohmann::json json_cell(const Cell& c) {
  struct V {
    nlohmann::json operator()(std::monostate) const { return nullptr; }
    nlohmann::json operator()(double v) const { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }
    nlohmann::json operator()(long long v) const { return v; }
    nlohmann::json operator()(bool v) const { return v; }
    nlohmann::json operator()(const std::string& s) const { return s; }
  };
  return std::visit(V{}, c);
}

Cell opt(const std::optional<double>& v) { return v ? Cell(*v) : Cell(); }
Cell num(double v, bool ok) { return ok ? Cell(v) : Cell(); }
Cell integer(int v) { return static_cast<long long>(v); }

}  // namespace

void Table::add(std::vector<Cell> row) {
  if (row.size() != columns.size()) throw Error("table row has " + std::to_string(row.size()) + " cells, expected " +
                                                std::to_string(columns.size()));
  rows.push_back(std::move(row));
}

Format format_from_string(const std::string& s) {
  if (s == "csv") return Format::csv;
  if (s == "json") return Format::json;
  throw ConfigError("unknown format: " + s);
}

void write_csv(std::ostream& out, const Table& t) {
  for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_cell(row[i]);
    out << '\n';
  }
}

void write_json(std::ostream& out, const Table& t) {
  nlohmann::ordered_json doc;
  auto& meta = doc["meta"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : t.meta) meta[k] = v;
  doc["columns"] = t.columns;
  auto& rows = doc["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    nlohmann::ordered_json r = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size(); ++i) r[t.columns[i]] = json_cell(row[i]);
    rows.push_back(std::move(r));
  }
  out << doc.dump(1) << '\n';
}

void write_table(std::ostream& out, const Table& t, Format f) {
  if (f == Format::csv)
    write_csv(out, t);
  else
    write_json(out, t);
}

void write_table(const std::string& path, const Table& t, Format f) {
  if (path.empty() || path == "-") {
    write_table(std::cout, t, f);
    return;
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open output file " + path);
  write_table(out, t, f);
}

Table mf_table(const std::vector<MfRow>& rows, SweepParam param) {
  Table t{{std::string(to_string(param)), "sx", "sy", "sz", "Sxx_mf", "entropy_per_spin", "branch"}, {}, {}};
  for (const auto& r : rows)
    t.add({r.value, r.branch.state.sx, r.branch.state.sy, r.branch.state.sz, mf_structure_factor_x(r.branch),
           r.branch.entropy_per_spin, std::string(to_string(r.branch.kind))});
  return t;
}

namespace {

void sweep_meta(Table& t, const SweepResult& r) {
  char hash[20];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(r.config_hash));
  t.meta = {{"Jx", format_double(r.base.Jx)},       {"Jy", format_double(r.base.Jy)},
            {"Jz", format_double(r.base.Jz)},       {"gamma", format_double(r.base.gamma)},
            {"Gamma", format_double(r.base.Gamma)}, {"sweep", std::string(to_string(r.spec.param))},
            {"config_hash", hash},                  {"started", r.started},
            {"finished", r.finished},               {"failures", std::to_string(r.failures())}};
}

}  // namespace

Table steady_state_table(const SweepResult& r) {
  Table t{{"N", std::string(to_string(r.spec.param)), "ok", "Sxx", "Syy", "Mz", "entropy_per_spin", "purity", "Bc_x",
           "Bc_y", "chi_av", "Sxx_mf", "Mz_mf", "entropy_mf", "mf_branch", "dSxx", "dMz", "dS", "high_anisotropy",
           "residual", "error"},
          {},
          {}};
  sweep_meta(t, r);
  for (const auto& p : r.points) {
    const bool ok = p.ok;
    t.add({integer(p.N), p.value, ok, num(p.quantum.Sxx, ok), num(p.quantum.Syy, ok), num(p.quantum.Mz, ok),
           num(p.quantum.entropy_per_spin, ok), num(p.quantum.purity, ok), num(p.quantum.Bc_x, ok),
           num(p.quantum.Bc_y, ok), opt(p.quantum.chi_av), num(mf_structure_factor_x(p.mf), ok),
           num(p.mf.state.sz, ok), num(p.mf.entropy_per_spin, ok),
           ok ? Cell(std::string(to_string(p.mf.kind))) : Cell(), num(p.dSxx, ok), num(p.dMz, ok), num(p.dS, ok),
           p.high_anisotropy, num(p.residual, ok), p.error});
  }
  return t;
}

Table observables_table(const SweepResult& r) {
  Table t{{"N", std::string(to_string(r.spec.param)), "Sxx", "Syy", "Mz", "entropy_per_spin", "purity", "Bc_x", "Bc_y",
           "chi_av"},
          {},
          {}};
  sweep_meta(t, r);
  for (const auto& p : r.points) {
    const bool ok = p.ok;
    t.add({integer(p.N), p.value, num(p.quantum.Sxx, ok), num(p.quantum.Syy, ok), num(p.quantum.Mz, ok),
           num(p.quantum.entropy_per_spin, ok), num(p.quantum.purity, ok), num(p.quantum.Bc_x, ok),
           num(p.quantum.Bc_y, ok), opt(p.quantum.chi_av)});
  }
  return t;
}

Table chi_table(const SweepResult& r) {
  Table t{{"N", std::string(to_string(r.spec.param)), "chi_av"}, {}, {}};
  sweep_meta(t, r);
  for (const auto& p : r.points) t.add({integer(p.N), p.value, p.ok ? opt(p.quantum.chi_av) : Cell()});
  return t;
}

Table gap_table(const std::vector<GapPoint>& points) {
  Table t{{"N", "Jy", "gap", "method", "eta", "pt_detected"}, {}, {}};
  for (const auto& g : points)
    t.add({integer(g.N), g.Jy, num(g.gap, g.ok), std::string(to_string(g.method)), opt(g.eta), g.pt_detected});
  return t;
}

Table spectrum_table(const ModelParams& p, const SpectrumReport& r) {
  Table t{{"N", "Jy", "Gamma", "index", "re", "im"}, {}, {}};
  t.meta = {{"gap", format_double(r.gap)},
            {"pt_symmetric", r.pt_symmetric ? "true" : "false"},
            {"eta", r.eta ? format_double(*r.eta) : std::string()}};
  for (std::size_t i = 0; i < r.eigenvalues.size(); ++i)
    t.add({integer(p.N), p.Jy, p.Gamma, static_cast<long long>(i), r.eigenvalues[i].real(), r.eigenvalues[i].imag()});
  return t;
}

Table bc_table(const std::vector<BcCrossing>& crossings, const std::vector<PolyFit>& extrapolations) {
  Table t{{"N1", "N2", "inv_N1", "Jy_cross", "multiple", "crossings", "error"}, {}, {}};
  for (const auto& c : crossings)
    t.add({integer(c.N1), integer(c.N2), 1.0 / c.N1, c.crossing ? Cell(c.crossing->x) : Cell(),
           c.crossing ? Cell(c.crossing->multiple) : Cell(), integer(c.crossing ? c.crossing->count : 0), c.error});
  for (const auto& e : extrapolations) {
    t.meta.emplace_back("extrapolation_degree_" + std::to_string(e.degree), format_double(e.intercept));
    t.meta.emplace_back("extrapolation_degree_" + std::to_string(e.degree) + "_residual", format_double(e.residual));
  }
  return t;
}

Table phase_table(const PhaseDiagram& d) {
  Table t{{"Jx", "Jy", "phase", "Jy_cross", "Jy_mf", "mf_phase"}, {}, {}};
  t.meta = {{"Jz", format_double(d.Jz)},
            {"gamma", format_double(d.gamma)},
            {"N1", std::to_string(d.N1)},
            {"N2", std::to_string(d.N2)}};
  for (const auto& c : d.columns)
    for (std::size_t i = 0; i < d.Jy_grid.size(); ++i) {
      const double Jy = d.Jy_grid[i];
      const ModelParams mfp{c.Jx, Jy, d.Jz, d.gamma, 0.0, kInfiniteN};
      const Cell mf = std::string(mf_is_ferromagnetic(mfp) ? "FM" : "PM");
      t.add({c.Jx, Jy, std::string(to_string(c.cells[i])), opt(c.Jy_cross), opt(c.Jy_mf), mf});
    }
  return t;
}

Table fit_table(const std::vector<std::pair<std::string, FitResult>>& fits) {
  Table t{{"series", "alpha", "beta", "residual", "x_min", "x_max", "points"}, {}, {}};
  for (const auto& [name, f] : fits) t.add({name, f.alpha, f.beta, f.residual, f.x_min, f.x_max, integer(f.points)});
  return t;
}

}  // namespace pixyz
