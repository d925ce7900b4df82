#pragma once

// Figure-ready tables: CSV (header row, '.' decimal) or JSON.

#include <iosfwd>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "pixyz/harness.hpp"

namespace pixyz {

using Cell = std::variant<std::monostate, double, long long, bool, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::pair<std::string, std::string>> meta;  // JSON only

  void add(std::vector<Cell> row);
};

enum class Format { csv, json };
Format format_from_string(const std::string& s);

/// Doubles use 15 significant digits; empty cells are written as "" in CSV
/// and null in JSON.
void write_csv(std::ostream& out, const Table& t);
void write_json(std::ostream& out, const Table& t);
void write_table(std::ostream& out, const Table& t, Format f);
/// Writes to a file, or to stdout when path is empty or "-".
void write_table(const std::string& path, const Table& t, Format f);

Table mf_table(const std::vector<MfRow>& rows, SweepParam param);
Table steady_state_table(const SweepResult& r);  // everything per point
Table observables_table(const SweepResult& r);
Table gap_table(const std::vector<GapPoint>& points);
/// Complete spectrum: one row per eigenvalue, ordered as in SpectrumReport.
Table spectrum_table(const ModelParams& params, const SpectrumReport& r);
Table chi_table(const SweepResult& r);
Table bc_table(const std::vector<BcCrossing>& crossings, const std::vector<PolyFit>& extrapolations);
Table phase_table(const PhaseDiagram& d);
Table fit_table(const std::vector<std::pair<std::string, FitResult>>& fits);

}  // namespace pixyz
