#pragma once

// Sweep orchestration and the finite-size analysis built on top of it:
// quantum-vs-mean-field tables, power-law fits, curve crossings,
// 1/N extrapolation, gap and susceptibility scans, phase diagrams.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pixyz/errors.hpp"
#include "pixyz/meanfield.hpp"
#include "pixyz/model.hpp"
#include "pixyz/observables.hpp"
#include "pixyz/spectral.hpp"

namespace pixyz {

/// Jy / rate above which rows are tagged high-anisotropy.
inline constexpr double kHighAnisotropyJy = 2.3;
/// Offset between the two sizes whose Bc curves are intersected.
inline constexpr int kCrossingOffset = 5;

// ---- sweeps -----------------------------------------------------------------

struct PointResult {
  int N = 0;
  int index = 0;     // position on the sweep grid
  double value = 0;  // swept parameter
  ModelParams params;
  bool ok = false;
  std::string error;

  ObservableReport quantum;
  MfBranch mf;
  double dSxx = 0.0;  // |Sxx - sx_mf^2|
  double dMz = 0.0;   // |Mz - sz_mf|
  double dS = 0.0;    // |S/N - s_mf|
  bool high_anisotropy = false;
  double residual = 0.0;  // steady-state residual
  double seconds = 0.0;   // wall time (not part of the tables)
  bool from_checkpoint = false;
};

struct SweepResult {
  ModelParams base;
  SweepSpec spec;
  std::vector<PointResult> points;  // ordered by (N in spec order, index)
  std::uint64_t config_hash = 0;
  std::string started;   // ISO-8601 UTC
  std::string finished;

  int failures() const noexcept;
  /// Rows of one system size, grid order.
  std::vector<const PointResult*> series(int N) const;
};

struct RunOptions {
  int workers = 1;
  std::optional<std::filesystem::path> checkpoint_dir;
  bool resume = false;     // reuse checkpoints whose hash matches
  bool with_chi = false;   // also compute chi_av (linear response)
  int n_theta = 64;
  std::function<void(const PointResult&)> on_point;  // called from workers, serialized
};

/// Stable 64-bit hash of everything that determines a sweep's numbers.
std::uint64_t config_hash(const ModelParams& base, const SweepSpec& spec, const RunOptions& opts);

/// Steady state, observables and mean-field reference for every (N, grid
/// point). The swept value overrides the base parameter; spec.Ns empty means
/// {base.N}. Failed points are recorded, never dropped.
SweepResult run_sweep(const ModelParams& base, const SweepSpec& spec, const RunOptions& opts = {});

/// One point, same bookkeeping as run_sweep.
PointResult evaluate_point(const ModelParams& params, bool with_chi, int n_theta = 64);

// ---- fits ---------------------------------------------------------------------

struct FitResult {
  double beta = 0.0;
  double alpha = 0.0;
  double residual = 0.0;  // RMS of ln y - ln(beta x^alpha)
  double x_min = 0.0;
  double x_max = 0.0;
  int points = 0;
};

/// Least squares y = beta x^alpha in log-log space. Needs >= 3 points and
/// strictly positive data (DomainError otherwise).
FitResult power_law_fit(std::span<const double> xs, std::span<const double> ys);

class NoIntersectionError : public DomainError {
 public:
  using DomainError::DomainError;
};

struct Crossing {
  double x = 0.0;
  int count = 0;          // sign changes found
  bool multiple = false;  // count > 1; x is the one nearest the reference
  std::vector<double> all;
};

/// Crossing of two curves sampled on the same grid, by linear interpolation
/// of the sign change of ya - yb. Among several crossings the one nearest
/// `reference` is returned (the first if no reference is given).
Crossing curve_intersection(std::span<const double> xs, std::span<const double> ya, std::span<const double> yb,
                            std::optional<double> reference = std::nullopt);

struct PolyFit {
  int degree = 0;
  std::vector<double> coeffs;  // ascending powers of 1/N
  double intercept = 0.0;      // value at 1/N = 0
  double residual = 0.0;       // RMS
};

/// Polynomial least squares in 1/N through (1/N, Jy*) points.
PolyFit critical_point_extrapolation(std::span<const std::pair<double, double>> points, int degree);

// ---- crossings of the bimodality coefficient -------------------------------------

struct BcCrossing {
  int N1 = 0;
  int N2 = 0;
  std::optional<Crossing> crossing;
  std::string error;
};

/// Bc_x crossings for consecutive pairs (N, N + kCrossingOffset) present in
/// a sweep over Jy; the mean-field boundary is the reference point.
std::vector<BcCrossing> bc_crossings(const SweepResult& sweep);
/// Same for one explicit pair.
BcCrossing bc_crossing(const SweepResult& sweep, int N1, int N2);

// ---- phase diagram ---------------------------------------------------------------

enum class Phase { paramagnetic, ferromagnetic, unresolved };
const char* to_string(Phase p) noexcept;

struct PhaseColumn {
  double Jx = 0.0;
  std::optional<double> Jy_cross;   // Bc_x crossing of the N pair
  bool multiple = false;
  std::optional<double> Jy_mf;      // mean-field boundary, if defined
  std::vector<Phase> cells;         // one per Jy grid value
  std::string error;
};

struct PhaseDiagram {
  std::vector<double> Jx_grid;
  std::vector<double> Jy_grid;
  double Jz = 1.0;
  double gamma = 1.0;
  int N1 = 0;
  int N2 = 0;
  std::vector<PhaseColumn> columns;
};

/// Classifies each (Jx, Jy) by the side of the Bc_x crossing of sizes N1 < N2
/// (FM above). Columns without a crossing are unresolved unless every Jy
/// lies at or below Jx, which is paramagnetic.
PhaseDiagram phase_diagram(const std::vector<double>& Jx_grid, const std::vector<double>& Jy_grid, double Jz,
                           double gamma, int N1, int N2, int workers = 1);

// ---- Liouvillian gap ---------------------------------------------------------------

enum class GapMethod { dense, antigap };
const char* to_string(GapMethod m) noexcept;
GapMethod gap_method_from_string(std::string_view s);

struct GapPoint {
  int N = 0;
  double Jy = 0.0;
  double gap = 0.0;
  GapMethod method = GapMethod::antigap;
  std::optional<double> eta;
  bool pt_detected = false;
  bool ok = false;
  std::string error;
  long matvecs = 0;
};

struct GapOptions {
  GapMethod method = GapMethod::antigap;
  ArnoldiOptions arnoldi{};
  bool verify_mirror = false;  // antigap: confirm 2 eta from the fastest decay rate
};

/// Gap of the full product-basis Liouvillian. dense: complete spectrum,
/// PT detection and the antigap identity. antigap: eta = N gamma / 2 from
/// the local-only mirror, gap from L + 2 eta (requires Gamma = 0).
GapPoint liouvillian_gap(const ModelParams& params, const GapOptions& opts = {});

struct GapMinimum {
  int N = 0;
  double Jy = 0.0;
  double gap = 0.0;
  int evaluations = 0;
  std::vector<GapPoint> scan;  // coarse grid
};

/// Minimum over Jy in [lo, hi] of the gap: coarse scan of `coarse` points,
/// then Brent refinement in the bracket around the smallest sample.
GapMinimum minimize_gap_over_Jy(const ModelParams& params, double lo, double hi, int coarse,
                                const GapOptions& opts = {}, double xtol = 1e-3);

struct GapSanity {
  bool closing = false;       // smallest gap at Jy <= 0 shrinks by more than half between the extreme sizes
  double min_gap_small_N = 0.0;
  double min_gap_large_N = 0.0;
  int N_small = 0;
  int N_large = 0;
};

/// Checks that no gap closing develops with N for Jy <= 0. Needs converged
/// points at Jy <= 0 for at least two sizes (DomainError otherwise).
GapSanity gap_sanity(const std::vector<GapPoint>& points);

// ---- susceptibility scans -------------------------------------------------------------

struct ChiPeak {
  int N = 0;
  double Jy = 0.0;
  double chi_max = 0.0;
  int evaluations = 0;
  std::vector<std::pair<double, double>> scan;  // (Jy, chi_av) coarse grid
};

/// Maximum over Jy in [lo, hi] of chi_av: coarse scan then Brent refinement.
ChiPeak maximize_chi_over_Jy(const ModelParams& params, double lo, double hi, int coarse, int n_theta = 64,
                             double xtol = 1e-3);

// ---- mean-field scans -----------------------------------------------------------------

struct MfRow {
  double value = 0.0;
  MfBranch branch;
};

/// Stable mean-field branch along a sweep of one parameter (N = kInfiniteN
/// unless params.N is set to a finite size).
std::vector<MfRow> mf_sweep(const ModelParams& params, const SweepSpec& spec);

/// First grid value at which the stable branch is ferromagnetic, if any.
std::optional<double> mf_bifurcation(const std::vector<MfRow>& rows);

// ---- small utilities --------------------------------------------------------------

/// n uniformly spaced values, endpoints included.
std::vector<double> linspace(double lo, double hi, int n);

/// Current UTC time as ISO-8601.
std::string utc_timestamp();

}  // namespace pixyz
