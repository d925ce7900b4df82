#pragma once

// Gutzwiller (single-site product state) mean-field theory of the model:
// equations of motion for the Bloch vector, their steady states (numeric
// and, for local dissipation only, closed form), and the instability
// criterion of the paramagnetic state.

#include <array>
#include <limits>
#include <vector>

#include "pixyz/errors.hpp"
#include "pixyz/model.hpp"

namespace pixyz {

/// Spin count standing for the thermodynamic limit; gamma_tilde -> gamma.
inline constexpr int kInfiniteN = std::numeric_limits<int>::max();

/// Bloch vector (<sigma_x>, <sigma_y>, <sigma_z>) of the single-site state.
struct MeanFieldState {
  double sx = 0.0;
  double sy = 0.0;
  double sz = -1.0;

  double length() const noexcept;
  friend bool operator==(const MeanFieldState&, const MeanFieldState&) = default;
};

enum class MfPhase { paramagnetic, ferromagnetic };
const char* to_string(MfPhase phase) noexcept;

struct MfBranch {
  MfPhase kind = MfPhase::paramagnetic;
  MeanFieldState state;
  double entropy_per_spin = 0.0;
};

/// gamma + Gamma/(N-1); gamma when N == kInfiniteN.
double gamma_tilde(const ModelParams& params) noexcept;

/// Time derivative of the Bloch vector.
MeanFieldState mf_rhs(const MeanFieldState& s, const ModelParams& params) noexcept;

/// Analytic Jacobian d(rhs)/d(state), row-major.
std::array<double, 9> mf_jacobian(const MeanFieldState& s, const ModelParams& params) noexcept;

/// Central-difference Jacobian (independent of mf_jacobian).
std::array<double, 9> mf_jacobian_fd(const MeanFieldState& s, const ModelParams& params, double step = 1e-6) noexcept;

/// True when every eigenvalue of the finite-difference Jacobian has real
/// part <= slack.
bool mf_is_linearly_stable(const MeanFieldState& s, const ModelParams& params, double slack = 1e-7);

struct MfSolveOptions {
  double tol = 1e-10;           // on ||rhs||_inf
  double chunk_time = 50.0;     // integration chunk, in units of 1/gamma_tilde
  int max_chunks = 400;
};

/// Raised when the steady-state search runs out of budget.
class MfConvergenceError : public SolverError {
 public:
  MfConvergenceError(const std::string& what, MeanFieldState last) : SolverError(what), last_state(last) {}
  MeanFieldState last_state;
};

/// Seed used to reach the symmetry-broken branch.
inline constexpr MeanFieldState kFerroSeed{0.1, 0.1, -0.9};

/// Long-time adaptive integration from init followed by a Newton polish.
/// The result satisfies ||mf_rhs||_inf < opts.tol.
MeanFieldState mf_steady_state_numeric(const ModelParams& params, const MeanFieldState& init,
                                       const MfSolveOptions& opts = {});

/// Closed-form steady states for Gamma = 0: always the paramagnetic point
/// (0, 0, -1), plus the ferromagnetic point (sx >= 0 representative) when
/// mf_is_ferromagnetic holds. Throws DomainError if Gamma != 0.
std::vector<MfBranch> mf_steady_state_local_closed_form(const ModelParams& params);

/// Strict instability criterion -gamma^2/16 > (Jx - Jz)(Jy - Jz) for Gamma = 0.
/// For Gamma > 0 the numeric steady state from kFerroSeed is classified.
bool mf_is_ferromagnetic(const ModelParams& params);

/// Jy at which the criterion becomes an equality, for each Jx.
/// Throws DomainError when Jx == Jz.
std::vector<std::pair<double, double>> mf_phase_boundary(const std::vector<double>& Jx_grid, double Jz, double gamma);

/// -sum_{+-} (1 +- J)/2 ln((1 +- J)/2), J = |Bloch vector|.
/// Throws DomainError if J > 1 + 1e-9.
double mf_entropy_per_spin(const MeanFieldState& s);

/// The branch the dynamics selects: the closed form (ferromagnetic when it
/// exists) for Gamma = 0, the seeded numeric solution otherwise.
MfBranch mf_stable_branch(const ModelParams& params, const MfSolveOptions& opts = {});

/// Mean-field structure factor S^xx = <sigma_x>^2 of a branch.
inline double mf_structure_factor_x(const MfBranch& b) noexcept { return b.state.sx * b.state.sx; }

}  // namespace pixyz
