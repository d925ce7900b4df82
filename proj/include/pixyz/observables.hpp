#pragma once

// Steady-state observables in the permutation-symmetric representation.
// All moments are of the Pauli-normalized collective operators S^a.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "pixyz/dicke.hpp"
#include "pixyz/liouvillian.hpp"
#include "pixyz/model.hpp"

namespace pixyz {

enum class Axis { x, y };

struct ObservableReport {
  double Sxx = 0.0;
  double Syy = 0.0;
  double Mz = 0.0;
  double entropy_per_spin = 0.0;
  double purity = 0.0;
  double Bc_x = 0.0;
  double Bc_y = 0.0;
  std::optional<double> chi_av;
};

/// [<(S^a)^2> - N] / (N (N - 1))
double spin_structure_factor(const DickeBlockMatrix& rho, Axis axis);
/// <S^z> / N
double z_magnetization(const DickeBlockMatrix& rho);
/// von Neumann entropy (natural log) divided by N.
double entropy_per_spin(const DickeBlockMatrix& rho);
/// <(S^a)^2>^2 / <(S^a)^4>; throws DomainError when the fourth moment vanishes.
double bimodality(const DickeBlockMatrix& rho, Axis axis);

/// Everything except chi_av.
ObservableReport static_observables(const DickeBlockMatrix& rho);

enum class ChiMethod {
  linear_response,  // h -> 0 limit: two odd-sector solves against L0
  perturbed,        // one steady state per probe direction at finite h
};

struct SusceptibilityOptions {
  double h = 0.0;     // probe amplitude; 0 selects 1e-3 (gamma + Gamma)
  int n_theta = 64;   // uniform periodic grid, >= 8
  ChiMethod method = ChiMethod::linear_response;
  bool check_half_step = true;  // perturbed only: repeat at h/2
  double linearity_tol = 0.05;
};

struct SusceptibilityResult {
  double chi_av = 0.0;
  std::vector<double> integrand;       // |M(theta)| / h on the grid
  std::array<double, 4> tensor{};      // linear response: dM_a/dh_b, row-major (a, b) in {x, y}
  std::optional<double> chi_av_half;   // perturbed route at h/2
  bool linear_regime = true;
  std::string warning;
};

/// Angular-averaged in-plane susceptibility of the steady state to the probe
/// h (cos theta S^x + sin theta S^y).
SusceptibilityResult averaged_susceptibility(const ModelParams& params, const SusceptibilityOptions& opts = {});

/// Linear-response variant reusing an already solved steady state.
SusceptibilityResult averaged_susceptibility(const SuperOperator& L0, const DickeBlockMatrix& rho0, int n_theta = 64);

/// Steady state plus all observables (chi_av only when with_chi).
struct SteadyObservables {
  DickeBlockMatrix rho;
  ObservableReport report;
  double residual = 0.0;
};
SteadyObservables solve_observables(const ModelParams& params, bool with_chi, int n_theta = 64);

}  // namespace pixyz
