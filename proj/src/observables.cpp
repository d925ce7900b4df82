#include "pixyz/observables.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "pixyz/errors.hpp"

namespace pixyz {

namespace {

struct Powers {
  DickeBlockMatrix s2;
  DickeBlockMatrix s4;
};

// (S^a)^2 and (S^a)^4 per (N, axis), built once.
const Powers& powers(int N, Axis axis) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, Powers> cache;
  const std::lock_guard lock(mu);
  auto [it, fresh] = cache.try_emplace({N, static_cast<int>(axis)});
  if (fresh) {
    const auto s = collective_operator(shared_layout(N), axis == Axis::x ? Collective::Sx : Collective::Sy);
    it->second.s2 = s * s;
    it->second.s4 = it->second.s2 * it->second.s2;
  }
  return it->second;
}

double moment(const DickeBlockMatrix& rho, const DickeBlockMatrix& op) { return expectation(rho, op).real(); }

}  // namespace

double spin_structure_factor(const DickeBlockMatrix& rho, Axis axis) {
  const int N = rho.layout().N;
  if (N < 2) throw DomainError("spin_structure_factor: N >= 2 required");
  const double m2 = moment(rho, powers(N, axis).s2);
  return (m2 - N) / (static_cast<double>(N) * (N - 1));
}

double z_magnetization(const DickeBlockMatrix& rho) {
  const int N = rho.layout().N;
  return expectation(rho, collective_operator(rho.layout_ptr(), Collective::Sz)).real() / N;
}

double entropy_per_spin(const DickeBlockMatrix& rho) { return von_neumann_entropy(rho) / rho.layout().N; }

double bimodality(const DickeBlockMatrix& rho, Axis axis) {
  const Powers& p = powers(rho.layout().N, axis);
  const double m2 = moment(rho, p.s2);
  const double m4 = moment(rho, p.s4);
  if (!(m4 > 1e-300)) throw DomainError("bimodality: degenerate distribution (vanishing fourth moment)");
  return m2 * m2 / m4;
}

ObservableReport static_observables(const DickeBlockMatrix& rho) {
  ObservableReport r;
  r.Sxx = spin_structure_factor(rho, Axis::x);
  r.Syy = spin_structure_factor(rho, Axis::y);
  r.Mz = z_magnetization(rho);
  r.entropy_per_spin = entropy_per_spin(rho);
  r.purity = purity(rho);
  r.Bc_x = bimodality(rho, Axis::x);
  r.Bc_y = bimodality(rho, Axis::y);
  return r;
}

// ---------------------------------------------------------------------------
// Susceptibility

namespace {

std::vector<double> theta_grid(int n) {
  std::vector<double> t(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) t[static_cast<std::size_t>(k)] = 2.0 * std::numbers::pi * k / n;
  return t;
}

// Trapezoid rule on a uniform periodic grid is the plain mean.
double periodic_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::pair<double, double> inplane_magnetization(const DickeBlockMatrix& rho) {
  const auto& l = rho.layout_ptr();
  const int N = rho.layout().N;
  return {expectation(rho, collective_operator(l, Collective::Sx)).real() / N,
          expectation(rho, collective_operator(l, Collective::Sy)).real() / N};
}

std::vector<double> perturbed_integrand(const ModelParams& p, double h, const std::vector<double>& thetas) {
  std::vector<double> out;
  out.reserve(thetas.size());
  for (double th : thetas) {
    const Probe probe{h * std::cos(th), h * std::sin(th)};
    const auto rho = steady_state_symmetric(build_symmetric_liouvillian(p, probe));
    const auto [mx, my] = inplane_magnetization(rho);
    out.push_back(std::hypot(mx, my) / h);
  }
  return out;
}

}  // namespace

SusceptibilityResult averaged_susceptibility(const SuperOperator& L0, const DickeBlockMatrix& rho0, int n_theta) {
  if (n_theta < 8) throw DomainError("averaged_susceptibility: n_theta >= 8 required");
  if (L0.basis != Basis::symmetric) throw DomainError("averaged_susceptibility: symmetric-basis Liouvillian required");
  if (L0.probe.active()) throw DomainError("averaged_susceptibility: unperturbed Liouvillian required");
  const int N = L0.params.N;
  const auto& l = rho0.layout_ptr();
  const DickeBlockMatrix sx = collective_operator(l, Collective::Sx);
  const DickeBlockMatrix sy = collective_operator(l, Collective::Sy);

  // L0 rho_b = i [S^b, rho0] gives the first-order response to h S^b.
  const HermitianSectorSolver odd(L0, 1);
  SusceptibilityResult r;
  const DickeBlockMatrix* probes[2] = {&sx, &sy};
  for (int b = 0; b < 2; ++b) {
    const DickeBlockMatrix rhs = cplx(0.0, 1.0) * commutator(*probes[b], rho0);
    const DickeBlockMatrix rho1 = unvectorize(odd.solve(vectorize(rhs)), N);
    r.tensor[static_cast<std::size_t>(0 + b)] = expectation(rho1, sx).real() / N;
    r.tensor[static_cast<std::size_t>(2 + b)] = expectation(rho1, sy).real() / N;
  }
  for (double th : theta_grid(n_theta)) {
    const double c = std::cos(th), s = std::sin(th);
    r.integrand.push_back(std::hypot(r.tensor[0] * c + r.tensor[1] * s, r.tensor[2] * c + r.tensor[3] * s));
  }
  r.chi_av = periodic_mean(r.integrand);
  return r;
}

SusceptibilityResult averaged_susceptibility(const ModelParams& p, const SusceptibilityOptions& o) {
  require_valid(p);
  if (o.n_theta < 8) throw DomainError("averaged_susceptibility: n_theta >= 8 required");
  const double h = o.h > 0.0 ? o.h : 1e-3 * (p.gamma + p.Gamma);
  if (o.method == ChiMethod::linear_response) {
    const SuperOperator L0 = build_symmetric_liouvillian(p);
    return averaged_susceptibility(L0, steady_state_symmetric(L0), o.n_theta);
  }
  const auto thetas = theta_grid(o.n_theta);
  SusceptibilityResult r;
  r.integrand = perturbed_integrand(p, h, thetas);
  r.chi_av = periodic_mean(r.integrand);
  if (o.check_half_step) {
    r.chi_av_half = periodic_mean(perturbed_integrand(p, 0.5 * h, thetas));
    const double rel = std::abs(*r.chi_av_half - r.chi_av) / std::max(std::abs(r.chi_av), 1e-300);
    if (rel > o.linearity_tol) {
      r.linear_regime = false;
      r.warning = "chi_av changes by " + std::to_string(100.0 * rel) + "% between h and h/2; outside linear response";
    }
  }
  return r;
}

SteadyObservables solve_observables(const ModelParams& p, bool with_chi, int n_theta) {
  require_valid(p);
  const SuperOperator L = build_symmetric_liouvillian(p);
  const SteadyStateResult ss = steady_state(L);
  SteadyObservables out{unvectorize(ss.vec, p.N), {}, ss.residual};
  out.report = static_observables(out.rho);
  if (with_chi) out.report.chi_av = averaged_susceptibility(L, out.rho, n_theta).chi_av;
  return out;
}

}  // namespace pixyz
