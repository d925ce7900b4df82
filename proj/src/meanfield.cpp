#include "pixyz/meanfield.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>

namespace pixyz {

namespace {

using Vec3 = std::array<double, 3>;

double inf_norm(const MeanFieldState& f) { return std::max({std::abs(f.sx), std::abs(f.sy), std::abs(f.sz)}); }

MeanFieldState from(const Vec3& v) { return {v[0], v[1], v[2]}; }

Eigen::Matrix3d as_matrix(const std::array<double, 9>& j) {
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = j[3 * r + c];
  return m;
}

// Newton iteration on mf_rhs; returns true when ||rhs|| < tol.
bool newton_polish(MeanFieldState& s, const ModelParams& p, double tol) {
  for (int it = 0; it < 200; ++it) {
    const MeanFieldState f = mf_rhs(s, p);
    if (inf_norm(f) < tol) return true;
    const Eigen::FullPivLU<Eigen::Matrix3d> lu(as_matrix(mf_jacobian(s, p)));
    if (!lu.isInvertible()) return false;
    const Eigen::Vector3d d = lu.solve(Eigen::Vector3d(-f.sx, -f.sy, -f.sz));
    if (!d.allFinite()) return false;
    s.sx += d[0];
    s.sy += d[1];
    s.sz += d[2];
  }
  return inf_norm(mf_rhs(s, p)) < tol;
}

double distance(const MeanFieldState& a, const MeanFieldState& b) {
  return inf_norm({a.sx - b.sx, a.sy - b.sy, a.sz - b.sz});
}

}  // namespace

double MeanFieldState::length() const noexcept { return std::sqrt(sx * sx + sy * sy + sz * sz); }

const char* to_string(MfPhase phase) noexcept {
  return phase == MfPhase::ferromagnetic ? "ferromagnetic" : "paramagnetic";
}

double gamma_tilde(const ModelParams& p) noexcept {
  if (p.N == kInfiniteN) return p.gamma;
  return p.gamma + p.Gamma / static_cast<double>(p.N - 1);
}

MeanFieldState mf_rhs(const MeanFieldState& s, const ModelParams& p) noexcept {
  const double gt = gamma_tilde(p);
  return {2.0 * (p.Jy - p.Jz) * s.sy * s.sz - 0.5 * gt * s.sx + 0.5 * p.Gamma * s.sx * s.sz,
          2.0 * (p.Jz - p.Jx) * s.sx * s.sz - 0.5 * gt * s.sy + 0.5 * p.Gamma * s.sy * s.sz,
          2.0 * (p.Jx - p.Jy) * s.sx * s.sy - gt * (s.sz + 1.0) - 0.5 * p.Gamma * (s.sx * s.sx + s.sy * s.sy)};
}

std::array<double, 9> mf_jacobian(const MeanFieldState& s, const ModelParams& p) noexcept {
  const double gt = gamma_tilde(p);
  const double a = 2.0 * (p.Jy - p.Jz);
  const double b = 2.0 * (p.Jz - p.Jx);
  const double c = 2.0 * (p.Jx - p.Jy);
  const double G = 0.5 * p.Gamma;
  return {-0.5 * gt + G * s.sz, a * s.sz, a * s.sy + G * s.sx,
          b * s.sz, -0.5 * gt + G * s.sz, b * s.sx + G * s.sy,
          c * s.sy - 2.0 * G * s.sx, c * s.sx - 2.0 * G * s.sy, -gt};
}

std::array<double, 9> mf_jacobian_fd(const MeanFieldState& s, const ModelParams& p, double h) noexcept {
  std::array<double, 9> jac{};
  for (int c = 0; c < 3; ++c) {
    Vec3 plus{s.sx, s.sy, s.sz};
    Vec3 minus = plus;
    plus[c] += h;
    minus[c] -= h;
    const MeanFieldState fp = mf_rhs(from(plus), p);
    const MeanFieldState fm = mf_rhs(from(minus), p);
    jac[0 * 3 + c] = (fp.sx - fm.sx) / (2.0 * h);
    jac[1 * 3 + c] = (fp.sy - fm.sy) / (2.0 * h);
    jac[2 * 3 + c] = (fp.sz - fm.sz) / (2.0 * h);
  }
  return jac;
}

bool mf_is_linearly_stable(const MeanFieldState& s, const ModelParams& p, double slack) {
  const Eigen::EigenSolver<Eigen::Matrix3d> es(as_matrix(mf_jacobian_fd(s, p)), false);
  for (int i = 0; i < 3; ++i) {
    if (es.eigenvalues()[i].real() > slack) return false;
  }
  return true;
}

MeanFieldState mf_steady_state_numeric(const ModelParams& p, const MeanFieldState& init, const MfSolveOptions& opts) {
  if (!(opts.tol > 0.0)) throw DomainError("mf_steady_state_numeric: tol must be positive");
  require_valid(p);
  namespace ode = boost::numeric::odeint;

  const double gt = gamma_tilde(p);
  const double rate = std::max(gt, 1e-12);
  const double chunk = opts.chunk_time / rate;
  auto system = [&p](const Vec3& x, Vec3& dxdt, double) {
    const MeanFieldState f = mf_rhs(from(x), p);
    dxdt = {f.sx, f.sy, f.sz};
  };
  auto stepper = ode::make_controlled(1e-12, 1e-12, ode::runge_kutta_dopri5<Vec3>());

  Vec3 x{init.sx, init.sy, init.sz};
  double t = 0.0;
  for (int k = 0; k < opts.max_chunks; ++k) {
    ode::integrate_adaptive(stepper, system, x, t, t + chunk, chunk / 100.0);
    t += chunk;
    const MeanFieldState s = from(x);
    if (!std::isfinite(s.sx) || !std::isfinite(s.sy) || !std::isfinite(s.sz)) {
      throw MfConvergenceError("mean-field integration diverged", s);
    }
    if (inf_norm(mf_rhs(s, p)) < opts.tol) return s;
    MeanFieldState polished = s;
    if (newton_polish(polished, p, opts.tol) && distance(polished, s) < 1e-2 &&
        mf_is_linearly_stable(polished, p)) {
      return polished;
    }
  }
  throw MfConvergenceError("mean-field steady state not reached within the step budget", from(x));
}

bool mf_is_ferromagnetic(const ModelParams& p) {
  if (p.Gamma == 0.0) return -p.gamma * p.gamma / 16.0 > (p.Jx - p.Jz) * (p.Jy - p.Jz);
  const MeanFieldState s = mf_steady_state_numeric(p, kFerroSeed);
  return s.sx * s.sx + s.sy * s.sy > 1e-8;
}

std::vector<MfBranch> mf_steady_state_local_closed_form(const ModelParams& p) {
  if (p.Gamma != 0.0) throw DomainError("closed-form mean-field solution requires Gamma = 0");
  std::vector<MfBranch> out;
  out.push_back({MfPhase::paramagnetic, {0.0, 0.0, -1.0}, 0.0});
  if (!mf_is_ferromagnetic(p)) return out;

  const double arg = (p.Jy - p.Jz) * (p.Jz - p.Jx);
  if (!(arg > 0.0)) throw SolverError("closed-form mean-field: negative radicand inside the ferromagnetic region");
  const double mz = -(p.gamma / 4.0) / std::sqrt(arg);
  const double sxx = 2.0 * mz * (mz + 1.0) * (p.Jy - p.Jz) / (p.Jx - p.Jy);
  if (!(sxx >= 0.0) || !std::isfinite(sxx)) {
    throw SolverError("closed-form mean-field: invalid structure factor inside the ferromagnetic region");
  }
  MeanFieldState fm;
  fm.sz = mz;
  fm.sx = std::sqrt(sxx);
  // from d<sigma_x>/dt = 0
  fm.sy = p.gamma * fm.sx / (4.0 * (p.Jy - p.Jz) * mz);
  out.push_back({MfPhase::ferromagnetic, fm, mf_entropy_per_spin(fm)});
  return out;
}

std::vector<std::pair<double, double>> mf_phase_boundary(const std::vector<double>& Jx_grid, double Jz, double gamma) {
  std::vector<std::pair<double, double>> out;
  out.reserve(Jx_grid.size());
  for (double jx : Jx_grid) {
    if (jx == Jz) throw DomainError("mf_phase_boundary: Jx = Jz makes the boundary singular");
    out.emplace_back(jx, Jz - gamma * gamma / (16.0 * (jx - Jz)));
  }
  return out;
}

double mf_entropy_per_spin(const MeanFieldState& s) {
  double j = s.length();
  if (!(j <= 1.0 + 1e-9)) throw DomainError("Bloch vector outside the unit ball");
  j = std::min(j, 1.0);
  double h = 0.0;
  for (double q : {0.5 * (1.0 + j), 0.5 * (1.0 - j)}) {
    if (q > 0.0) h -= q * std::log(q);
  }
  return h;
}

MfBranch mf_stable_branch(const ModelParams& p, const MfSolveOptions& opts) {
  if (p.Gamma == 0.0) return mf_steady_state_local_closed_form(p).back();
  const MeanFieldState s = mf_steady_state_numeric(p, kFerroSeed, opts);
  MfBranch b;
  if (s.sx * s.sx + s.sy * s.sy > 1e-8) {
    b.kind = MfPhase::ferromagnetic;
    b.state = s;
    if (b.state.sx < 0.0) {
      b.state.sx = -b.state.sx;
      b.state.sy = -b.state.sy;
    }
  }
  b.entropy_per_spin = mf_entropy_per_spin(b.state);
  return b;
}

}  // namespace pixyz
