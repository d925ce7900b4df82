#include "pixyz/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <string>

#include "pixyz/kernels.hpp"

#define lapack_complex_double std::complex<double>
#include <lapacke.h>

namespace pixyz {

namespace {


bool by_abs_real(const cplx& a, const cplx& b) {
  const double ra = std::abs(a.real()), rb = std::abs(b.real());
  if (ra != rb) return ra < rb;
  return a.imag() < b.imag();
}

}  // namespace

// ---------------------------------------------------------------------------
// Dense spectra and the mirror axis

std::vector<cplx> dense_eigenvalues(Eigen::MatrixXcd a) {
  if (a.rows() != a.cols()) throw DomainError("dense_eigenvalues: square matrix required");
  const auto n = static_cast<lapack_int>(a.rows());
  std::vector<cplx> w(static_cast<std::size_t>(n));
  if (n == 0) return w;
  const lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', n, reinterpret_cast<lapack_complex_double*>(a.data()),
                                        n, reinterpret_cast<lapack_complex_double*>(w.data()), nullptr, 1, nullptr, 1);
  if (info != 0) throw SolverError("zgeev failed with info " + std::to_string(info));
  return w;
}

std::optional<double> SpectrumReport::antigap() const {
  if (!antigap_pair) return std::nullopt;
  return antigap_pair->second.real() - antigap_pair->first.real();
}

std::optional<double> detect_pt(std::span<const cplx> eigs, double tol) {
  if (eigs.empty()) return std::nullopt;
  double lo = 0.0, scale = 1.0;
  for (const cplx& z : eigs) {
    lo = std::min(lo, z.real());
    scale = std::max(scale, std::abs(z));
  }
  const double eta = -lo / 2.0;
  if (!(eta > 0.0)) return std::nullopt;
  const double atol = tol * scale;

  std::vector<cplx> a(eigs.begin(), eigs.end());
  std::vector<cplx> m(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) m[i] = {-2.0 * eta - a[i].real(), a[i].imag()};
  auto by_re = [](const cplx& x, const cplx& y) { return x.real() < y.real() || (x.real() == y.real() && x.imag() < y.imag()); };
  std::sort(a.begin(), a.end(), by_re);
  std::sort(m.begin(), m.end(), by_re);

  // Two pointers over real parts; inside the tolerance window pick the
  // closest unmatched partner so near-degenerate clusters pair up correctly.
  std::vector<char> used(a.size(), 0);
  std::size_t start = 0;
  for (const cplx& z : m) {
    while (start < a.size() && (used[start] || a[start].real() < z.real() - atol)) ++start;
    std::size_t best = a.size();
    double best_d = atol;
    for (std::size_t i = start; i < a.size() && a[i].real() <= z.real() + atol; ++i) {
      if (used[i]) continue;
      const double d = std::abs(a[i] - z);
      if (d <= best_d) {
        best_d = d;
        best = i;
      }
    }
    if (best == a.size()) return std::nullopt;
    used[best] = 1;
  }
  return eta;
}

SpectrumReport make_report(std::vector<cplx> eigs, double mirror_tol) {
  SpectrumReport r;
  std::sort(eigs.begin(), eigs.end(), by_abs_real);
  r.eigenvalues = std::move(eigs);
  if (r.eigenvalues.size() > 1) r.gap = std::abs(r.eigenvalues[1].real());
  r.eta = detect_pt(r.eigenvalues, mirror_tol);
  r.pt_symmetric = r.eta.has_value();
  if (r.pt_symmetric && r.eigenvalues.size() > 1) {
    const std::size_t M = r.eigenvalues.size() - 1;
    r.antigap_pair = std::make_pair(r.eigenvalues[M], r.eigenvalues[M - 1]);
  }
  return r;
}

SpectrumReport full_spectrum(const SuperOperator& L, Eigen::Index dense_limit) {
  if (L.dim() > dense_limit)
    throw ResourceLimitError("dense spectrum: dimension " + std::to_string(L.dim()) + " exceeds " + std::to_string(dense_limit));
  return make_report(dense_eigenvalues(Eigen::MatrixXcd(L.matrix)));
}

double direct_gap(const SuperOperator& L, Eigen::Index dense_limit) { return full_spectrum(L, dense_limit).gap; }

// ---------------------------------------------------------------------------
// Operators

LinearOperator as_operator(const SuperOperator& L) {
  if (!L.matrix.isCompressed()) throw DomainError("as_operator: matrix must be compressed");
  const SparseMatrixC* m = &L.matrix;
  LinearOperator op;
  op.dim = L.dim();
  op.apply = [m](const cplx* x, cplx* y) {
    const kernels::CsrView v{static_cast<std::size_t>(m->rows()), m->outerIndexPtr(), m->innerIndexPtr(), m->valuePtr()};
    const auto n = static_cast<std::size_t>(m->rows());
    kernels::spmv(v, {x, n}, {y, n});
  };
  return op;
}

LinearOperator shifted(LinearOperator op, cplx shift) {
  LinearOperator s;
  s.dim = op.dim;
  s.apply = [inner = std::move(op.apply), shift, n = static_cast<std::size_t>(op.dim)](const cplx* x, cplx* y) {
    inner(x, y);
    kernels::axpy(shift, {x, n}, {y, n});
  };
  return s;
}

namespace {

// L rho = K rho + rho K^dagger + jump terms, with the non-Hermitian part
// K = -i H - (gamma/2) sum_i n_i - (c/2) S+ S-,  c = Gamma / (N - 1).
struct MatrixFreeFull {
  int N = 0;
  std::size_t d = 0;
  double gamma = 0.0;
  double c = 0.0;
  SparseMatrixC K;
  SparseMatrixR Sm;  // S^-

  void apply(const cplx* x, cplx* y) const {
    const kernels::CsrView kv{d, K.outerIndexPtr(), K.innerIndexPtr(), K.valuePtr()};
    for (std::size_t b = 0; b < d; ++b) {
      cplx* yb = y + b * d;
      kernels::spmv(kv, {x + b * d, d}, {yb, d});
      // (rho K^dagger)(:, b) = sum_c rho(:, c) conj(K(b, c))
      for (SparseMatrixC::InnerIterator it(K, static_cast<Eigen::Index>(b)); it; ++it)
        kernels::axpy(std::conj(it.value()), {x + static_cast<std::size_t>(it.col()) * d, d}, {yb, d});
    }
    if (gamma != 0.0) {
      // sigma^-_i rho sigma^+_i: y(a, b) += gamma x(a | bit, b | bit) for a, b with the bit clear
      for (int i = 0; i < N; ++i) {
        const std::size_t bit = std::size_t{1} << i;
        for (std::size_t b = 0; b < d; ++b) {
          if (b & bit) continue;
          const cplx* xb = x + (b | bit) * d;
          cplx* yb = y + b * d;
          for (std::size_t a0 = 0; a0 < d; a0 += 2 * bit)
            kernels::axpy_real(gamma, {xb + a0 + bit, bit}, {yb + a0, bit});
        }
      }
    }
    if (c != 0.0) {
      // S- rho S+ column by column: t = (rho S+)(:, b) = sum_{c: S-(b, c) != 0} rho(:, c)
      std::vector<cplx> t(d);
      const kernels::CsrRealView sv{d, Sm.outerIndexPtr(), Sm.innerIndexPtr(), Sm.valuePtr()};
      std::vector<cplx> u(d);
      for (std::size_t b = 0; b < d; ++b) {
        std::fill(t.begin(), t.end(), cplx(0.0));
        for (SparseMatrixR::InnerIterator it(Sm, static_cast<Eigen::Index>(b)); it; ++it)
          kernels::axpy_real(it.value(), {x + static_cast<std::size_t>(it.col()) * d, d}, t);
        kernels::spmv_real(sv, t, u);
        kernels::axpy_real(c, u, {y + b * d, d});
      }
    }
  }
};

}  // namespace

LinearOperator full_liouvillian_operator(const ModelParams& p, const Probe& probe) {
  require_valid(p);
  if (p.N > 12) throw ResourceLimitError("matrix-free full Liouvillian: N <= 12 required");
  auto mf = std::make_shared<MatrixFreeFull>();
  mf->N = p.N;
  mf->d = std::size_t{1} << p.N;
  mf->gamma = p.gamma;
  mf->c = p.Gamma / (p.N - 1);
  const SparseMatrixC h = build_hamiltonian_full(p, probe);
  const SparseMatrixC sz = product_basis_operator(p.N, Collective::Sz);
  const SparseMatrixC sm = product_basis_operator(p.N, Collective::Sminus);
  const SparseMatrixC sp = product_basis_operator(p.N, Collective::Splus);
  // sum_i n_i = (Sz + N) / 2
  SparseMatrixC ident(static_cast<Eigen::Index>(mf->d), static_cast<Eigen::Index>(mf->d));
  ident.setIdentity();
  const SparseMatrixC ntot = 0.5 * (sz + static_cast<double>(p.N) * ident);
  SparseMatrixC K = cplx(0.0, -1.0) * h - (0.5 * p.gamma) * ntot;
  if (mf->c != 0.0) K -= (0.5 * mf->c) * SparseMatrixC(sp * sm);
  K.prune(cplx(0.0), 1e-15);
  K.makeCompressed();
  mf->K = std::move(K);
  SparseMatrixR smr = sm.real();
  smr.makeCompressed();
  mf->Sm = std::move(smr);

  LinearOperator op;
  op.dim = static_cast<Eigen::Index>(mf->d * mf->d);
  op.apply = [mf](const cplx* x, cplx* y) { mf->apply(x, y); };
  return op;
}

// ---------------------------------------------------------------------------
// Krylov-Schur

namespace {

// Givens rotation (LAPACK zlartg): [cs sn; -conj(sn) cs] [f; g] = [r; 0].
void lartg(cplx f, cplx g, double& cs, cplx& sn) {
  if (g == cplx(0.0)) {
    cs = 1.0;
    sn = 0.0;
    return;
  }
  if (f == cplx(0.0)) {
    cs = 0.0;
    sn = std::conj(g) / std::abs(g);
    return;
  }
  const double f1 = std::abs(f), g1 = std::abs(g);
  const double d = std::hypot(f1, g1);
  cs = f1 / d;
  sn = (f / f1) * std::conj(g) / d;
}

void rot(cplx& x, cplx& y, double c, cplx s) {
  const cplx t = c * x + s * y;
  y = c * y - std::conj(s) * x;
  x = t;
}

// Swaps diagonal entries k and k+1 of the upper triangular T (ztrexc step).
void swap_adjacent(Eigen::MatrixXcd& T, Eigen::MatrixXcd& Q, Eigen::Index k) {
  const Eigen::Index n = T.rows();
  const cplx t11 = T(k, k), t22 = T(k + 1, k + 1);
  double cs;
  cplx sn;
  lartg(T(k, k + 1), t22 - t11, cs, sn);
  for (Eigen::Index j = k + 2; j < n; ++j) rot(T(k, j), T(k + 1, j), cs, sn);
  for (Eigen::Index i = 0; i < k; ++i) rot(T(i, k), T(i, k + 1), cs, std::conj(sn));
  T(k, k) = t22;
  T(k + 1, k + 1) = t11;
  for (Eigen::Index i = 0; i < Q.rows(); ++i) rot(Q(i, k), Q(i, k + 1), cs, std::conj(sn));
}

// Orders the Schur form by descending real part of the diagonal.
void sort_schur(Eigen::MatrixXcd& T, Eigen::MatrixXcd& Q) {
  const Eigen::Index n = T.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index best = i;
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (T(j, j).real() > T(best, best).real()) best = j;
    for (Eigen::Index j = best; j > i; --j) swap_adjacent(T, Q, j - 1);
  }
}

ArnoldiResult dense_largest_real(const LinearOperator& op, int nev) {
  const Eigen::Index n = op.dim;
  Eigen::MatrixXcd A(n, n);
  Eigen::VectorXcd e = Eigen::VectorXcd::Zero(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    e[j] = 1.0;
    op.apply(e.data(), A.col(j).data());
    e[j] = 0.0;
  }
  std::vector<cplx> v = dense_eigenvalues(std::move(A));
  std::sort(v.begin(), v.end(), [](const cplx& a, const cplx& b) { return a.real() > b.real(); });
  ArnoldiResult r;
  const int k = static_cast<int>(std::min<Eigen::Index>(nev, n));
  r.values.assign(v.begin(), v.begin() + k);
  r.residuals.assign(static_cast<std::size_t>(k), 0.0);
  r.converged = k;
  r.matvecs = n;
  return r;
}

}  // namespace

ArnoldiResult eigs_largest_real(const LinearOperator& op, const ArnoldiOptions& o) {
  if (o.nev < 1) throw DomainError("eigs_largest_real: nev >= 1 required");
  if (o.ncv < o.nev + 2) throw DomainError("eigs_largest_real: ncv >= nev + 2 required");
  const Eigen::Index n = op.dim;
  if (n <= 2 * o.ncv) return dense_largest_real(op, o.nev);

  const int m = o.ncv;
  const int nev = o.nev;
  Eigen::MatrixXcd V(n, m + 1);
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(m + 1, m);
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> gauss;
  auto random_unit = [&](Eigen::Index col) {
    for (Eigen::Index i = 0; i < n; ++i) V(i, col) = cplx(gauss(rng), gauss(rng));
    if (col > 0) {
      for (int pass = 0; pass < 2; ++pass) {
        const Eigen::VectorXcd h = V.leftCols(col).adjoint() * V.col(col);
        V.col(col) -= V.leftCols(col) * h;
      }
    }
    V.col(col).normalize();
  };
  random_unit(0);

  ArnoldiResult res;
  Eigen::VectorXcd w(n);
  int k = 0;
  const double eps = std::numeric_limits<double>::epsilon();
  for (int restart = 0;; ++restart) {
    for (int j = k; j < m; ++j) {
      op.apply(V.col(j).data(), w.data());
      ++res.matvecs;
      const double wnorm = w.norm();
      Eigen::VectorXcd h = V.leftCols(j + 1).adjoint() * w;
      w -= V.leftCols(j + 1) * h;
      const Eigen::VectorXcd h2 = V.leftCols(j + 1).adjoint() * w;
      w -= V.leftCols(j + 1) * h2;
      h += h2;
      H.block(0, j, j + 1, 1) = h;
      const double beta = w.norm();
      if (beta <= 1e3 * eps * std::max(wnorm, 1e-300)) {
        H(j + 1, j) = 0.0;
        random_unit(j + 1);
      } else {
        H(j + 1, j) = beta;
        V.col(j + 1) = w / beta;
      }
    }

    Eigen::ComplexSchur<Eigen::MatrixXcd> schur(H.topRows(m));
    if (schur.info() != Eigen::Success) throw SolverError("Krylov-Schur: Schur decomposition failed");
    Eigen::MatrixXcd T = schur.matrixT().triangularView<Eigen::Upper>();
    Eigen::MatrixXcd Q = schur.matrixU();
    sort_schur(T, Q);
    const Eigen::RowVectorXcd b = H.row(m) * Q;

    // Ritz residuals |b y| for eigenvectors y of the leading triangle.
    double tnorm = 0.0;
    for (int i = 0; i < m; ++i) tnorm = std::max(tnorm, std::abs(T(i, i)));
    std::vector<double> resid(static_cast<std::size_t>(nev));
    int nconv = 0;
    for (int i = 0; i < nev; ++i) {
      Eigen::VectorXcd y = Eigen::VectorXcd::Zero(i + 1);
      y[i] = 1.0;
      for (int l = i - 1; l >= 0; --l) {
        cplx s = 0.0;
        for (int q = l + 1; q <= i; ++q) s += T(l, q) * y[q];
        cplx den = T(l, l) - T(i, i);
        if (std::abs(den) < eps * tnorm) den = eps * tnorm;
        y[l] = -s / den;
      }
      y.normalize();
      resid[static_cast<std::size_t>(i)] = std::abs((b.head(i + 1) * y).value());
      if (resid[static_cast<std::size_t>(i)] <= o.tol * std::max(std::abs(T(i, i)), 1e-3 * tnorm)) ++nconv;
    }

    const bool done = nconv == nev || restart >= o.max_restarts;
    if (done) {
      res.values.resize(static_cast<std::size_t>(nev));
      for (int i = 0; i < nev; ++i) res.values[static_cast<std::size_t>(i)] = T(i, i);
      res.residuals = resid;
      res.converged = nconv;
      res.restarts = restart;
      return res;
    }

    // Truncate to the leading p Schur vectors; the residual direction
    // V(:, m) becomes V(:, p).
    const int p = std::max(nev + 1, (m + nev) / 2);
    constexpr Eigen::Index kRows = 4096;
    for (Eigen::Index r0 = 0; r0 < n; r0 += kRows) {
      const Eigen::Index rows = std::min(kRows, n - r0);
      const Eigen::MatrixXcd blk = V.block(r0, 0, rows, m) * Q.leftCols(p);
      V.block(r0, 0, rows, p) = blk;
    }
    V.col(p) = V.col(m);
    H.setZero();
    H.topLeftCorner(p, p) = T.topLeftCorner(p, p);
    H.block(p, 0, 1, p) = b.head(p);
    k = p;
  }
}

// ---------------------------------------------------------------------------
// Gap from the shifted operator

AntigapResult gap_via_antigap(const LinearOperator& L, double eta, const ArnoldiOptions& opts) {
  if (!(eta > 0.0)) throw DomainError("gap_via_antigap: eta > 0 required");
  if (opts.nev < 2) throw DomainError("gap_via_antigap: k >= 2 required");
  AntigapResult r;
  r.arnoldi = eigs_largest_real(shifted(L, 2.0 * eta), opts);
  if (r.arnoldi.converged < 2)
    throw SolverError("antigap: Krylov-Schur converged " + std::to_string(r.arnoldi.converged) + " of " +
                      std::to_string(opts.nev) + " eigenvalues");
  r.top = r.arnoldi.values[0];
  if (std::abs(r.top - 2.0 * eta) > kMirrorTol * std::max(1.0, 2.0 * eta))
    throw SolverError("antigap: mirror eigenvalue 2 eta not found (leading eigenvalue " + std::to_string(r.top.real()) +
                      ")");
  r.second = r.arnoldi.values[1];
  r.gap = std::abs(r.second.real() - 2.0 * eta);
  return r;
}

double max_damping(const LinearOperator& L, const ArnoldiOptions& opts) {
  LinearOperator neg;
  neg.dim = L.dim;
  neg.apply = [&L, n = static_cast<std::size_t>(L.dim)](const cplx* x, cplx* y) {
    L.apply(x, y);
    kernels::scal(-1.0, {y, n});
  };
  const ArnoldiResult r = eigs_largest_real(neg, opts);
  if (r.converged < 1) throw SolverError("max_damping: Krylov-Schur did not converge");
  return r.values[0].real();
}

double gap_via_antigap(const SuperOperator& L, double eta, int k) {
  ArnoldiOptions o;
  o.nev = k;
  return gap_via_antigap(as_operator(L), eta, o).gap;
}

}  // namespace pixyz
