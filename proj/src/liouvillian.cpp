#include "pixyz/liouvillian.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "sparse_lu.hpp"

namespace pixyz {

namespace {

using Triplets = std::vector<Eigen::Triplet<cplx, int>>;
constexpr cplx kI(0.0, 1.0);

int popcount(std::uint64_t x) { return std::popcount(x); }

void check_n(const ModelParams& params) {
  require_valid(params);
}

// ---- symmetric-basis assembly helpers (row-major inside a block) ----------

// rho -> coef A rho
void add_block_left(Triplets& t, int off, int dim, const Eigen::MatrixXcd& A, cplx coef) {
  for (int rp = 0; rp < dim; ++rp)
    for (int r = 0; r < dim; ++r) {
      const cplx v = coef * A(rp, r);
      if (v == cplx(0.0)) continue;
      for (int c = 0; c < dim; ++c) t.emplace_back(off + rp * dim + c, off + r * dim + c, v);
    }
}

// rho -> coef rho B
void add_block_right(Triplets& t, int off, int dim, const Eigen::MatrixXcd& B, cplx coef) {
  for (int c = 0; c < dim; ++c)
    for (int cp = 0; cp < dim; ++cp) {
      const cplx v = coef * B(c, cp);
      if (v == cplx(0.0)) continue;
      for (int r = 0; r < dim; ++r) t.emplace_back(off + r * dim + cp, off + r * dim + c, v);
    }
}

// rho -> coef A rho B
void add_block_sandwich(Triplets& t, int off, int dim, const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B, cplx coef) {
  for (int rp = 0; rp < dim; ++rp)
    for (int r = 0; r < dim; ++r) {
      if (A(rp, r) == cplx(0.0)) continue;
      for (int c = 0; c < dim; ++c)
        for (int cp = 0; cp < dim; ++cp) {
          const cplx v = coef * A(rp, r) * B(c, cp);
          if (v != cplx(0.0)) t.emplace_back(off + rp * dim + cp, off + r * dim + c, v);
        }
    }
}

// Local-decay transfer (j, m, m') -> (j', m-1, m'-1) in the stored convention:
// rate gamma * (weight/2) * g(m) g(m').
struct Transfer {
  int dj;
  double weight;
  double (*g)(double j, double m);
};

double g_up(double j, double m) { return std::sqrt(std::max(0.0, (j - m + 1) * (j - m + 2) / ((2 * j + 1) * (2 * j + 2)))); }
double g_same(double j, double m) {
  return j > 0 ? std::sqrt(std::max(0.0, (j + m) * (j - m + 1) / (2 * j * (j + 1)))) : 0.0;
}
double g_down(double j, double m) {
  return j >= 1 ? std::sqrt(std::max(0.0, (j + m) * (j + m - 1) / (2 * j * (2 * j + 1)))) : 0.0;
}

}  // namespace

namespace {

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

}  // namespace

const char* to_string(Basis b) noexcept { return b == Basis::full ? "full" : "symmetric"; }

// ---------------------------------------------------------------------------
// Product basis

SparseMatrixC product_basis_operator(int N, Collective which) {
  if (N < 1 || N > 16) throw ResourceLimitError("product_basis_operator: 1 <= N <= 16 required");
  const int d = 1 << N;
  Triplets t;
  for (int a = 0; a < d; ++a) {
    if (which == Collective::Sz) {
      t.emplace_back(a, a, static_cast<double>(2 * popcount(static_cast<std::uint64_t>(a)) - N));
      continue;
    }
    for (int i = 0; i < N; ++i) {
      const int bit = 1 << i;
      if (!(a & bit)) continue;
      // sigma^-_i |a> = |a ^ bit>
      switch (which) {
        case Collective::Sminus: t.emplace_back(a ^ bit, a, 1.0); break;
        case Collective::Splus: t.emplace_back(a, a ^ bit, 1.0); break;
        case Collective::Sx:
          t.emplace_back(a ^ bit, a, 1.0);
          t.emplace_back(a, a ^ bit, 1.0);
          break;
        case Collective::Sy:  // -i (S+ - S-)
          t.emplace_back(a, a ^ bit, -kI);
          t.emplace_back(a ^ bit, a, kI);
          break;
        case Collective::Sz: break;
      }
    }
  }
  SparseMatrixC m(d, d);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

SparseMatrixC build_hamiltonian_full(const ModelParams& p, const Probe& probe) {
  check_n(p);
  const SparseMatrixC sx = product_basis_operator(p.N, Collective::Sx);
  const SparseMatrixC sy = product_basis_operator(p.N, Collective::Sy);
  const SparseMatrixC sz = product_basis_operator(p.N, Collective::Sz);
  const double pre = 1.0 / (2.0 * (p.N - 1));
  SparseMatrixC h = (pre * p.Jx) * SparseMatrixC(sx * sx) + (pre * p.Jy) * SparseMatrixC(sy * sy) +
                    (pre * p.Jz) * SparseMatrixC(sz * sz);
  if (probe.active()) h += probe.hx * sx + probe.hy * sy;
  h.prune(cplx(0.0), 1e-15);
  return h;
}

SparseMatrixR build_hamiltonian_full_real(const ModelParams& p) {
  const SparseMatrixC h = build_hamiltonian_full(p);
  SparseMatrixR r = h.real();
  r.prune(0.0, 1e-15);
  return r;
}

SuperOperator build_full_liouvillian(const ModelParams& p, const Probe& probe, int n_max) {
  check_n(p);
  if (p.N > n_max) throw ResourceLimitError("full-basis Liouvillian: N = " + std::to_string(p.N) + " exceeds " + std::to_string(n_max));
  const int N = p.N;
  const int d = 1 << N;
  auto idx = [d](int a, int b) { return a + b * d; };
  const SparseMatrixC h = build_hamiltonian_full(p, probe);

  Triplets t;
  t.reserve(static_cast<std::size_t>(d) * d * 8);
  // -i (H rho - rho H)
  for (int ap = 0; ap < d; ++ap)
    for (SparseMatrixC::InnerIterator it(h, ap); it; ++it) {
      const int a = it.col();
      const cplx v = it.value();
      for (int b = 0; b < d; ++b) {
        t.emplace_back(idx(ap, b), idx(a, b), -kI * v);  // (H rho)(ap, b) += H(ap, a) rho(a, b)
        t.emplace_back(idx(b, a), idx(b, ap), kI * v);   // (rho H)(b, a) += rho(b, ap) H(ap, a)
      }
    }
  // gamma sum_i D[sigma^-_i]
  if (p.gamma != 0.0) {
    for (int b = 0; b < d; ++b)
      for (int a = 0; a < d; ++a) {
        const int common = a & b;
        for (int i = 0; i < N; ++i) {
          const int bit = 1 << i;
          if (common & bit) t.emplace_back(idx(a ^ bit, b ^ bit), idx(a, b), p.gamma);
        }
        const int n = popcount(static_cast<std::uint64_t>(a)) + popcount(static_cast<std::uint64_t>(b));
        t.emplace_back(idx(a, b), idx(a, b), -0.5 * p.gamma * n);
      }
  }
  // Gamma/(N-1) D[S^-]
  if (p.Gamma != 0.0) {
    const double c = p.Gamma / (N - 1);
    const SparseMatrixC sm = product_basis_operator(N, Collective::Sminus);
    const SparseMatrixC sp = product_basis_operator(N, Collective::Splus);
    const SparseMatrixC k = sp * sm;
    // S- rho S+ : (ap, bp) += S-(ap, a) rho(a, b) S+(b, bp)
    for (int ap = 0; ap < d; ++ap)
      for (SparseMatrixC::InnerIterator ia(sm, ap); ia; ++ia)
        for (int b = 0; b < d; ++b)
          for (SparseMatrixC::InnerIterator ib(sp, b); ib; ++ib)
            t.emplace_back(idx(ap, static_cast<int>(ib.col())), idx(static_cast<int>(ia.col()), b), c * ia.value() * ib.value());
    for (int ap = 0; ap < d; ++ap)
      for (SparseMatrixC::InnerIterator it(k, ap); it; ++it) {
        const int a = static_cast<int>(it.col());
        for (int b = 0; b < d; ++b) {
          t.emplace_back(idx(ap, b), idx(a, b), -0.5 * c * it.value());
          t.emplace_back(idx(b, a), idx(b, ap), -0.5 * c * it.value());
        }
      }
  }

  SuperOperator L;
  L.basis = Basis::full;
  L.params = p;
  L.probe = probe;
  L.matrix.resize(static_cast<Eigen::Index>(d) * d, static_cast<Eigen::Index>(d) * d);
  L.matrix.setFromTriplets(t.begin(), t.end());
  L.matrix.prune(cplx(0.0), 0.0);
  return L;
}

Eigen::VectorXcd vectorize_full(const Eigen::MatrixXcd& rho) {
  return Eigen::Map<const Eigen::VectorXcd>(rho.data(), rho.size());
}

Eigen::MatrixXcd unvectorize_full(const Eigen::VectorXcd& v, int N) {
  const Eigen::Index d = Eigen::Index{1} << N;
  if (v.size() != d * d) throw DomainError("unvectorize_full: size mismatch");
  return Eigen::Map<const Eigen::MatrixXcd>(v.data(), d, d);
}

// ---------------------------------------------------------------------------
// Symmetric basis

DickeBlockMatrix build_hamiltonian_symmetric(const ModelParams& p, const Probe& probe) {
  check_n(p);
  const auto layout = shared_layout(p.N);
  const auto sx = collective_operator(layout, Collective::Sx);
  const auto sy = collective_operator(layout, Collective::Sy);
  const auto sz = collective_operator(layout, Collective::Sz);
  const double pre = 1.0 / (2.0 * (p.N - 1));
  DickeBlockMatrix h = cplx(pre * p.Jx) * (sx * sx) + cplx(pre * p.Jy) * (sy * sy) + cplx(pre * p.Jz) * (sz * sz);
  if (probe.active()) h += cplx(probe.hx) * sx + cplx(probe.hy) * sy;
  return h;
}

SuperOperator build_symmetric_liouvillian(const ModelParams& p, const Probe& probe) {
  check_n(p);
  const auto layout = shared_layout(p.N);
  const DickeBlockMatrix h = build_hamiltonian_symmetric(p, probe);
  const auto sm = collective_operator(layout, Collective::Sminus);
  const auto sp = collective_operator(layout, Collective::Splus);

  Triplets t;
  t.reserve(layout->packed_size * 12);
  const double N = p.N;
  for (std::size_t b = 0; b < layout->blocks.size(); ++b) {
    const auto& blk = layout->blocks[b];
    const int off = static_cast<int>(blk.offset);
    const int dim = blk.dim;
    const Eigen::MatrixXcd hb = h.block(b);
    add_block_left(t, off, dim, hb, -kI);
    add_block_right(t, off, dim, hb, kI);

    if (p.Gamma != 0.0) {
      const double c = p.Gamma / (N - 1);
      const Eigen::MatrixXcd m = sm.block(b);
      const Eigen::MatrixXcd pl = sp.block(b);
      const Eigen::MatrixXcd k = pl * m;
      add_block_sandwich(t, off, dim, m, pl, c);
      add_block_left(t, off, dim, k, -0.5 * c);
      add_block_right(t, off, dim, k, -0.5 * c);
    }

    if (p.gamma != 0.0) {
      const double j = blk.j();
      const Transfer transfers[] = {{+1, N - 2 * j, g_up}, {0, N + 2, g_same}, {-1, N + 2 * j + 2, g_down}};
      for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) {
          const double m = j - r;
          const double mp = j - c;
          t.emplace_back(off + r * dim + c, off + r * dim + c, -0.5 * p.gamma * (N + m + mp));
          for (const auto& tr : transfers) {
            const int target = layout->find(blk.twoj + 2 * tr.dj);
            if (target < 0 || tr.weight == 0.0) continue;
            const double jt = j + tr.dj;
            if (m - 1 < -jt - 1e-9 || mp - 1 < -jt - 1e-9) continue;
            const double v = p.gamma * 0.5 * tr.weight * tr.g(j, m) * tr.g(j, mp);
            if (v == 0.0) continue;
            const auto& tb = layout->blocks[static_cast<std::size_t>(target)];
            const int rt = static_cast<int>(std::lround(jt - (m - 1)));
            const int ct = static_cast<int>(std::lround(jt - (mp - 1)));
            t.emplace_back(static_cast<int>(tb.offset) + rt * tb.dim + ct, off + r * dim + c, v);
          }
        }
    }
  }

  SuperOperator L;
  L.basis = Basis::symmetric;
  L.params = p;
  L.probe = probe;
  const auto D = static_cast<Eigen::Index>(layout->packed_size);
  L.matrix.resize(D, D);
  L.matrix.setFromTriplets(t.begin(), t.end());
  L.matrix.prune(cplx(0.0), 0.0);
  return L;
}

Eigen::VectorXcd vectorize(const DickeBlockMatrix& rho) {
  return Eigen::Map<const Eigen::VectorXcd>(rho.data().data(), static_cast<Eigen::Index>(rho.data().size()));
}

DickeBlockMatrix unvectorize(const Eigen::VectorXcd& v, int N) {
  DickeBlockMatrix out(shared_layout(N));
  if (static_cast<std::size_t>(v.size()) != out.data().size()) throw DomainError("unvectorize: size mismatch");
  std::copy(v.data(), v.data() + v.size(), out.data().begin());
  return out;
}

// ---------------------------------------------------------------------------
// Shared structure

VecIndexInfo vec_index_info(Basis basis, int N) {
  VecIndexInfo info;
  if (basis == Basis::full) {
    if (N > 12) throw ResourceLimitError("vec_index_info: full basis N <= 12");
    const int d = 1 << N;
    info.transpose.resize(static_cast<std::size_t>(d) * d);
    info.parity.resize(info.transpose.size());
    for (int b = 0; b < d; ++b)
      for (int a = 0; a < d; ++a) {
        const std::size_t p = static_cast<std::size_t>(a) + static_cast<std::size_t>(b) * d;
        info.transpose[p] = b + a * d;
        info.parity[p] = static_cast<unsigned char>((popcount(static_cast<std::uint64_t>(a)) + popcount(static_cast<std::uint64_t>(b))) & 1);
        if (a == b) info.diagonal.push_back(static_cast<int>(p));
      }
    return info;
  }
  const auto layout = shared_layout(N);
  info.transpose.resize(layout->packed_size);
  info.parity.resize(layout->packed_size);
  for (const auto& blk : layout->blocks) {
    for (int r = 0; r < blk.dim; ++r)
      for (int c = 0; c < blk.dim; ++c) {
        const std::size_t p = blk.offset + static_cast<std::size_t>(r) * blk.dim + c;
        info.transpose[p] = static_cast<int>(blk.offset) + c * blk.dim + r;
        info.parity[p] = static_cast<unsigned char>(std::abs(r - c) & 1);
        if (r == c) info.diagonal.push_back(static_cast<int>(p));
      }
  }
  return info;
}

cplx vec_trace(const Eigen::VectorXcd& v, Basis basis, int N) {
  if (basis == Basis::full) {
    const Eigen::Index d = Eigen::Index{1} << N;
    cplx t = 0.0;
    for (Eigen::Index a = 0; a < d; ++a) t += v[a + a * d];
    return t;
  }
  return unvectorize(v, N).trace();
}

Eigen::VectorXcd Z2SuperOperator::apply(const Eigen::VectorXcd& v) const {
  Eigen::VectorXcd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = static_cast<double>(phase[static_cast<std::size_t>(i)]) * v[i];
  return out;
}

Z2SuperOperator build_z2(int N, Basis basis) {
  const auto info = vec_index_info(basis, N);
  Z2SuperOperator z;
  z.basis = basis;
  z.phase.resize(info.parity.size());
  for (std::size_t i = 0; i < info.parity.size(); ++i) z.phase[i] = info.parity[i] ? -1 : 1;
  return z;
}

double z2_commutator_norm(const SuperOperator& L, const Z2SuperOperator& z) {
  // (L Z - Z L)_{pq} = L_pq (z_q - z_p)
  double worst = 0.0;
  for (Eigen::Index p = 0; p < L.matrix.outerSize(); ++p)
    for (SparseMatrixC::InnerIterator it(L.matrix, p); it; ++it) {
      const double dz = z.phase[static_cast<std::size_t>(it.col())] - z.phase[static_cast<std::size_t>(p)];
      worst = std::max(worst, std::abs(it.value() * dz));
    }
  return worst;
}

double inf_norm(const SparseMatrixC& m) {
  double best = 0.0;
  for (Eigen::Index r = 0; r < m.outerSize(); ++r) {
    double s = 0.0;
    for (SparseMatrixC::InnerIterator it(m, r); it; ++it) s += std::abs(it.value());
    best = std::max(best, s);
  }
  return best;
}

// ---------------------------------------------------------------------------
// Hermitian sector solver

struct HermitianSectorSolver::Impl {
  enum Kind : unsigned char { diag, re, im };
  struct Coord {
    int p;
    int pt;
    Kind kind;
  };
  std::vector<Coord> coords;
  std::vector<int> re_of;  // vec index -> coordinate holding Re (or -1)
  std::vector<int> im_of;
  int border = -1;         // coordinate row replaced by the trace
  Eigen::Index D = 0;
  detail::SparseLU<double> lu;
};

HermitianSectorSolver::HermitianSectorSolver(const SuperOperator& L, int parity) : impl_(std::make_unique<Impl>()), parity_(parity) {
  if (parity != 0 && parity != 1 && parity != all_parities)
    throw DomainError("HermitianSectorSolver: parity must be 0, 1 or all_parities");
  auto& s = *impl_;
  const auto info = vec_index_info(L.basis, L.params.N);
  s.D = L.dim();
  s.re_of.assign(static_cast<std::size_t>(s.D), -1);
  s.im_of.assign(static_cast<std::size_t>(s.D), -1);
  for (int p = 0; p < s.D; ++p) {
    if (parity != all_parities && info.parity[static_cast<std::size_t>(p)] != parity) continue;
    const int pt = info.transpose[static_cast<std::size_t>(p)];
    if (p == pt) {
      s.re_of[p] = static_cast<int>(s.coords.size());
      s.coords.push_back({p, pt, Impl::diag});
    } else if (p < pt) {
      s.re_of[p] = static_cast<int>(s.coords.size());
      s.coords.push_back({p, pt, Impl::re});
      s.im_of[p] = static_cast<int>(s.coords.size());
      s.coords.push_back({p, pt, Impl::im});
    }
  }
  if (parity != 1) {
    for (std::size_t k = 0; k < s.coords.size(); ++k)
      if (s.coords[k].kind == Impl::diag) {
        s.border = static_cast<int>(k);
        break;
      }
  }

  const Eigen::SparseMatrix<cplx, Eigen::ColMajor, int> lc = L.matrix;
  const auto n = static_cast<int>(s.coords.size());
  std::vector<Eigen::Triplet<double, int>> t;
  t.reserve(static_cast<std::size_t>(lc.nonZeros()) * 2);
  std::vector<cplx> acc(static_cast<std::size_t>(s.D), cplx(0.0));
  std::vector<int> touched;
  auto gather = [&](int col, cplx w) {
    for (decltype(lc)::InnerIterator it(lc, col); it; ++it) {
      const auto q = static_cast<std::size_t>(it.row());
      if (acc[q] == cplx(0.0)) touched.push_back(static_cast<int>(q));
      acc[q] += w * it.value();
    }
  };
  for (int k = 0; k < n; ++k) {
    const auto& c = s.coords[static_cast<std::size_t>(k)];
    touched.clear();
    switch (c.kind) {
      case Impl::diag: gather(c.p, 1.0); break;
      case Impl::re: gather(c.p, 1.0); gather(c.pt, 1.0); break;
      case Impl::im: gather(c.p, kI); gather(c.pt, -kI); break;
    }
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    for (int q : touched) {
      const cplx v = acc[static_cast<std::size_t>(q)];
      acc[static_cast<std::size_t>(q)] = 0.0;
      const int rr = s.re_of[static_cast<std::size_t>(q)];
      const int ri = s.im_of[static_cast<std::size_t>(q)];
      if (rr >= 0 && rr != s.border && v.real() != 0.0) t.emplace_back(rr, k, v.real());
      if (ri >= 0 && v.imag() != 0.0) t.emplace_back(ri, k, v.imag());
    }
    if (s.border >= 0 && c.kind == Impl::diag) t.emplace_back(s.border, k, 1.0);
  }
  detail::SparseLU<double>::Matrix a(n, n);
  a.setFromTriplets(t.begin(), t.end());
  const int status = s.lu.factorize(std::move(a));
  const double rc = s.lu.rcond();
  if (status == 1 || !(rc > 1e-14)) {
    if (parity != 1) throw MultiplicityError("steady state is not unique (singular bordered system, rcond " + sci(rc) + ")");
    throw SolverError("singular odd-sector Liouvillian (rcond " + sci(rc) + ")");
  }
}

HermitianSectorSolver::~HermitianSectorSolver() = default;

Eigen::Index HermitianSectorSolver::real_dim() const noexcept { return static_cast<Eigen::Index>(impl_->coords.size()); }

Eigen::VectorXcd HermitianSectorSolver::solve(const Eigen::VectorXcd& rhs, double trace) const {
  const auto& s = *impl_;
  if (rhs.size() != s.D) throw DomainError("HermitianSectorSolver::solve: size mismatch");
  Eigen::VectorXd b(static_cast<Eigen::Index>(s.coords.size()));
  for (std::size_t k = 0; k < s.coords.size(); ++k) {
    const auto& c = s.coords[k];
    b[static_cast<Eigen::Index>(k)] = c.kind == Impl::im ? rhs[c.p].imag() : rhs[c.p].real();
  }
  if (s.border >= 0) b[s.border] = trace;
  const Eigen::VectorXd x = s.lu.solve(b);
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(s.D);
  for (std::size_t k = 0; k < s.coords.size(); ++k) {
    const auto& c = s.coords[k];
    const double v = x[static_cast<Eigen::Index>(k)];
    switch (c.kind) {
      case Impl::diag: out[c.p] += v; break;
      case Impl::re: out[c.p] += v; out[c.pt] += v; break;
      case Impl::im: out[c.p] += kI * v; out[c.pt] -= kI * v; break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Steady state

namespace {

Eigen::VectorXcd complex_bordered_solve(const SuperOperator& L) {
  const auto info = vec_index_info(L.basis, L.params.N);
  const int border = info.diagonal.front();
  std::vector<Eigen::Triplet<cplx, int>> t;
  t.reserve(static_cast<std::size_t>(L.matrix.nonZeros()) + info.diagonal.size());
  for (Eigen::Index r = 0; r < L.matrix.outerSize(); ++r) {
    if (r == border) continue;
    for (SparseMatrixC::InnerIterator it(L.matrix, r); it; ++it) t.emplace_back(static_cast<int>(r), static_cast<int>(it.col()), it.value());
  }
  for (int d : info.diagonal) t.emplace_back(border, d, 1.0);
  detail::SparseLU<cplx>::Matrix a(L.dim(), L.dim());
  a.setFromTriplets(t.begin(), t.end());
  detail::SparseLU<cplx> lu;
  const int status = lu.factorize(std::move(a));
  if (status == 1 || !(lu.rcond() > 1e-14)) {
    throw MultiplicityError("steady state is not unique (singular bordered system, rcond " + sci(lu.rcond()) + ")");
  }
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(L.dim());
  rhs[border] = 1.0;
  return lu.solve(rhs);
}

void hermitize(Eigen::VectorXcd& v, const VecIndexInfo& info) {
  for (Eigen::Index p = 0; p < v.size(); ++p) {
    const int pt = info.transpose[static_cast<std::size_t>(p)];
    if (pt < p) continue;
    const cplx avg = 0.5 * (v[p] + std::conj(v[pt]));
    v[p] = avg;
    v[pt] = std::conj(avg);
  }
}

}  // namespace

SteadyStateResult steady_state(const SuperOperator& L, const SteadyStateOptions& opts) {
  SteadyStateResult res;
  auto method = opts.method;
  // a probe field breaks Z2, so the even sector alone no longer closes
  const int sector = L.probe.active() ? HermitianSectorSolver::all_parities : 0;
  if (method == SteadyStateMethod::automatic) {
    try {
      HermitianSectorSolver solver(L, sector);
      res.vec = solver.solve(Eigen::VectorXcd::Zero(L.dim()), 1.0);
      method = SteadyStateMethod::real_sector;
    } catch (const MultiplicityError&) {
      throw;
    } catch (const SolverError&) {
      method = SteadyStateMethod::complex_bordered;
    }
  } else if (method == SteadyStateMethod::real_sector) {
    HermitianSectorSolver solver(L, sector);
    res.vec = solver.solve(Eigen::VectorXcd::Zero(L.dim()), 1.0);
  }
  if (method == SteadyStateMethod::complex_bordered) res.vec = complex_bordered_solve(L);
  res.method = method;

  const auto info = vec_index_info(L.basis, L.params.N);
  hermitize(res.vec, info);
  const cplx tr = vec_trace(res.vec, L.basis, L.params.N);
  res.vec /= tr.real();

  const double norm = inf_norm(L.matrix);
  res.residual = (L.matrix * res.vec).cwiseAbs().maxCoeff() / (norm > 0 ? norm : 1.0);
  if (!(res.residual < opts.tol)) {
    throw SolverError("steady-state residual " + sci(res.residual) + " exceeds tolerance");
  }
  double lo;
  if (L.basis == Basis::symmetric) {
    lo = min_eigenvalue(unvectorize(res.vec, L.params.N));
  } else {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(unvectorize_full(res.vec, L.params.N), Eigen::EigenvaluesOnly);
    lo = es.eigenvalues().minCoeff();
  }
  if (lo < -opts.psd_slack) throw SolverError("steady state is not positive semidefinite (eigenvalue " + sci(lo) + ")");
  return res;
}

DickeBlockMatrix steady_state_symmetric(const SuperOperator& L, const SteadyStateOptions& opts) {
  if (L.basis != Basis::symmetric) throw DomainError("steady_state_symmetric: symmetric-basis Liouvillian required");
  return unvectorize(steady_state(L, opts).vec, L.params.N);
}

Eigen::MatrixXcd steady_state_full(const SuperOperator& L, const SteadyStateOptions& opts) {
  if (L.basis != Basis::full) throw DomainError("steady_state_full: full-basis Liouvillian required");
  return unvectorize_full(steady_state(L, opts).vec, L.params.N);
}

// ---------------------------------------------------------------------------
// Cache

namespace {

constexpr char kCacheMagic[8] = {'P', 'I', 'X', 'Y', 'Z', 'L', 'I', 'O'};
constexpr std::uint32_t kCacheVersion = 1;

std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h = 1469598103934665603ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

struct KeyRecord {
  std::uint32_t version;
  std::int32_t N;
  double values[7];
};

KeyRecord key_record(const ModelParams& p, const Probe& probe) {
  KeyRecord k{};
  k.version = kCacheVersion;
  k.N = p.N;
  const double v[7] = {p.Jx, p.Jy, p.Jz, p.gamma, p.Gamma, probe.hx, probe.hy};
  std::memcpy(k.values, v, sizeof v);
  return k;
}

template <class T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
bool take(std::istream& in, T& v) {
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  return static_cast<bool>(in);
}

}  // namespace

LiouvillianCache::LiouvillianCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::string LiouvillianCache::key(const ModelParams& p, const Probe& probe) {
  const KeyRecord k = key_record(p, probe);
  std::uint64_t h = fnv1a(&k.version, sizeof k.version);
  h = fnv1a(&k.N, sizeof k.N, h);
  h = fnv1a(k.values, sizeof k.values, h);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return "L" + std::to_string(p.N) + "_" + buf;
}

std::optional<SuperOperator> LiouvillianCache::load(const ModelParams& p, const Probe& probe) const {
  std::ifstream in(dir_ / (key(p, probe) + ".bin"), std::ios::binary);
  if (!in) return std::nullopt;
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kCacheMagic, sizeof magic) != 0) return std::nullopt;
  KeyRecord stored{};
  if (!take(in, stored)) return std::nullopt;
  const KeyRecord want = key_record(p, probe);
  if (stored.version != want.version || stored.N != want.N || std::memcmp(stored.values, want.values, sizeof want.values) != 0) {
    return std::nullopt;
  }
  std::int64_t rows = 0, nnz = 0;
  if (!take(in, rows) || !take(in, nnz) || rows <= 0 || nnz < 0) return std::nullopt;
  SuperOperator L;
  L.basis = Basis::symmetric;
  L.params = p;
  L.probe = probe;
  L.matrix.resize(rows, rows);
  L.matrix.resizeNonZeros(nnz);
  in.read(reinterpret_cast<char*>(L.matrix.outerIndexPtr()), static_cast<std::streamsize>((rows + 1) * sizeof(int)));
  in.read(reinterpret_cast<char*>(L.matrix.innerIndexPtr()), static_cast<std::streamsize>(nnz * sizeof(int)));
  in.read(reinterpret_cast<char*>(L.matrix.valuePtr()), static_cast<std::streamsize>(nnz * sizeof(cplx)));
  if (!in) return std::nullopt;
  return L;
}

void LiouvillianCache::store(const SuperOperator& L) const {
  if (L.basis != Basis::symmetric) throw DomainError("LiouvillianCache stores symmetric-basis operators only");
  SparseMatrixC m = L.matrix;
  m.makeCompressed();
  const auto final_path = dir_ / (key(L.params, L.probe) + ".bin");
  auto tmp = final_path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(kCacheMagic, sizeof kCacheMagic);
    put(out, key_record(L.params, L.probe));
    put(out, static_cast<std::int64_t>(m.rows()));
    put(out, static_cast<std::int64_t>(m.nonZeros()));
    out.write(reinterpret_cast<const char*>(m.outerIndexPtr()), static_cast<std::streamsize>((m.rows() + 1) * sizeof(int)));
    out.write(reinterpret_cast<const char*>(m.innerIndexPtr()), static_cast<std::streamsize>(m.nonZeros() * sizeof(int)));
    out.write(reinterpret_cast<const char*>(m.valuePtr()), static_cast<std::streamsize>(m.nonZeros() * sizeof(cplx)));
    if (!out) throw Error("LiouvillianCache: write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, final_path);
}

SuperOperator LiouvillianCache::get_or_build(const ModelParams& p, const Probe& probe) const {
  if (auto hit = load(p, probe)) return std::move(*hit);
  SuperOperator L = build_symmetric_liouvillian(p, probe);
  store(L);
  return L;
}

}  // namespace pixyz
