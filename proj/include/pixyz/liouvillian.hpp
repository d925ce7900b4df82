#pragma once

// Liouvillian superoperators of the model in two bases.
//
// full:      operator space of the 2^N-dim product Hilbert space, dimension
//            4^N, column-stacked: rho(a, b) -> index a + b 2^N, so that
//            A rho B -> (B^T (x) A) vec(rho).
// symmetric: packed DickeBlockMatrix storage (block-major, row-major inside
//            each block), dimension sum_j (2j+1)^2.
//
// The symmetric local dissipator moves weight between neighbouring j; its
// rates are in dicke.cpp's stored convention (rho_j carries the trace of all
// d_j copies).

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pixyz/dicke.hpp"
#include "pixyz/errors.hpp"
#include "pixyz/model.hpp"

namespace pixyz {

using SparseMatrixC = Eigen::SparseMatrix<cplx, Eigen::RowMajor, int>;
using SparseMatrixR = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

enum class Basis { full, symmetric };
const char* to_string(Basis b) noexcept;

/// Uniform in-plane probe field H_B = hx Sx + hy Sy added to the Hamiltonian.
struct Probe {
  double hx = 0.0;
  double hy = 0.0;
  bool active() const noexcept { return hx != 0.0 || hy != 0.0; }
};

struct SuperOperator {
  Basis basis = Basis::symmetric;
  ModelParams params;
  Probe probe;
  SparseMatrixC matrix;

  Eigen::Index dim() const noexcept { return matrix.rows(); }
  Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const { return matrix * x; }
};

/// Default cap on N for the explicit full-basis Liouvillian.
inline constexpr int kFullMaxN = 8;

// ---- product basis --------------------------------------------------------

/// Collective operator in the 2^N product basis (bit i set = spin i up).
SparseMatrixC product_basis_operator(int N, Collective which);
/// Real symmetric Hamiltonian in the product basis (probe must have hy = 0
/// for the result to be real; use the complex overload otherwise).
SparseMatrixC build_hamiltonian_full(const ModelParams& params, const Probe& probe = {});
/// H restricted to the real part; throws DomainError if the probe has hy != 0.
SparseMatrixR build_hamiltonian_full_real(const ModelParams& params);
/// Throws ResourceLimitError when N > n_max.
SuperOperator build_full_liouvillian(const ModelParams& params, const Probe& probe = {}, int n_max = kFullMaxN);

Eigen::VectorXcd vectorize_full(const Eigen::MatrixXcd& rho);
Eigen::MatrixXcd unvectorize_full(const Eigen::VectorXcd& v, int N);

// ---- symmetric basis ------------------------------------------------------

DickeBlockMatrix build_hamiltonian_symmetric(const ModelParams& params, const Probe& probe = {});
SuperOperator build_symmetric_liouvillian(const ModelParams& params, const Probe& probe = {});

Eigen::VectorXcd vectorize(const DickeBlockMatrix& rho);
DickeBlockMatrix unvectorize(const Eigen::VectorXcd& v, int N);

// ---- structure shared by both bases ---------------------------------------

/// Per vec-index metadata: index of the transposed element and the Z2 parity
/// (m - m' mod 2, equivalently popcount(a) - popcount(b) mod 2).
struct VecIndexInfo {
  std::vector<int> transpose;
  std::vector<unsigned char> parity;
  std::vector<int> diagonal;  // vec indices of diagonal elements
};
VecIndexInfo vec_index_info(Basis basis, int N);

/// Trace of a vectorized operator.
cplx vec_trace(const Eigen::VectorXcd& v, Basis basis, int N);

/// pi rotation about z: rho -> U rho U^dagger, U = exp(-i pi S^z / 4)
/// = prod_i exp(-i pi sigma^z_i / 2). Acts diagonally with phase
/// (-1)^(m - m') (symmetric) or (-1)^(popcount a - popcount b) (full).
struct Z2SuperOperator {
  Basis basis = Basis::symmetric;
  std::vector<signed char> phase;
  Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const;
};
Z2SuperOperator build_z2(int N, Basis basis);
/// max |(L Z - Z L)_{pq}|
double z2_commutator_norm(const SuperOperator& L, const Z2SuperOperator& z);

/// Largest absolute row sum.
double inf_norm(const SparseMatrixC& m);

// ---- steady state ---------------------------------------------------------

enum class SteadyStateMethod {
  automatic,        // real_sector, falling back to complex_bordered
  complex_bordered, // complex LU with one diagonal row replaced by the trace
  real_sector,      // real LU on Hermitian coordinates of the Z2-even sector
};

struct SteadyStateOptions {
  double tol = 1e-12;  // relative: ||L rho||_inf < tol ||L||_inf
  SteadyStateMethod method = SteadyStateMethod::automatic;
  double psd_slack = 1e-9;
};

struct SteadyStateResult {
  Eigen::VectorXcd vec;
  double residual = 0.0;  // ||L rho||_inf / ||L||_inf
  SteadyStateMethod method = SteadyStateMethod::automatic;
};

/// Unique steady state with unit trace. Throws MultiplicityError when the
/// kernel is degenerate and SolverError when the residual or PSD checks fail.
SteadyStateResult steady_state(const SuperOperator& L, const SteadyStateOptions& opts = {});
DickeBlockMatrix steady_state_symmetric(const SuperOperator& L, const SteadyStateOptions& opts = {});
Eigen::MatrixXcd steady_state_full(const SuperOperator& L, const SteadyStateOptions& opts = {});

/// LU factorization of L restricted to Hermitian operators of one Z2 parity,
/// written in real coordinates (diagonal entries, real and imaginary parts
/// of upper entries). For parity 0 one diagonal equation is replaced by the
/// trace so the factorization is regular when the steady state is unique.
class HermitianSectorSolver {
 public:
  /// Parity value selecting every Hermitian coordinate (needed when a probe
  /// field breaks Z2); bordered like parity 0.
  static constexpr int all_parities = -1;

  HermitianSectorSolver(const SuperOperator& L, int parity);
  ~HermitianSectorSolver();
  HermitianSectorSolver(const HermitianSectorSolver&) = delete;
  HermitianSectorSolver& operator=(const HermitianSectorSolver&) = delete;

  /// Solves L x = rhs for Hermitian rhs of this parity. For parity 0 and
  /// all_parities the bordered equation instead imposes Tr x = trace.
  Eigen::VectorXcd solve(const Eigen::VectorXcd& rhs, double trace = 0.0) const;
  Eigen::Index real_dim() const noexcept;
  int parity() const noexcept { return parity_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int parity_;
};

// ---- on-disk cache --------------------------------------------------------

/// Assembled symmetric Liouvillians keyed by a hash of (N, couplings, rates,
/// probe). Files are written atomically (temp file + rename).
class LiouvillianCache {
 public:
  explicit LiouvillianCache(std::filesystem::path dir);
  static std::string key(const ModelParams& params, const Probe& probe);
  std::optional<SuperOperator> load(const ModelParams& params, const Probe& probe = {}) const;
  void store(const SuperOperator& L) const;
  SuperOperator get_or_build(const ModelParams& params, const Probe& probe = {}) const;
  const std::filesystem::path& dir() const noexcept { return dir_; }

 private:
  std::filesystem::path dir_;
};

}  // namespace pixyz
