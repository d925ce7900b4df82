#pragma once

// Permutation-symmetric operators on N spin-1/2 sites.
//
// A permutation-invariant operator decomposes as  O = (+)_j O_j (x) 1_{d_j}
// over total-spin sectors j = N/2, N/2 - 1, ..., j_min, where d_j counts the
// copies of the spin-j irrep. Only one (2j+1) x (2j+1) block per j is stored.
//
// Conventions (used everywhere in the library):
//  * collective operators are sums of Pauli matrices, S^a = sum_i sigma^a_i,
//    so S^a = 2 J^a with J^a the spin-j matrices and S^z|j,m> = 2m|j,m>;
//  * S^+- = sum_i sigma^+-_i = J^+- (no factor 2), Sx = S+ + S-,
//    Sy = -i (S+ - S-), and [Sz, S+-] = +-2 S+-;
//  * rows/columns of a block are ordered m = j, j-1, ..., -j;
//  * blocks are ordered by j descending;
//  * a density matrix is stored as the per-block traces rho_j with
//    rho = (+)_j (rho_j / d_j) (x) 1_{d_j}, so sum_j Tr rho_j = 1 and
//    <O> = sum_j Tr(rho_j O_j) for any symmetric O;
//  * in the product basis, bit i of the basis index set means spin i is up.

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace pixyz {

using cplx = std::complex<double>;
using RowMatrixXcd = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using u128 = unsigned __int128;

/// Largest N for which degeneracies fit the exact 128-bit recurrence.
inline constexpr int kMaxDickeN = 120;

std::string to_string(u128 value);

struct DickeBlock {
  int twoj = 0;            // 2j
  int dim = 1;             // 2j + 1
  std::size_t offset = 0;  // into packed storage, in elements
  u128 degeneracy_exact = 1;
  double degeneracy = 1.0;

  double j() const noexcept { return 0.5 * twoj; }
};

struct BlockLayout {
  int N = 0;
  std::vector<DickeBlock> blocks;  // j descending
  std::size_t packed_size = 0;     // sum_j (2j+1)^2

  /// Index of the block with the given 2j, or -1.
  int find(int twoj) const noexcept;
  friend bool operator==(const BlockLayout& a, const BlockLayout& b) noexcept {
    return a.N == b.N && a.blocks.size() == b.blocks.size() && a.packed_size == b.packed_size;
  }
};

/// d_j = C(N, k) - C(N, k-1), k = N/2 - j, in exact integer arithmetic.
u128 dicke_degeneracy(int N, int twoj);

/// Throws DomainError for N < 1, ResourceLimitError for N > kMaxDickeN.
BlockLayout build_layout(int N);
std::shared_ptr<const BlockLayout> shared_layout(int N);

class DickeBlockMatrix {
 public:
  DickeBlockMatrix() = default;
  explicit DickeBlockMatrix(std::shared_ptr<const BlockLayout> layout);

  const BlockLayout& layout() const { return *layout_; }
  const std::shared_ptr<const BlockLayout>& layout_ptr() const { return layout_; }
  std::size_t num_blocks() const { return layout_->blocks.size(); }

  Eigen::Map<RowMatrixXcd> block(std::size_t b);
  Eigen::Map<const RowMatrixXcd> block(std::size_t b) const;

  std::vector<cplx>& data() { return data_; }
  const std::vector<cplx>& data() const { return data_; }

  /// sum_j Tr(block_j)
  cplx trace() const;
  DickeBlockMatrix adjoint() const;
  /// max |A - A^dagger| over all entries
  double hermiticity_error() const;

  DickeBlockMatrix& operator+=(const DickeBlockMatrix& other);
  DickeBlockMatrix& operator-=(const DickeBlockMatrix& other);
  DickeBlockMatrix& operator*=(cplx s);

 private:
  std::shared_ptr<const BlockLayout> layout_;
  std::vector<cplx> data_;
};

DickeBlockMatrix operator+(DickeBlockMatrix a, const DickeBlockMatrix& b);
DickeBlockMatrix operator-(DickeBlockMatrix a, const DickeBlockMatrix& b);
DickeBlockMatrix operator*(cplx s, DickeBlockMatrix a);
/// Block-wise product.
DickeBlockMatrix operator*(const DickeBlockMatrix& a, const DickeBlockMatrix& b);
DickeBlockMatrix commutator(const DickeBlockMatrix& a, const DickeBlockMatrix& b);
/// max_b |A_b - B_b|_max
double max_abs_diff(const DickeBlockMatrix& a, const DickeBlockMatrix& b);

enum class Collective { Sx, Sy, Sz, Splus, Sminus };

DickeBlockMatrix collective_operator(std::shared_ptr<const BlockLayout> layout, Collective which);
DickeBlockMatrix identity_operator(std::shared_ptr<const BlockLayout> layout);

/// Maximally mixed state 1/2^N in stored form (rho_j = d_j (2j+1)/2^N * 1/(2j+1)).
DickeBlockMatrix maximally_mixed(std::shared_ptr<const BlockLayout> layout);
/// Pure Dicke state |j=N/2, m> (2m given).
DickeBlockMatrix dicke_state(std::shared_ptr<const BlockLayout> layout, int twom);

/// sum_j Tr(rho_j op_j). Throws DomainError on layout mismatch.
cplx expectation(const DickeBlockMatrix& rho, const DickeBlockMatrix& op);

/// sum_j d_j Tr f(rho_j / d_j) via Hermitian diagonalization.
/// Eigenvalues below -1e-9 raise DomainError; smaller negatives are clipped.
double weighted_functional(const DickeBlockMatrix& rho, const std::function<double(double)>& f);
/// Von Neumann entropy of the full 2^N state, evaluated as
/// sum_j sum_k (-l ln l + l ln d_j) to avoid forming l/d_j.
double von_neumann_entropy(const DickeBlockMatrix& rho);
/// Tr rho^2 of the full state: sum_j Tr(rho_j^2)/d_j.
double purity(const DickeBlockMatrix& rho);
/// Smallest eigenvalue over all Hermitian parts of the blocks.
double min_eigenvalue(const DickeBlockMatrix& rho);

// Product-basis bridge (oracles). Dimension 2^N; N <= 12.

/// Columns of the returned matrix span copy c of irrep j, ordered m = j..-j.
/// copies[b][c] is a 2^N x (2j+1) isometry.
std::vector<std::vector<Eigen::MatrixXcd>> irrep_bases(int N);
/// rho = (+)_j (rho_j/d_j) (x) 1_{d_j} as a 2^N x 2^N matrix.
Eigen::MatrixXcd embed_in_product_basis(const DickeBlockMatrix& rho);
/// Operators are embedded without the 1/d_j (O = (+)_j O_j (x) 1).
Eigen::MatrixXcd embed_operator_in_product_basis(const DickeBlockMatrix& op);
/// rho_j = sum_c V_{j,c}^dagger rho V_{j,c}; exact for permutation-invariant rho.
DickeBlockMatrix project_from_product_basis(const Eigen::MatrixXcd& rho, int N);

// Serialization: layout header followed by per-block row-major complex data.
void write_binary(std::ostream& out, const DickeBlockMatrix& m);
DickeBlockMatrix read_binary(std::istream& in);
std::string to_json(const DickeBlockMatrix& m);
DickeBlockMatrix from_json(const std::string& text);

}  // namespace pixyz
