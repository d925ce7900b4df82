#pragma once

// Minimal RAII wrapper over UMFPACK (real and complex, int indices). Eigen's
// UmfPackLU hides the reciprocal condition estimate, which the steady-state
// solver uses to detect a degenerate kernel.

#include <Eigen/Sparse>
#include <complex>
#include <type_traits>
#include <vector>

namespace pixyz::detail {

template <class Scalar>
class SparseLU {
 public:
  using Matrix = Eigen::SparseMatrix<Scalar, Eigen::ColMajor, int>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  SparseLU() = default;
  ~SparseLU();
  SparseLU(const SparseLU&) = delete;
  SparseLU& operator=(const SparseLU&) = delete;

  /// Returns the UMFPACK status (0 ok, 1 singular, <0 error).
  int factorize(Matrix a);
  Vector solve(const Vector& b) const;

  double rcond() const noexcept { return rcond_; }
  int status() const noexcept { return status_; }
  Eigen::Index rows() const noexcept { return a_.rows(); }
  /// Max-abs residual of the last solve after refinement.
  double last_residual() const noexcept { return last_residual_; }

 private:
  static constexpr int kMaxRefine = 12;
  static constexpr double kRefineEps = 1e-15;

  Vector raw_solve(const Vector& b) const;

  Matrix a_;
  double norm_inf_ = 0.0;
  mutable double last_residual_ = 0.0;
  void* numeric_ = nullptr;
  double rcond_ = 0.0;
  int status_ = -1;
};

extern template class SparseLU<double>;
extern template class SparseLU<std::complex<double>>;

}  // namespace pixyz::detail
