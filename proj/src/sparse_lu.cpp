#include "sparse_lu.hpp"

#include <umfpack.h>

#include <limits>

#include "pixyz/errors.hpp"

namespace pixyz::detail {

template <class Scalar>
SparseLU<Scalar>::~SparseLU() {
  if (!numeric_) return;
  if constexpr (std::is_same_v<Scalar, double>) {
    umfpack_di_free_numeric(&numeric_);
  } else {
    umfpack_zi_free_numeric(&numeric_);
  }
}

template <class Scalar>
int SparseLU<Scalar>::factorize(Matrix a) {
  a_ = std::move(a);
  a_.makeCompressed();
  const int n = static_cast<int>(a_.rows());
  if (a_.cols() != a_.rows()) throw DomainError("SparseLU: matrix must be square");
  const int* ap = a_.outerIndexPtr();
  const int* ai = a_.innerIndexPtr();
  const double* ax = reinterpret_cast<const double*>(a_.valuePtr());

  double control[UMFPACK_CONTROL];
  double info[UMFPACK_INFO];
  void* symbolic = nullptr;
  if constexpr (std::is_same_v<Scalar, double>) {
    umfpack_di_defaults(control);
    status_ = umfpack_di_symbolic(n, n, ap, ai, ax, &symbolic, control, info);
    if (status_ == UMFPACK_OK) status_ = umfpack_di_numeric(ap, ai, ax, symbolic, &numeric_, control, info);
    if (symbolic) umfpack_di_free_symbolic(&symbolic);
  } else {
    umfpack_zi_defaults(control);
    status_ = umfpack_zi_symbolic(n, n, ap, ai, ax, nullptr, &symbolic, control, info);
    if (status_ == UMFPACK_OK) status_ = umfpack_zi_numeric(ap, ai, ax, nullptr, symbolic, &numeric_, control, info);
    if (symbolic) umfpack_zi_free_symbolic(&symbolic);
  }
  if (status_ == UMFPACK_ERROR_out_of_memory) throw ResourceLimitError("UMFPACK: out of memory");
  if (status_ < 0) throw SolverError("UMFPACK factorization failed with status " + std::to_string(status_));
  rcond_ = info[UMFPACK_RCOND];
  norm_inf_ = 0.0;
  {
    Eigen::VectorXd rows = Eigen::VectorXd::Zero(n);
    for (int k = 0; k < a_.outerSize(); ++k)
      for (typename Matrix::InnerIterator it(a_, k); it; ++it) rows[it.row()] += std::abs(it.value());
    if (n > 0) norm_inf_ = rows.maxCoeff();
  }
  return status_;
}

template <class Scalar>
typename SparseLU<Scalar>::Vector SparseLU<Scalar>::raw_solve(const Vector& b) const {
  Vector x(b.size());
  double control[UMFPACK_CONTROL];
  double info[UMFPACK_INFO];
  int status;
  const double* ax = reinterpret_cast<const double*>(a_.valuePtr());
  if constexpr (std::is_same_v<Scalar, double>) {
    umfpack_di_defaults(control);
    status = umfpack_di_solve(UMFPACK_A, a_.outerIndexPtr(), a_.innerIndexPtr(), ax, x.data(), b.data(), numeric_,
                              control, info);
  } else {
    umfpack_zi_defaults(control);
    status = umfpack_zi_solve(UMFPACK_A, a_.outerIndexPtr(), a_.innerIndexPtr(), ax, nullptr,
                              reinterpret_cast<double*>(x.data()), nullptr,
                              reinterpret_cast<const double*>(b.data()), nullptr, numeric_, control, info);
  }
  if (status < 0) throw SolverError("UMFPACK solve failed with status " + std::to_string(status));
  return x;
}

// Some OpenBLAS kernels return visibly wrong dense updates on certain
// virtualized CPUs, so the residual is formed here with Eigen and refined.
template <class Scalar>
typename SparseLU<Scalar>::Vector SparseLU<Scalar>::solve(const Vector& b) const {
  if (!numeric_) throw SolverError("SparseLU: solve before factorize");
  Vector x = raw_solve(b);
  if (!x.allFinite()) return x;
  const double bnorm = b.cwiseAbs().maxCoeff();
  double prev = std::numeric_limits<double>::infinity();
  for (int step = 0; step < kMaxRefine; ++step) {
    const Vector r = b - a_ * x;
    const double rn = r.cwiseAbs().maxCoeff();
    const double target = kRefineEps * (norm_inf_ * x.cwiseAbs().maxCoeff() + bnorm);
    last_residual_ = rn;
    if (rn <= target || rn >= 0.5 * prev) break;
    prev = rn;
    x += raw_solve(r);
  }
  return x;
}

template class SparseLU<double>;
template class SparseLU<std::complex<double>>;

}  // namespace pixyz::detail
