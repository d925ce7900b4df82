#pragma once

// Liouvillian eigenanalysis: dense spectra for small operators, detection of
// the mirror (PT) axis, and the gap from a few extremal eigenvalues of the
// shifted operator L + 2 eta computed by a Krylov-Schur iteration.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "pixyz/liouvillian.hpp"

namespace pixyz {

/// Largest dimension accepted by the dense eigensolver.
inline constexpr Eigen::Index kDenseLimit = 4096;
/// Relative tolerance used when pairing eigenvalues across the mirror axis.
inline constexpr double kMirrorTol = 1e-7;

struct SpectrumReport {
  std::vector<cplx> eigenvalues;  // ascending |Re|, then ascending Im
  double gap = 0.0;               // |Re lambda_1|
  bool pt_symmetric = false;
  std::optional<double> eta;
  std::optional<std::pair<cplx, cplx>> antigap_pair;  // (lambda_M, lambda_{M-1})

  /// Re lambda_{M-1} - Re lambda_M, if the mirror axis was found.
  std::optional<double> antigap() const;
};

/// All eigenvalues of a dense matrix (LAPACK zgeev), unordered.
std::vector<cplx> dense_eigenvalues(Eigen::MatrixXcd a);

/// Orders eigenvalues and fills the derived fields.
SpectrumReport make_report(std::vector<cplx> eigenvalues, double mirror_tol = kMirrorTol);

/// Complete spectrum by dense diagonalization. Throws ResourceLimitError
/// above dense_limit.
SpectrumReport full_spectrum(const SuperOperator& L, Eigen::Index dense_limit = kDenseLimit);

/// eta such that the multiset {Re lambda} is symmetric about -eta (taken as
/// half the most negative real part), or nullopt if any eigenvalue lacks a
/// partner. Imaginary parts must match too, up to conjugation.
std::optional<double> detect_pt(std::span<const cplx> eigenvalues, double tol = kMirrorTol);

/// |Re lambda_1| from the dense spectrum.
double direct_gap(const SuperOperator& L, Eigen::Index dense_limit = kDenseLimit);

// ---- iterative eigensolver --------------------------------------------------

/// y = A x on contiguous vectors of length dim.
struct LinearOperator {
  Eigen::Index dim = 0;
  std::function<void(const cplx* x, cplx* y)> apply;
};

/// Wraps an assembled superoperator (sparse product through the kernels).
LinearOperator as_operator(const SuperOperator& L);

/// Matrix-free product-basis Liouvillian acting on column-stacked 2^N x 2^N
/// operators; same action as build_full_liouvillian without storing it.
LinearOperator full_liouvillian_operator(const ModelParams& params, const Probe& probe = {});

/// A + shift * identity.
LinearOperator shifted(LinearOperator op, cplx shift);

struct ArnoldiOptions {
  int nev = 6;     // wanted eigenvalues (largest real part)
  int ncv = 30;    // subspace size
  double tol = 1e-11;
  int max_restarts = 20000;
  std::uint64_t seed = 0x5eed1234abcdULL;
};

struct ArnoldiResult {
  std::vector<cplx> values;      // descending real part
  std::vector<double> residuals; // ||A x - theta x|| for unit Ritz vectors
  int converged = 0;
  int restarts = 0;
  long matvecs = 0;
};

/// Krylov-Schur iteration for the nev eigenvalues of largest real part.
/// Returns the best available Ritz values even when not all converged
/// (check `converged`).
ArnoldiResult eigs_largest_real(const LinearOperator& op, const ArnoldiOptions& opts = {});

struct AntigapResult {
  double gap = 0.0;
  cplx top;     // eigenvalue of L + 2 eta identified with the steady state
  cplx second;  // next eigenvalue by real part
  ArnoldiResult arnoldi;
};

/// Gap from the k largest-real-part eigenvalues of L' = L + 2 eta: the
/// leading one must equal 2 eta (the mirror of the steady state), and
/// gap = |Re lambda'_second - 2 eta|. Throws SolverError if 2 eta is not
/// among the computed eigenvalues or the iteration does not converge.
AntigapResult gap_via_antigap(const LinearOperator& L, double eta, const ArnoldiOptions& opts = {});

/// -Re lambda_M, the fastest decay rate, from the largest-real-part
/// eigenvalue of -L. Half of it is the mirror axis eta when one exists.
double max_damping(const LinearOperator& L, const ArnoldiOptions& opts = {});
double gap_via_antigap(const SuperOperator& L, double eta, int k = 6);

}  // namespace pixyz
