#pragma once

#include <Eigen/Dense>
#include <random>

#include "pixyz/dicke.hpp"

namespace pixyz::test {

inline std::mt19937_64& rng() {
  static std::mt19937_64 gen(20240611);
  return gen;
}

inline double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }

/// Random density matrix in stored block form (PSD blocks, unit total trace).
inline DickeBlockMatrix random_density(int N) {
  DickeBlockMatrix rho(shared_layout(N));
  double total = 0.0;
  for (std::size_t b = 0; b < rho.num_blocks(); ++b) {
    const int d = rho.layout().blocks[b].dim;
    Eigen::MatrixXcd a(d, d);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) a(r, c) = {uniform(-1, 1), uniform(-1, 1)};
    const Eigen::MatrixXcd p = a * a.adjoint();
    rho.block(b) = p;
    total += p.trace().real();
  }
  rho *= 1.0 / total;
  return rho;
}

/// Random Hermitian (not necessarily positive) block operator.
inline DickeBlockMatrix random_hermitian(int N) {
  DickeBlockMatrix m(shared_layout(N));
  for (std::size_t b = 0; b < m.num_blocks(); ++b) {
    const int d = m.layout().blocks[b].dim;
    Eigen::MatrixXcd a(d, d);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) a(r, c) = {uniform(-1, 1), uniform(-1, 1)};
    m.block(b) = 0.5 * (a + a.adjoint());
  }
  return m;
}

}  // namespace pixyz::test
