// Shared helpers for the test suites: seeded random states, Hermitian
// matrices and CPTP channels, plus norm shorthands.

#pragma once

#include "dnp/channel.hpp"

#include <random>

namespace dnp::testing {

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline MatrixXc random_complex(Eigen::Index rows, Eigen::Index cols,
                               std::mt19937_64& gen) {
  std::normal_distribution<double> n(0.0, 1.0);
  MatrixXc m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = complexd(n(gen), n(gen));
  return m;
}

inline MatrixXc random_hermitian(Eigen::Index d, std::mt19937_64& gen) {
  const MatrixXc g = random_complex(d, d, gen);
  return (g + g.adjoint()) / 2.0;
}

inline MatrixXc random_state(Eigen::Index d, std::mt19937_64& gen) {
  const MatrixXc g = random_complex(d, d, gen);
  const MatrixXc rho = g * g.adjoint();
  return rho / rho.trace().real();
}

inline MatrixXc random_unitary(Eigen::Index d, std::mt19937_64& gen) {
  const MatrixXc g = random_complex(d, d, gen);
  Eigen::HouseholderQR<MatrixXc> qr(g);
  MatrixXc q = qr.householderQ();
  const MatrixXc rdiag = qr.matrixQR().diagonal().asDiagonal();
  for (Eigen::Index k = 0; k < d; ++k) {
    const complexd r = qr.matrixQR()(k, k);
    q.col(k) *= (std::abs(r) > 0 ? r / std::abs(r) : complexd(1.0));
  }
  return q;
}

// Random CPTP channel with n_kraus operators via a Stinespring block column.
inline KrausSet random_channel(Eigen::Index d, int n_kraus, std::mt19937_64& gen) {
  const MatrixXc g = random_complex(d * n_kraus, d, gen);
  Eigen::HouseholderQR<MatrixXc> qr(g);
  const MatrixXc q = MatrixXc(qr.householderQ()).leftCols(d);
  KrausSet k;
  for (int i = 0; i < n_kraus; ++i) k.ops.push_back(q.block(i * d, 0, d, d));
  return k;
}

inline double diff(const MatrixXc& a, const MatrixXc& b) { return (a - b).norm(); }

}  // namespace dnp::testing
