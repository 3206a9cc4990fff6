// channel.hpp — CPTP channel algebra: Kraus sets, supermatrices (column
// stacking), Choi matrices, conversions between the three, reduced maps,
// fixed points and gate fidelity.

#pragma once

#include "dnp/quantum.hpp"

#include <iosfwd>
#include <vector>

namespace dnp {

// Operator-sum representation; all operators square with a common dimension.
struct KrausSet {
  std::vector<MatrixXc> ops;

  Eigen::Index dim() const { return ops.empty() ? 0 : ops.front().rows(); }
  static KrausSet identity(Eigen::Index d);
};

// d^2 x d^2 matrix acting on column-stacked density matrices.
struct SuperMatrix {
  MatrixXc m;
  Eigen::Index dim() const;
};

struct ChoiMatrix {
  MatrixXc m;
  Eigen::Index dim() const;
};

Eigen::VectorXcd vec(const MatrixXc& m);
MatrixXc unvec(const Eigen::VectorXcd& v, Eigen::Index d);

// rho' = sum_k M_k rho M_k^dag
MatrixXc apply(const KrausSet& k, const MatrixXc& rho);
MatrixXc apply(const SuperMatrix& s, const MatrixXc& rho);
MatrixXc apply_choi(const ChoiMatrix& c, const MatrixXc& rho);

// outer after inner: all pairwise products A_k B_l.
KrausSet compose(const KrausSet& outer, const KrausSet& inner);

SuperMatrix kraus_to_super(const KrausSet& k);
ChoiMatrix super_to_choi(const SuperMatrix& s);   // index reshuffle, involutive
SuperMatrix choi_to_super(const ChoiMatrix& c);
ChoiMatrix kraus_to_choi(const KrausSet& k);

// Eigendecomposes the Choi matrix and keeps eigenpairs above rank_tol
// (default 1e-10 times the largest eigenvalue).  Eigenvalues below the
// negative of the same threshold signal a non-CP input and throw.
KrausSet choi_to_kraus(const ChoiMatrix& c, double rank_tol = -1.0);

// Minimal Kraus set of the same map, via the Choi route.
KrausSet minimal_kraus(const KrausSet& k);

// Reduced nuclear map S_n(rho_n) = Tr_E[ S (rho_E (x) rho_n) ] of a map on
// the 4-level space, evaluated on nuclear basis inputs.
SuperMatrix reduce_to_nuclear(const SuperMatrix& s, const Matrix2c& rho_electron);

SuperMatrix super_power(const SuperMatrix& s, long long n);

// Eigenvector of the supermatrix with eigenvalue nearest 1, Hermitized and
// trace-normalized.  Throws FixedPointDegenerate when several eigenvalues
// lie within degeneracy_tol of 1.
class FixedPointDegenerate : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
MatrixXc fixed_point(const SuperMatrix& s, double degeneracy_tol = 1e-9);

// F = sum_k |Tr(U^dag M_k)|^2 / d^2, so that F(U, {U}) = 1.
double gate_fidelity(const MatrixXc& u, const KrausSet& k);

// Normalized overlap of two maps' Choi matrices; equals gate_fidelity for a
// pair of unitaries and is 1 exactly for identical maps.
double channel_overlap(const SuperMatrix& a, const SuperMatrix& b);

struct CptpReport {
  double kraus_deviation;    // || sum M^dag M - 1 ||_2
  double min_choi_eigenvalue;
  bool passes(double tol) const {
    return kraus_deviation <= tol && min_choi_eigenvalue >= -tol;
  }
};
CptpReport validate_cptp(const KrausSet& k);
CptpReport validate_cptp(const ChoiMatrix& c);

bool is_valid_state(const MatrixXc& rho, double tol = 1e-9);

// Plain-text numeric dump, row-major "re,im" pairs, one row per line.
void dump_matrix(std::ostream& os, const MatrixXc& m);

}  // namespace dnp
