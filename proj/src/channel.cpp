#include "dnp/channel.hpp"

#include <cmath>
#include <complex>
#include <ostream>
#include <sstream>

namespace dnp {

namespace {

Eigen::Index isqrt_dim(Eigen::Index n, const char* what) {
  const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(double(n))));
  if (d * d != n) throw std::invalid_argument(std::string(what) + ": not a d^2 matrix");
  return d;
}

void require_square(const MatrixXc& m, const char* what) {
  if (m.rows() != m.cols()) throw std::invalid_argument(std::string(what) + ": not square");
}

}  // namespace

KrausSet KrausSet::identity(Eigen::Index d) {
  return KrausSet{{MatrixXc::Identity(d, d)}};
}

Eigen::Index SuperMatrix::dim() const { return isqrt_dim(m.rows(), "SuperMatrix"); }
Eigen::Index ChoiMatrix::dim() const { return isqrt_dim(m.rows(), "ChoiMatrix"); }

Eigen::VectorXcd vec(const MatrixXc& m) {
  return Eigen::Map<const Eigen::VectorXcd>(m.data(), m.size());
}

MatrixXc unvec(const Eigen::VectorXcd& v, Eigen::Index d) {
  if (v.size() != d * d) throw std::invalid_argument("unvec: size mismatch");
  return Eigen::Map<const MatrixXc>(v.data(), d, d);
}

MatrixXc apply(const KrausSet& k, const MatrixXc& rho) {
  require_square(rho, "apply");
  if (k.ops.empty() || rho.rows() != k.dim())
    throw std::invalid_argument("apply: dimension mismatch");
  MatrixXc out = MatrixXc::Zero(rho.rows(), rho.cols());
  for (const auto& m : k.ops) out += m * rho * m.adjoint();
  return out;
}

MatrixXc apply(const SuperMatrix& s, const MatrixXc& rho) {
  const Eigen::Index d = s.dim();
  if (rho.rows() != d || rho.cols() != d)
    throw std::invalid_argument("apply(super): dimension mismatch");
  return unvec(s.m * vec(rho), d);
}

MatrixXc apply_choi(const ChoiMatrix& c, const MatrixXc& rho) {
  // Lambda(rho)_{ij} = sum_{kl} C[(k,i),(l,j)] rho_{kl}
  const Eigen::Index d = c.dim();
  if (rho.rows() != d || rho.cols() != d)
    throw std::invalid_argument("apply(choi): dimension mismatch");
  MatrixXc out = MatrixXc::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) {
      complexd acc = 0;
      for (Eigen::Index k = 0; k < d; ++k)
        for (Eigen::Index l = 0; l < d; ++l)
          acc += c.m(k * d + i, l * d + j) * rho(k, l);
      out(i, j) = acc;
    }
  return out;
}

KrausSet compose(const KrausSet& outer, const KrausSet& inner) {
  if (outer.dim() != inner.dim())
    throw std::invalid_argument("compose: dimension mismatch");
  KrausSet out;
  out.ops.reserve(outer.ops.size() * inner.ops.size());
  for (const auto& a : outer.ops)
    for (const auto& b : inner.ops) out.ops.push_back(a * b);
  return out;
}

SuperMatrix kraus_to_super(const KrausSet& k) {
  const Eigen::Index d = k.dim();
  MatrixXc s = MatrixXc::Zero(d * d, d * d);
  for (const auto& m : k.ops) {
    // vec(M rho M^dag) = (conj(M) (x) M) vec(rho) under column stacking
    const MatrixXc mc = m.conjugate();
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j)
        s.block(i * d, j * d, d, d) += mc(i, j) * m;
  }
  return SuperMatrix{std::move(s)};
}

ChoiMatrix super_to_choi(const SuperMatrix& s) {
  const Eigen::Index d = s.dim();
  MatrixXc c(d * d, d * d);
  // C[(k,i),(l,j)] = S[(i,j),(k,l)]; both sides column-stacked pairs.
  for (Eigen::Index k = 0; k < d; ++k)
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index l = 0; l < d; ++l)
        for (Eigen::Index j = 0; j < d; ++j)
          c(k * d + i, l * d + j) = s.m(i + d * j, k + d * l);
  return ChoiMatrix{std::move(c)};
}

SuperMatrix choi_to_super(const ChoiMatrix& c) {
  const Eigen::Index d = c.dim();
  MatrixXc s(d * d, d * d);
  for (Eigen::Index k = 0; k < d; ++k)
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index l = 0; l < d; ++l)
        for (Eigen::Index j = 0; j < d; ++j)
          s(i + d * j, k + d * l) = c.m(k * d + i, l * d + j);
  return SuperMatrix{std::move(s)};
}

ChoiMatrix kraus_to_choi(const KrausSet& k) { return super_to_choi(kraus_to_super(k)); }

KrausSet choi_to_kraus(const ChoiMatrix& c, double rank_tol) {
  const Eigen::Index d = c.dim();
  const double scale = std::max(1.0, c.m.norm());
  if (!is_hermitian(c.m, 1e-8 * scale))
    throw std::invalid_argument("choi_to_kraus: Choi matrix not Hermitian");
  Eigen::SelfAdjointEigenSolver<MatrixXc> es((c.m + c.m.adjoint()) / 2.0);
  const double lam_max = std::max(0.0, es.eigenvalues().maxCoeff());
  const double tol = rank_tol > 0 ? rank_tol : 1e-10 * std::max(lam_max, 1e-300);
  KrausSet out;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    const double lam = es.eigenvalues()(k);
    if (lam < -std::max(tol, 1e-9 * std::max(1.0, lam_max))) {
      std::ostringstream msg;
      msg << "choi_to_kraus: negative Choi eigenvalue " << lam << " (non-CP map)";
      throw std::invalid_argument(msg.str());
    }
    if (lam > tol)
      out.ops.push_back(std::sqrt(lam) * unvec(es.eigenvectors().col(k), d));
  }
  if (out.ops.empty()) out.ops.push_back(MatrixXc::Zero(d, d));
  return out;
}

KrausSet minimal_kraus(const KrausSet& k) { return choi_to_kraus(kraus_to_choi(k)); }

SuperMatrix reduce_to_nuclear(const SuperMatrix& s, const Matrix2c& rho_electron) {
  if (s.dim() != 4) throw std::invalid_argument("reduce_to_nuclear: 16x16 map expected");
  if (std::abs(rho_electron.trace().real() - 1.0) > 1e-9)
    throw std::invalid_argument("reduce_to_nuclear: electron state must have trace 1");
  MatrixXc out(4, 4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      Matrix2c e_ij = Matrix2c::Zero();
      e_ij(i, j) = 1.0;
      Matrix4c in = Matrix4c::Zero();
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          in.block<2, 2>(2 * a, 2 * b) = rho_electron(a, b) * e_ij;
      const Matrix4c mapped = dnp::apply(s, in);
      const Matrix2c red = partial_trace(mapped, Subsystem::Nucleus);
      out.col(i + 2 * j) = vec(red);
    }
  return SuperMatrix{std::move(out)};
}

SuperMatrix super_power(const SuperMatrix& s, long long n) {
  if (n < 0) throw std::invalid_argument("super_power: n must be >= 0");
  MatrixXc acc = MatrixXc::Identity(s.m.rows(), s.m.cols());
  MatrixXc base = s.m;
  long long k = n;
  while (k > 0) {
    if (k & 1) acc = acc * base;
    base = base * base;
    k >>= 1;
  }
  return SuperMatrix{std::move(acc)};
}

MatrixXc fixed_point(const SuperMatrix& s, double degeneracy_tol) {
  const Eigen::Index d = s.dim();
  Eigen::ComplexEigenSolver<MatrixXc> es(s.m);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("fixed_point: eigendecomposition failed");
  Eigen::Index best = 0;
  double best_dist = std::numeric_limits<double>::max();
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    const double dist = std::abs(es.eigenvalues()(k) - 1.0);
    if (dist < best_dist) {
      best_dist = dist;
      best = k;
    }
  }
  std::vector<Eigen::Index> near_one;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k)
    if (std::abs(es.eigenvalues()(k) - 1.0) <= degeneracy_tol) near_one.push_back(k);
  if (near_one.size() > 1) {
    std::ostringstream msg;
    msg << "fixed_point: eigenvalue-1 subspace is degenerate; candidates:";
    for (auto k : near_one) msg << " " << es.eigenvalues()(k);
    throw FixedPointDegenerate(msg.str());
  }
  const MatrixXc raw = unvec(es.eigenvectors().col(best), d);
  MatrixXc rho = (raw + raw.adjoint()) / 2.0;
  const double tr = rho.trace().real();
  if (std::abs(tr) < 1e-14)
    throw std::runtime_error("fixed_point: traceless fixed point");
  return rho / tr;
}

double gate_fidelity(const MatrixXc& u, const KrausSet& k) {
  require_square(u, "gate_fidelity");
  if (u.rows() != k.dim()) throw std::invalid_argument("gate_fidelity: dimension mismatch");
  if (!is_unitary(u, 1e-8 * std::sqrt(double(u.rows()))))
    throw std::invalid_argument("gate_fidelity: u is not unitary");
  const double d = static_cast<double>(u.rows());
  double f = 0.0;
  for (const auto& m : k.ops) f += std::norm((u.adjoint() * m).trace());
  return f / (d * d);
}

double channel_overlap(const SuperMatrix& a, const SuperMatrix& b) {
  const MatrixXc ca = super_to_choi(a).m;
  const MatrixXc cb = super_to_choi(b).m;
  const double na = ca.norm();
  const double nb = cb.norm();
  if (na == 0.0 || nb == 0.0) throw std::invalid_argument("channel_overlap: zero map");
  return ((ca.adjoint() * cb).trace().real()) / (na * nb);
}

namespace {

double spectral_deviation_from_identity(const MatrixXc& m) {
  Eigen::SelfAdjointEigenSolver<MatrixXc> es((m + m.adjoint()) / 2.0);
  double dev = 0.0;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k)
    dev = std::max(dev, std::abs(es.eigenvalues()(k) - 1.0));
  return dev;
}

}  // namespace

CptpReport validate_cptp(const KrausSet& k) {
  const Eigen::Index d = k.dim();
  MatrixXc sum = MatrixXc::Zero(d, d);
  for (const auto& m : k.ops) sum += m.adjoint() * m;
  Eigen::SelfAdjointEigenSolver<MatrixXc> es((kraus_to_choi(k).m));
  return CptpReport{spectral_deviation_from_identity(sum), es.eigenvalues().minCoeff()};
}

CptpReport validate_cptp(const ChoiMatrix& c) {
  const Eigen::Index d = c.dim();
  // Trace preservation: Tr_out(C) = sum_i C[(k,i),(l,i)] must equal identity.
  MatrixXc tr_out = MatrixXc::Zero(d, d);
  for (Eigen::Index kk = 0; kk < d; ++kk)
    for (Eigen::Index l = 0; l < d; ++l)
      for (Eigen::Index i = 0; i < d; ++i) tr_out(kk, l) += c.m(kk * d + i, l * d + i);
  Eigen::SelfAdjointEigenSolver<MatrixXc> es((c.m + c.m.adjoint()) / 2.0);
  return CptpReport{spectral_deviation_from_identity(tr_out), es.eigenvalues().minCoeff()};
}

bool is_valid_state(const MatrixXc& rho, double tol) {
  if (rho.rows() != rho.cols()) return false;
  if (std::abs(rho.trace().real() - 1.0) > std::max(tol, 1e-10)) return false;
  if (std::abs(rho.trace().imag()) > std::max(tol, 1e-10)) return false;
  if (!is_hermitian(rho, std::max(tol, 1e-12) * std::max(1.0, rho.norm()))) return false;
  Eigen::SelfAdjointEigenSolver<MatrixXc> es((rho + rho.adjoint()) / 2.0);
  return es.eigenvalues().minCoeff() >= -std::max(tol, 1e-10);
}

void dump_matrix(std::ostream& os, const MatrixXc& m) {
  os.precision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) os << ' ';
      os << m(i, j).real() << ',' << m(i, j).imag();
    }
    os << '\n';
  }
}

}  // namespace dnp
