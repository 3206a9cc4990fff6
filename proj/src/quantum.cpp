#include "dnp/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <vector>

namespace dnp {

namespace {

constexpr complexd kI{0.0, 1.0};

Matrix2c pauli_x() {
  Matrix2c m;
  m << 0, 1, 1, 0;
  return m;
}

Matrix2c pauli_y() {
  Matrix2c m;
  m << 0, -kI, kI, 0;
  return m;
}

Matrix2c pauli_z() {
  Matrix2c m;
  m << 1, 0, 0, -1;
  return m;
}

Matrix4c kron2(const Matrix2c& a, const Matrix2c& b) {
  Matrix4c out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

void require_finite(double v, const char* name) {
  if (!std::isfinite(v))
    throw std::invalid_argument(std::string(name) + " must be finite");
}

}  // namespace

void SpinSystemParams::validate() const {
  require_finite(omega_S, "omega_S");
  require_finite(omega_I, "omega_I");
  require_finite(A, "A");
  require_finite(B, "B");
  require_finite(temperature, "temperature");
  if (omega_S <= 0) throw std::invalid_argument("omega_S must be positive");
  if (omega_I <= 0) throw std::invalid_argument("omega_I must be positive");
  if (temperature <= 0) throw std::invalid_argument("temperature must be positive");
  if (omega_S / omega_I < 100.0) {
    static bool warned = false;
    if (!warned) {
      std::cerr << "warning: omega_S/omega_I = " << omega_S / omega_I
                << " is below the secular regime (>= 100 expected)\n";
      warned = true;
    }
  }
}

const SpinOperators& spin_operators() {
  static const SpinOperators ops = [] {
    SpinOperators o;
    o.sx = 0.5 * pauli_x();
    o.sy = 0.5 * pauli_y();
    o.sz = 0.5 * pauli_z();
    o.id2 = Matrix2c::Identity();
    o.Sx = kron2(o.sx, o.id2);
    o.Sy = kron2(o.sy, o.id2);
    o.Sz = kron2(o.sz, o.id2);
    o.Ix = kron2(o.id2, o.sx);
    o.Iy = kron2(o.id2, o.sy);
    o.Iz = kron2(o.id2, o.sz);
    return o;
  }();
  return ops;
}

Matrix4c drift_hamiltonian(const SpinSystemParams& sys, HamiltonianFrame frame) {
  sys.validate();
  const auto& op = spin_operators();
  Matrix4c h = sys.omega_I * op.Iz + sys.A * op.Sz * op.Iz + sys.B * op.Sz * op.Ix;
  if (frame == HamiltonianFrame::Lab) h += sys.omega_S * op.Sz;
  return phys::two_pi * h;
}

Matrix4c control_hamiltonian(ControlKind kind, double omega_d) {
  if (!std::isfinite(omega_d) || omega_d < 0)
    throw std::invalid_argument("omega_d must be finite and >= 0");
  const auto& op = spin_operators();
  switch (kind) {
    case ControlKind::Overhauser:
      return phys::two_pi * omega_d * op.Sx;
    case ControlKind::SolidEffect:
      return phys::two_pi * omega_d * (op.Sx * op.Ix + op.Sy * op.Iy);
  }
  throw std::invalid_argument("unknown control kind");
}

MatrixXc propagator(const MatrixXc& hamiltonian, double dt) {
  if (!std::isfinite(dt)) throw std::invalid_argument("dt must be finite");
  if (dt < 0) throw std::invalid_argument("dt must be >= 0");
  if (!is_hermitian(hamiltonian, 1e-8 * std::max(1.0, hamiltonian.norm())))
    throw std::invalid_argument("propagator requires a Hermitian generator");
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(hamiltonian);
  const Eigen::VectorXd& lam = es.eigenvalues();
  Eigen::VectorXcd phase(lam.size());
  for (Eigen::Index k = 0; k < lam.size(); ++k)
    phase(k) = std::exp(-kI * lam(k) * dt);
  return es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
}

namespace {

// Populations of a two-level Zeeman splitting at frequency f (Hz): returns
// the upper-level weight exp(-x)/(2 cosh x), x = h f / (2 k T).
double upper_weight(double f, double temperature) {
  const double x = phys::planck_h * f / (2.0 * phys::boltzmann_k * temperature);
  return std::exp(-x) / (2.0 * std::cosh(x));
}

}  // namespace

Matrix4c thermal_state(const SpinSystemParams& sys) {
  sys.validate();
  return kron2(thermal_electron_state(sys), thermal_nuclear_state(sys));
}

Matrix2c thermal_electron_state(const SpinSystemParams& sys) {
  const double p = upper_weight(sys.omega_S, sys.temperature);
  Matrix2c rho = Matrix2c::Zero();
  rho(0, 0) = p;          // |up> is the high-energy electron level
  rho(1, 1) = 1.0 - p;
  return rho;
}

Matrix2c thermal_nuclear_state(const SpinSystemParams& sys) {
  const double p = upper_weight(sys.omega_I, sys.temperature);
  Matrix2c rho = Matrix2c::Zero();
  rho(0, 0) = 1.0 - p;    // proton moment is parallel to spin: |alpha> is low
  rho(1, 1) = p;
  return rho;
}

Matrix2c partial_trace(const Matrix4c& rho, Subsystem keep) {
  Matrix2c out = Matrix2c::Zero();
  if (keep == Subsystem::Electron) {
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        out(i, j) = rho(2 * i, 2 * j) + rho(2 * i + 1, 2 * j + 1);
  } else {
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        out(i, j) = rho(i, j) + rho(i + 2, j + 2);
  }
  return out;
}

namespace {

const std::array<Matrix2c, 4>& pauli_basis() {
  static const std::array<Matrix2c, 4> basis = {Matrix2c::Identity(), pauli_x(),
                                                pauli_y(), pauli_z()};
  return basis;
}

}  // namespace

PauliCoefficients pauli_decompose(const Matrix4c& op) {
  const auto& sigma = pauli_basis();
  PauliCoefficients c;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      c(4 * a + b) = (kron2(sigma[a], sigma[b]).adjoint() * op).trace() / 4.0;
  return c;
}

Matrix4c pauli_reconstruct(const PauliCoefficients& c) {
  const auto& sigma = pauli_basis();
  Matrix4c op = Matrix4c::Zero();
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      op += c(4 * a + b) * kron2(sigma[a], sigma[b]);
  return op;
}

const std::array<std::string, 16>& pauli_labels() {
  static const std::array<std::string, 16> labels = [] {
    const char letters[] = {'I', 'X', 'Y', 'Z'};
    std::array<std::string, 16> l;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        l[4 * a + b] = std::string{letters[a], letters[b]};
    return l;
  }();
  return labels;
}

namespace {

// Scale each column so that its largest-magnitude entry is real positive.
void fix_phases(MatrixXc& v) {
  for (Eigen::Index c = 0; c < v.cols(); ++c) {
    Eigen::Index imax = 0;
    double best = -1.0;
    for (Eigen::Index r = 0; r < v.rows(); ++r) {
      const double mag = std::abs(v(r, c));
      if (mag > best + 1e-15) {
        best = mag;
        imax = r;
      }
    }
    if (best > 0) v.col(c) *= std::conj(v(imax, c)) / std::abs(v(imax, c));
  }
}

bool lex_less(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i).real() != b(i).real()) return a(i).real() < b(i).real();
    if (a(i).imag() != b(i).imag()) return a(i).imag() < b(i).imag();
  }
  return false;
}

}  // namespace

Eigenframe eigenframe(const MatrixXc& hamiltonian, double hermiticity_tol) {
  const double scale = std::max(1.0, hamiltonian.norm());
  if (!is_hermitian(hamiltonian, hermiticity_tol * scale))
    throw std::invalid_argument("eigenframe requires a Hermitian matrix");
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(hamiltonian);
  Eigenframe f{es.eigenvectors(), es.eigenvalues()};
  fix_phases(f.vectors);

  // Stable tie-break inside (numerically) degenerate groups.
  const double degeneracy = 1e-12 * std::max(1.0, f.values.cwiseAbs().maxCoeff());
  std::vector<Eigen::Index> order(static_cast<std::size_t>(f.values.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (std::abs(f.values(a) - f.values(b)) > degeneracy) return f.values(a) < f.values(b);
    return lex_less(f.vectors.col(a), f.vectors.col(b));
  });
  MatrixXc v(f.vectors.rows(), f.vectors.cols());
  Eigen::VectorXd lam(f.values.size());
  for (Eigen::Index k = 0; k < f.values.size(); ++k) {
    v.col(k) = f.vectors.col(order[static_cast<std::size_t>(k)]);
    lam(k) = f.values(order[static_cast<std::size_t>(k)]);
  }
  return {std::move(v), std::move(lam)};
}

DriftFrame drift_frame(const SpinSystemParams& sys) {
  const Matrix4c h_lab = drift_hamiltonian(sys, HamiltonianFrame::Lab);
  Eigenframe ef = eigenframe(h_lab);

  const auto& op = spin_operators();
  std::vector<int> up, dn;
  for (int k = 0; k < 4; ++k) {
    const Eigen::Vector4cd v = ef.vectors.col(k);
    const double sz = (v.adjoint() * op.Sz * v)(0).real();
    (sz > 0 ? up : dn).push_back(k);  // exact +-1/2 under the secular H
  }
  if (up.size() != 2 || dn.size() != 2)
    throw std::runtime_error("drift_frame: electron manifolds did not separate");

  // Ascending order inside each manifold.
  auto by_energy = [&](int a, int b) { return ef.values(a) < ef.values(b); };
  std::sort(up.begin(), up.end(), by_energy);
  std::sort(dn.begin(), dn.end(), by_energy);

  // Nuclear overlap across manifolds: |<n_up,i | n_dn,j>| = 2 |<u_i| Sx(x)1 |d_j>|.
  auto overlap = [&](int a, int b) {
    return std::abs((ef.vectors.col(a).adjoint() * (2.0 * op.Sx) * ef.vectors.col(b))(0));
  };
  const bool straight = overlap(up[0], dn[0]) + overlap(up[1], dn[1]) >=
                        overlap(up[0], dn[1]) + overlap(up[1], dn[0]);
  const int dn_a = straight ? dn[0] : dn[1];
  const int dn_b = straight ? dn[1] : dn[0];

  DriftFrame frame;
  const std::array<int, 4> cols = {up[0], up[1], dn_a, dn_b};
  for (int k = 0; k < 4; ++k) {
    frame.basis.col(k) = ef.vectors.col(cols[static_cast<std::size_t>(k)]);
    frame.energy(k) = ef.values(cols[static_cast<std::size_t>(k)]);
  }
  // Cross pairs (up_b, dn_a) and (up_a, dn_b); the zero-quantum transition is
  // the one with the smaller lab-frame gap.
  const double gap_ba = std::abs(frame.energy(1) - frame.energy(2));
  const double gap_ab = std::abs(frame.energy(0) - frame.energy(3));
  if (gap_ba <= gap_ab) {
    frame.zq = {1, 2};
    frame.dq = {0, 3};
  } else {
    frame.zq = {0, 3};
    frame.dq = {1, 2};
  }
  return frame;
}

bool is_hermitian(const MatrixXc& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).norm() <= tol;
}

bool is_unitary(const MatrixXc& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m.adjoint() * m - MatrixXc::Identity(m.rows(), m.cols())).norm() <= tol;
}

Matrix2c rho_from_bloch(double x, double y, double z) {
  Matrix2c rho;
  rho << 1.0 + z, complexd(x, -y), complexd(x, y), 1.0 - z;
  return 0.5 * rho;
}

}  // namespace dnp
