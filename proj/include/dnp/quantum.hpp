// quantum.hpp — spin operators, Hamiltonians, propagators, thermal states and
// basis machinery for a hyperfine-coupled electron-nucleus pair.
//
// Conventions used throughout the library:
//   * tensor order is electron (x) nucleus, so S_a = (sigma_a/2) (x) 1 and
//     I_a = 1 (x) (sigma_a/2);
//   * all frequencies in configuration and parameter structs are plain Hz,
//     the 2*pi only appears inside Hamiltonian builders;
//   * vectorization elsewhere in the library is column-stacking.

#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>

namespace dnp {

using complexd = std::complex<double>;
using Matrix2c = Eigen::Matrix2cd;
using Matrix4c = Eigen::Matrix4cd;
using MatrixXc = Eigen::MatrixXcd;
using Vector2c = Eigen::Vector2cd;

namespace phys {
inline constexpr double planck_h = 6.62607015e-34;   // J s
inline constexpr double boltzmann_k = 1.380649e-23;  // J / K
inline constexpr double two_pi = 6.28318530717958647692528676655900577;
}  // namespace phys

// Static parameters of the two-spin system.  omega_S and omega_I are the
// electron and nuclear Larmor frequencies, A and B the isotropic and
// anisotropic hyperfine couplings.
struct SpinSystemParams {
  double omega_S = 9.59e9;     // Hz
  double omega_I = 14.57e6;    // Hz
  double A = -42.7e6;          // Hz
  double B = 14.7e6;           // Hz
  double temperature = 293.0;  // K

  // Throws std::invalid_argument on non-finite or non-positive entries.
  // The high-field secular regime (omega_S >> omega_I) is assumed; a ratio
  // below 100 emits a warning on stderr.
  void validate() const;
};

struct SpinOperators {
  Matrix2c sx, sy, sz, id2;         // single spin-1/2 operators
  Matrix4c Sx, Sy, Sz, Ix, Iy, Iz;  // embedded two-spin operators
};

// Spin-1/2 operators with the electron as the first tensor factor.
const SpinOperators& spin_operators();

enum class HamiltonianFrame { Lab, ElectronRotating };

// H = 2*pi*(omega_S S_z + omega_I I_z + A S_z I_z + B S_z I_x); the
// electron-rotating frame drops the omega_S term.  Units: rad/s.
Matrix4c drift_hamiltonian(const SpinSystemParams& sys,
                           HamiltonianFrame frame = HamiltonianFrame::ElectronRotating);

enum class ControlKind { Overhauser, SolidEffect };

// Overhauser drive: 2*pi*omega_d S_x (x) 1 (on the electron transitions).
// Solid-effect drive: 2*pi*omega_d (S_x I_x + S_y I_y) (zero-quantum).
Matrix4c control_hamiltonian(ControlKind kind, double omega_d);

// U = exp(-i H dt) computed through the Hermitian eigendecomposition.
MatrixXc propagator(const MatrixXc& hamiltonian, double dt);

// Gibbs state of the two-spin Zeeman problem with the physical relative sign
// of the two magnetic moments (the electron moment is anti-parallel to its
// spin, the proton moment parallel).  Electron polarization <2Sz> comes out
// -tanh(h nu_S / 2 k T), nuclear polarization <2Iz> is +tanh(h nu_I / 2 k T).
Matrix4c thermal_state(const SpinSystemParams& sys);

// Thermal single-spin states at the respective Larmor frequencies.
Matrix2c thermal_electron_state(const SpinSystemParams& sys);
Matrix2c thermal_nuclear_state(const SpinSystemParams& sys);

enum class Subsystem { Electron, Nucleus };

Matrix2c partial_trace(const Matrix4c& rho, Subsystem keep);

// Coefficients of a 4x4 operator over the unnormalized Pauli basis
// {1,X,Y,Z} (x) {1,X,Y,Z}: c_ab = Tr((sigma_a (x) sigma_b)^dag op) / 4.
// Index = 4*a + b with a the electron letter.  A trace-one state has
// c_II = 0.25.
using PauliCoefficients = Eigen::Matrix<complexd, 16, 1>;
PauliCoefficients pauli_decompose(const Matrix4c& op);
Matrix4c pauli_reconstruct(const PauliCoefficients& c);
const std::array<std::string, 16>& pauli_labels();

// Eigendecomposition with a reproducible convention: eigenvalues ascending,
// ties broken lexicographically on the (phase-fixed) eigenvector entries,
// and each eigenvector scaled so its largest-magnitude entry is real
// positive.
struct Eigenframe {
  MatrixXc vectors;              // columns
  Eigen::VectorXd values;
};
Eigenframe eigenframe(const MatrixXc& hamiltonian, double hermiticity_tol = 1e-10);

// Labeled eigenbasis of the drift Hamiltonian.  Columns of `basis` are the
// canonical order [up_a, up_b, dn_a, dn_b]: up/dn is the electron manifold,
// and the a/b nuclear labels pair states of maximal nuclear overlap across
// manifolds, so that (0,2) and (1,3) are the electron-only transitions.
// zq/dq are the flip-flop and flip-flip cross pairs, told apart by their
// lab-frame gap (zero-quantum is the smaller one).
struct DriftFrame {
  Matrix4c basis;
  Eigen::Vector4d energy;        // lab-frame eigenvalues, rad/s
  std::pair<int, int> zq;        // (upper manifold index, lower manifold index)
  std::pair<int, int> dq;
};
DriftFrame drift_frame(const SpinSystemParams& sys);

// Helpers shared by tests and modules.
bool is_hermitian(const MatrixXc& m, double tol);
bool is_unitary(const MatrixXc& m, double tol);
Matrix2c rho_from_bloch(double x, double y, double z);

}  // namespace dnp
