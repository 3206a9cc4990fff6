#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dnp/quantum.hpp"
#include "test_support.hpp"

#include <cmath>

using namespace dnp;
using dnp::testing::diff;

namespace {
const SpinSystemParams kDefault{};  // malonic-acid profile
constexpr complexd kI{0.0, 1.0};
}  // namespace

TEST_CASE("spin operator algebra") {
  const auto& op = spin_operators();
  CHECK((op.Sz * op.Sz).trace().real() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(diff(op.Sx * op.Sy - op.Sy * op.Sx, kI * op.Sz) < 1e-14);
  CHECK(diff(op.Ix * op.Iy - op.Iy * op.Ix, kI * op.Iz) < 1e-14);
  CHECK(diff(op.Sz * op.Ix, op.Ix * op.Sz) < 1e-15);  // disjoint factors commute
  // electron first: Sx couples |0n> and |1n>
  CHECK(op.Sx(0, 2) == complexd(0.5, 0.0));
  CHECK(op.Ix(0, 1) == complexd(0.5, 0.0));
}

TEST_CASE("drift Hamiltonian structure") {
  SUBCASE("Hermitian and frame relation") {
    const Matrix4c lab = drift_hamiltonian(kDefault, HamiltonianFrame::Lab);
    const Matrix4c rot = drift_hamiltonian(kDefault, HamiltonianFrame::ElectronRotating);
    CHECK(is_hermitian(lab, 1e-12 * lab.norm()));
    CHECK(diff(lab - rot, phys::two_pi * kDefault.omega_S * spin_operators().Sz) < 1e-3);
  }
  SUBCASE("B = 0 diagonal in the computational basis") {
    SpinSystemParams sys = kDefault;
    sys.B = 0.0;
    const Matrix4c h = drift_hamiltonian(sys, HamiltonianFrame::Lab);
    Matrix4c offdiag = h;
    offdiag.diagonal().setZero();
    CHECK(offdiag.norm() < 1e-6 * h.norm());
  }
  SUBCASE("uncoupled Zeeman ladder") {
    SpinSystemParams sys = kDefault;
    sys.A = sys.B = 0.0;
    const Eigenframe f = eigenframe(drift_hamiltonian(sys, HamiltonianFrame::Lab));
    const double ws = sys.omega_S, wi = sys.omega_I;
    std::vector<double> expected = {-(ws + wi) / 2, -(ws - wi) / 2, (ws - wi) / 2,
                                    (ws + wi) / 2};
    for (int k = 0; k < 4; ++k)
      CHECK(f.values(k) / phys::two_pi ==
            doctest::Approx(expected[static_cast<std::size_t>(k)]).epsilon(1e-12));
  }
  SUBCASE("manifold gaps match the two-level block closed form") {
    // Oracle: dense eigendecomposition against the 2x2 block diagonalization
    // of each electron manifold.
    const DriftFrame f = drift_frame(kDefault);
    const double gap_up = (f.energy(1) - f.energy(0)) / phys::two_pi;
    const double gap_dn = std::abs(f.energy(3) - f.energy(2)) / phys::two_pi;
    const double g_up = std::hypot(kDefault.omega_I + kDefault.A / 2, kDefault.B / 2);
    const double g_dn = std::hypot(kDefault.omega_I - kDefault.A / 2, kDefault.B / 2);
    CHECK(gap_up == doctest::Approx(g_up).epsilon(1e-12));
    CHECK(gap_dn == doctest::Approx(g_dn).epsilon(1e-12));
    CHECK(g_up == doctest::Approx(9.99954e6).epsilon(1e-4));
    CHECK(g_dn == doctest::Approx(36.6643e6).epsilon(1e-4));
  }
  SUBCASE("rejects non-finite parameters") {
    SpinSystemParams sys = kDefault;
    sys.A = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(drift_hamiltonian(sys), std::invalid_argument);
  }
}

TEST_CASE("control Hamiltonians") {
  SUBCASE("zero drive is the zero matrix") {
    CHECK(control_hamiltonian(ControlKind::Overhauser, 0.0).norm() == 0.0);
  }
  SUBCASE("solid-effect drive lives on the flip-flop block") {
    const Matrix4c h = control_hamiltonian(ControlKind::SolidEffect, 5e6);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        const bool zq = (i == 1 && j == 2) || (i == 2 && j == 1);
        if (!zq) CHECK(std::abs(h(i, j)) < 1e-6);
      }
    CHECK(std::abs(h(1, 2)) > 0.0);
  }
  SUBCASE("Overhauser drive norm") {
    const Matrix4c h = control_hamiltonian(ControlKind::Overhauser, 8e6);
    CHECK(h.norm() == doctest::Approx(phys::two_pi * 8e6).epsilon(1e-12));
  }
  CHECK_THROWS_AS(control_hamiltonian(ControlKind::Overhauser, -1.0),
                  std::invalid_argument);
}

TEST_CASE("eigenframe conventions") {
  SUBCASE("diagonal input with distinct entries") {
    Matrix4c h = Matrix4c::Zero();
    h.diagonal() << 3.0, 1.0, 4.0, 2.0;
    const Eigenframe f = eigenframe(h);
    for (int k = 0; k < 3; ++k) CHECK(f.values(k) < f.values(k + 1));
    // permutation of the identity
    for (int c = 0; c < 4; ++c) {
      int hits = 0;
      for (int r = 0; r < 4; ++r)
        if (std::abs(f.vectors(r, c)) > 0.5) ++hits;
      CHECK(hits == 1);
    }
  }
  SUBCASE("reconstruction") {
    auto gen = dnp::testing::rng(11);
    for (int trial = 0; trial < 20; ++trial) {
      const MatrixXc h = dnp::testing::random_hermitian(4, gen);
      const Eigenframe f = eigenframe(h);
      const MatrixXc rebuilt =
          f.vectors * f.values.cast<complexd>().asDiagonal() * f.vectors.adjoint();
      CHECK(diff(rebuilt, h) < 1e-10 * std::max(1.0, h.norm()));
    }
  }
  SUBCASE("nuclear mixing angles follow the manifold block diagonalization") {
    // Oracle: 2x2 block diagonalization of each electron manifold.
    const DriftFrame f = drift_frame(kDefault);
    const double theta_u =
        std::atan2(kDefault.B / 2, kDefault.omega_I + kDefault.A / 2);
    // up_b is the aligned (upper) state of the up manifold
    const Eigen::Vector2cd n_ub = f.basis.col(1).head<2>();
    const double mix = std::abs(n_ub(1) / n_ub(0));
    CHECK(mix == doctest::Approx(std::tan(theta_u / 2)).epsilon(1e-9));
  }
  SUBCASE("repeated eigenvalues resolve deterministically") {
    Matrix4c h = Matrix4c::Zero();
    h.diagonal() << 1.0, 1.0, 2.0, 2.0;
    const Eigenframe a = eigenframe(h);
    const Eigenframe b = eigenframe(h);
    CHECK(diff(a.vectors, b.vectors) == 0.0);
  }
  SUBCASE("rejects non-Hermitian input") {
    Matrix4c h = Matrix4c::Zero();
    h(0, 1) = 1.0;
    CHECK_THROWS_AS(eigenframe(h), std::invalid_argument);
  }
}

TEST_CASE("propagator") {
  auto gen = dnp::testing::rng(7);
  SUBCASE("dt = 0 is the identity") {
    const MatrixXc h = dnp::testing::random_hermitian(4, gen);
    CHECK(diff(propagator(h, 0.0), MatrixXc::Identity(4, 4)) < 1e-14);
  }
  SUBCASE("unitary for large actions") {
    for (double scale : {1.0, 1e3}) {
      const MatrixXc h = scale * dnp::testing::random_hermitian(4, gen);
      const MatrixXc u = propagator(h, 1.0);
      CHECK(is_unitary(u, 1e-10));
    }
  }
  SUBCASE("one-parameter group") {
    const MatrixXc h = dnp::testing::random_hermitian(4, gen);
    const MatrixXc u1 = propagator(h, 0.3);
    const MatrixXc u2 = propagator(h, 0.45);
    CHECK(diff(u1 * u2, propagator(h, 0.75)) < 1e-10);
  }
  CHECK_THROWS_AS(propagator(Matrix4c::Identity(), std::nan("")),
                  std::invalid_argument);
}

TEST_CASE("thermal state") {
  SUBCASE("high temperature limit") {
    SpinSystemParams sys = kDefault;
    sys.temperature = 1e12;
    CHECK(diff(thermal_state(sys), 0.25 * Matrix4c::Identity()) < 1e-9);
  }
  SUBCASE("electron polarization at 293 K") {
    // Oracle: direct Gibbs evaluation at the quoted field.
    const Matrix4c rho = thermal_state(kDefault);
    const auto& op = spin_operators();
    const double pol = (2.0 * op.Sz * rho).trace().real();
    const double expected =
        -std::tanh(phys::planck_h * 9.59e9 / (2 * phys::boltzmann_k * 293.0));
    CHECK(pol == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("electron to nuclear polarization ratio") {
    const Matrix4c rho = thermal_state(kDefault);
    const auto& op = spin_operators();
    const double pe = (2.0 * op.Sz * rho).trace().real();
    const double pn = (2.0 * op.Iz * rho).trace().real();
    CHECK(std::abs(pe / pn) == doctest::Approx(658.2).epsilon(1e-2));
    CHECK(pn > 0.0);  // proton moment parallel to spin
  }
}

TEST_CASE("partial trace") {
  auto gen = dnp::testing::rng(13);
  SUBCASE("product state identity") {
    const Matrix2c a = dnp::testing::random_state(2, gen);
    const Matrix2c b = dnp::testing::random_state(2, gen);
    Matrix4c rho;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) rho.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    CHECK(diff(partial_trace(rho, Subsystem::Nucleus), b) < 1e-14);
    CHECK(diff(partial_trace(rho, Subsystem::Electron), a) < 1e-14);
  }
  SUBCASE("maximally entangled state reduces to the mixed state") {
    Eigen::Vector4cd bell;
    bell << 1 / std::sqrt(2.0), 0, 0, 1 / std::sqrt(2.0);
    const Matrix4c rho = bell * bell.adjoint();
    CHECK(diff(partial_trace(rho, Subsystem::Electron), 0.5 * Matrix2c::Identity()) <
          1e-14);
  }
  SUBCASE("trace preserving and linear on random input") {
    for (int t = 0; t < 20; ++t) {
      const Matrix4c rho = dnp::testing::random_state(4, gen);
      CHECK(partial_trace(rho, Subsystem::Nucleus).trace().real() ==
            doctest::Approx(1.0).epsilon(1e-12));
    }
    const Matrix4c x = dnp::testing::random_state(4, gen);
    const Matrix4c y = dnp::testing::random_state(4, gen);
    CHECK(diff(partial_trace(Matrix4c(0.3 * x + 0.7 * y), Subsystem::Electron),
               0.3 * partial_trace(x, Subsystem::Electron) +
                   0.7 * partial_trace(y, Subsystem::Electron)) < 1e-13);
  }
}

TEST_CASE("pauli decomposition") {
  SUBCASE("maximally mixed state") {
    const PauliCoefficients c = pauli_decompose(Matrix4c(0.25 * Matrix4c::Identity()));
    CHECK(std::abs(c(0) - 0.25) < 1e-14);
    for (int k = 1; k < 16; ++k) CHECK(std::abs(c(k)) < 1e-15);
  }
  SUBCASE("ZI component") {
    const auto& op = spin_operators();
    const PauliCoefficients c = pauli_decompose(Matrix4c(2.0 * op.Sz));
    CHECK(std::abs(c(12) - 1.0) < 1e-14);  // index 12 = ZI
    for (int k = 0; k < 16; ++k)
      if (k != 12) CHECK(std::abs(c(k)) < 1e-14);
  }
  SUBCASE("round trip and isometry") {
    auto gen = dnp::testing::rng(17);
    for (int t = 0; t < 20; ++t) {
      const Matrix4c m = dnp::testing::random_complex(4, 4, gen);
      const PauliCoefficients c = pauli_decompose(m);
      CHECK(diff(pauli_reconstruct(c), m) < 1e-12 * m.norm());
      CHECK(4.0 * c.squaredNorm() ==
            doctest::Approx(m.squaredNorm()).epsilon(1e-10));
    }
  }
  SUBCASE("labels follow the electron-first order") {
    CHECK(pauli_labels()[1] == "IX");
    CHECK(pauli_labels()[3] == "IZ");
    CHECK(pauli_labels()[12] == "ZI");
  }
}

TEST_CASE("drift frame labeling") {
  SUBCASE("orthonormal columns and exact electron manifolds") {
    const DriftFrame f = drift_frame(kDefault);
    CHECK(is_unitary(f.basis, 1e-12));
    const auto& op = spin_operators();
    for (int k = 0; k < 4; ++k) {
      const double sz = (f.basis.col(k).adjoint() * op.Sz * f.basis.col(k))(0).real();
      CHECK(std::abs(std::abs(sz) - 0.5) < 1e-12);
      CHECK(((k < 2) == (sz > 0)));
    }
  }
  SUBCASE("zero-quantum pair has the smaller lab gap") {
    const DriftFrame f = drift_frame(kDefault);
    const double zq_gap = std::abs(f.energy(f.zq.first) - f.energy(f.zq.second));
    const double dq_gap = std::abs(f.energy(f.dq.first) - f.energy(f.dq.second));
    CHECK(zq_gap < dq_gap);
    CHECK(zq_gap / phys::two_pi ==
          doctest::Approx(kDefault.omega_S - 13.3324e6).epsilon(1e-4));
  }
  SUBCASE("pair identification tracks the sign of A") {
    // At B = 0 the flip-flop pair is exactly |up beta>, |dn alpha>.
    for (double a : {-42.7e6, 42.7e6}) {
      SpinSystemParams sys = kDefault;
      sys.A = a;
      sys.B = 0.0;
      const DriftFrame f = drift_frame(sys);
      const Eigen::Vector4cd zq_up = f.basis.col(f.zq.first);
      const Eigen::Vector4cd zq_dn = f.basis.col(f.zq.second);
      CHECK(std::abs(zq_up(1)) == doctest::Approx(1.0).epsilon(1e-9));  // |up beta>
      CHECK(std::abs(zq_dn(2)) == doctest::Approx(1.0).epsilon(1e-9));  // |dn alpha>
    }
  }
}
