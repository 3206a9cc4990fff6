// model.hpp — relaxation channel builders, the composed open-system evolution
// step, idealized Overhauser / solid-effect cycle maps, closed-form reduced
// nuclear Kraus sets, and the enhancement metric.

#pragma once

#include "dnp/channel.hpp"
#include "dnp/quantum.hpp"

#include <optional>
#include <vector>

namespace dnp {

struct RelaxationParams {
  double T1e = 1e-3;            // electron longitudinal relaxation (s)
  double Tzq = 100e-3;          // zero-quantum cross relaxation (s)
  std::optional<double> Tdq;    // double-quantum relaxation; absent = disabled
  double temperature = 293.0;   // K

  void validate() const;
};

// Upper-level population of a two-level Boltzmann splitting at gap_hz:
// exp(-x)/(2 cosh x), x = h f / (2 k T).
double boltzmann_upper_weight(double gap_hz, double temperature);

// Generalized amplitude damping on one level pair of the canonical drift
// eigenbasis, conjugated back to the product basis.  `pair` is (upper,
// lower), `p_upper` the stationary upper-level weight, eps = exp(-dt/T).
KrausSet pair_relaxation_channel(const DriftFrame& frame, std::pair<int, int> pair,
                                 double p_upper, double dt, double T);

// Electron T1: amplitude damping on both electron-only transitions with the
// Boltzmann weight at omega_S.
KrausSet t1e_channel(double dt, const RelaxationParams& r, const SpinSystemParams& sys,
                     const DriftFrame& frame);

// Zero-quantum (flip-flop) cross relaxation at gap omega_S - omega_I.
KrausSet tx_channel(double dt, const RelaxationParams& r, const SpinSystemParams& sys,
                    const DriftFrame& frame);

// Double-quantum (flip-flip) leakage at gap omega_S + omega_I; requires Tdq.
KrausSet tdq_channel(double dt, const RelaxationParams& r, const SpinSystemParams& sys,
                     const DriftFrame& frame);

struct RelaxationSelect {
  bool t1e = true;
  bool tx = true;
  bool tdq = false;
};

// One open-evolution step: T1e after Tx (after Tdq) after exp(-i H dt).
// Warns (once) when dt exceeds a twentieth of the fastest relaxation time.
KrausSet evolution_step(const Matrix4c& h_total, double dt, const RelaxationParams& r,
                        const SpinSystemParams& sys, const DriftFrame& frame,
                        const RelaxationSelect& select = {});

// sigma_x-like generator on one transition of the canonical eigenbasis;
// transitions 1 and 2 are the electron-only pairs, 3 the zero-quantum pair,
// 4 the double-quantum pair.
Matrix4c transition_generator(const DriftFrame& frame, int transition);

enum class DnpKind { Overhauser, SolidEffect };

// Idealized repeated cycle: perfect rotations by pulse_angle on the relevant
// transitions (both electron lines for OE, the zero-quantum line for SE)
// followed by the relaxation channels over dt, iterated n_cycles times.
SuperMatrix ideal_dnp_cycle(DnpKind kind, const SpinSystemParams& sys,
                            const RelaxationParams& r, double pulse_angle, double dt);
SuperMatrix ideal_dnp_map(DnpKind kind, const SpinSystemParams& sys,
                          const RelaxationParams& r, double pulse_angle,
                          long long n_cycles, double dt);

// Derived closed-form parameters of the reduced nuclear maps.
struct ReducedKrausParams {
  double Gamma;         // normalized stationary weight at omega_S
  double alpha;         // sqrt((1 - e^{-t/T1e})/2)
  double Gamma1;        // 1 - 2 Gamma (1 - e^{-t/T1e})
  double GammaX;        // normalized stationary weight at omega_S - omega_I
  double alpha_prime;   // e^{-t(1/T1e + 1/Tzq)} (e^{t/Tzq} - 1)
  complexd Delta_plus, Delta_minus;    // no-jump phase ratios, up/down manifold
  double beta_plus, beta_minus;        // no-jump branch amplitudes
  double beta_prime_plus, beta_prime_minus;
  complexd Delta_prime_plus, Delta_prime_minus;
  double eta_plus, eta_minus;          // sqrt(4A^2 + 4B^2 +- 4 A omega_I + omega_I^2)
  double gamma1, gammaX;               // unnormalized Boltzmann exponentials (reference)
};

struct ReducedKraus {
  KrausSet set;                 // exact trace-preserving first-order set
  ReducedKrausParams params;
  std::vector<std::size_t> nojump_idx;
  std::vector<std::size_t> t1_jump_idx;
  std::vector<std::size_t> tx_jump_idx;
  std::vector<std::size_t> double_jump_idx;
};

// Closed-form reduced nuclear Kraus set for one evolution step of duration t
// with a maximally mixed electron, first order in t/T1e and t/Tzq (exact
// segment phases).  SolidEffect includes only T1e, Overhauser T1e and Tx.
ReducedKraus analytic_reduced_kraus(DnpKind kind, double t, const SpinSystemParams& sys,
                                    const RelaxationParams& r);

// Short-time limiting forms of the two cross-relaxation jump operators:
// sqrt(t/2Tzq) sqrt(1-q) |0><1| and sqrt(t/2Tzq) sqrt(q) |1><0|.
std::array<Matrix2c, 2> oe_short_time_jumps(double t, const SpinSystemParams& sys,
                                            const RelaxationParams& r);

struct EnhancementMetrics {
  double nuclear_polarization;  // <2 I_z>
  double enhancement;           // ratio to the thermal nuclear polarization
  double polarizing_strength;   // z-coefficient driven onto the identity input
};

// Thermal reference is the physical proton polarization +tanh(h nu_I/2kT);
// the thermal nuclear state maps to +1.
EnhancementMetrics enhancement(const Matrix2c& rho_n, const SpinSystemParams& sys);

// p of the polarizing-channel form Lambda(1) = 1 + p Z for a nuclear map.
double polarizing_strength(const SuperMatrix& nuclear_map);

double thermal_nuclear_polarization(const SpinSystemParams& sys);
double thermal_electron_polarization(const SpinSystemParams& sys);
double enhancement_cap(const SpinSystemParams& sys);

// Enhancement of the cycle map's fixed point.  Falls back to a long power of
// the cycle applied to the thermal state when the fixed point is degenerate.
double asymptotic_enhancement(const SuperMatrix& cycle, const SpinSystemParams& sys);

// <2 I_z> of the cycle map's fixed point, reduced to the nucleus.
double asymptotic_nuclear_polarization(const SuperMatrix& cycle,
                                       const SpinSystemParams& sys);

}  // namespace dnp
