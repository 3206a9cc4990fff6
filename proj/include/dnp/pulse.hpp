// pulse.hpp — on/off microwave pulse sequences, their closed- and
// open-system maps, the gate-fidelity objective, a Nelder-Mead simplex
// search, and the end-to-end pulse optimizer.

#pragma once

#include "dnp/model.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace dnp {

struct PulseSegment {
  bool on;
  double duration;  // seconds, >= 0
};

// Alternating drive/delay segments at a fixed Rabi frequency, played in the
// electron rotating frame.
struct PulseSequence {
  std::vector<PulseSegment> segments;
  double omega_d = 8e6;  // Hz

  double total_duration() const;
  void validate() const;
};

// Single on-segment of nominal pi/2 duration 1/(4 omega_d): the reproducible
// non-optimized baseline.
PulseSequence hard_pulse(double omega_d = 8e6);

// Exact decimal round-trip serialization: "omega_d <value>" then one
// "<on|off> <duration>" line per segment.
std::string serialize(const PulseSequence& seq);
PulseSequence parse_pulse(const std::string& text);

// U = exp(-i pi/2 Sx (x) 1), the electron-only saturation target.
Matrix4c target_unitary();

// Simultaneous pi/2 rotations on the two electron-only eigen transitions
// with zero rotation on the zero-/double-quantum pairs: the selective
// saturation goal the optimizer scores against.  Coincides with
// target_unitary at B = 0.
Matrix4c saturation_target(const DriftFrame& frame);

enum class EvolutionMode { Closed, Open };

// Closed mode: piecewise drift(+drive) propagators, one unitary Kraus
// operator.  Open mode: per-segment evolution steps subdivided so that no
// internal step exceeds dt_max (unset selects min(T1e,Tzq)/100), with
// the drive off segments evolving under drift and relaxation alone; the
// result is reduced to its minimal Kraus set.  drive_phase rotates the
// on-segment drive axis in the transverse plane.
KrausSet pulse_map(const PulseSequence& seq, const SpinSystemParams& sys,
                   const RelaxationParams& r, EvolutionMode mode,
                   std::optional<double> dt_max = std::nullopt,
                   double drive_phase = 0.0);

// One period of the saturation train: the pulse repeated with the standard
// four-step phase cycle (x, y, -x, -y), each repetition followed by
// inter_delay of free evolution.  Open-system map; wall-clock duration is
// 4 * (pulse length + inter_delay).
SuperMatrix saturation_supercycle(const PulseSequence& seq, const SpinSystemParams& sys,
                                  const RelaxationParams& r, double inter_delay = 0.0,
                                  std::optional<double> dt_max = std::nullopt);

// 1 - gate_fidelity(target_unitary, pulse_map(seq)).
double objective(const PulseSequence& seq, const SpinSystemParams& sys,
                 const RelaxationParams& r, EvolutionMode mode,
                 std::optional<double> dt_max = std::nullopt);

struct NelderMeadConfig {
  int max_iterations = 400;
  double convergence_tol = 1e-10;  // objective spread across the simplex
  double initial_step = 0.0;       // absolute simplex step; 0 = 5% of scale
  double scale = 1.0;
  bool mirror_nonnegative = true;  // evaluate at |x|, report |x|
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value;
  int iterations;
  std::vector<double> history;  // best objective per iteration
};

// Standard simplex (reflection 1, expansion 2, contraction 0.5, shrink 0.5)
// over nonnegative coordinates; negative trial coordinates are mirrored to
// their absolute value.  Throws on a non-finite objective value.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& x0, const NelderMeadConfig& cfg);

struct OptimizerConfig {
  EvolutionMode mode = EvolutionMode::Open;
  int n_pulses = 3;
  int max_iterations = 400;
  double convergence_tol = 1e-10;
  int restarts = 8;
  std::uint64_t rng_seed = 0;
  double omega_d = 8e6;
  std::optional<double> dt_max;  // open-mode substep cap; default min(T1e,Tzq)/100
  long long fidelity_cycles = -1;  // saturation-train length; -1 = auto
};

struct PulseResult {
  PulseSequence sequence;
  double gate_fidelity;         // against the target, open-system map
  double reduced_map_fidelity;  // against the ideal OE reduced train map
  std::vector<double> objective_history;
};

// Best-of-restarts Nelder-Mead over the 2*n_pulses+1 segment durations
// (delay, pulse, delay, ..., pulse, delay), initial durations uniform in
// [0, 4/omega_d].  Deterministic for a fixed seed; ties between restarts go
// to the lowest restart index.
PulseResult optimize_pulse(const OptimizerConfig& cfg, const SpinSystemParams& sys,
                           const RelaxationParams& r);

// Overlap of the pulse's n_cycles saturation-train map, reduced to the
// nucleus, with the ideal Overhauser train of the same total duration.
double reduced_map_fidelity(const PulseSequence& seq, const SpinSystemParams& sys,
                            const RelaxationParams& r, long long n_cycles = -1);

// Convenience: the open-system one-cycle supermatrix of a sequence.
SuperMatrix pulse_cycle_super(const PulseSequence& seq, const SpinSystemParams& sys,
                              const RelaxationParams& r,
                              std::optional<double> dt_max = std::nullopt);

}  // namespace dnp
