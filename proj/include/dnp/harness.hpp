// harness.hpp — scenario engine: saturation-train buildup curves, the
// transition-angle DNP map, Rabi / hyperfine sweeps, double-quantum leakage
// comparisons, exponential fits, final-state reports and CSV output.

#pragma once

#include "dnp/pulse.hpp"

#include <array>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace dnp {

// Instantaneous rotations by theta[i] on transitions 1..4, followed by the
// relaxation channels over dt, as one train cycle.
struct AngleDrive {
  std::array<double, 4> theta{0, 0, 0, 0};
  double dt = -1.0;  // <= 0 selects min(T1e,Tzq)/100
};

using TrainDrive = std::variant<PulseSequence, AngleDrive>;

struct BuildupCurve {
  std::vector<double> times;
  std::vector<double> enhancements;
  std::string metadata;
};

// U = exp(-i sum_i theta_i/2 X_i) with X_i the transition generators.
Matrix4c transition_angle_unitary(const std::array<double, 4>& theta,
                                  const DriftFrame& frame);

// One train cycle as a supermatrix plus its wall-clock duration.  Pulse
// cycles are the open-system pulse map followed by inter_delay of free
// relaxation; angle cycles are the rotation followed by dt of relaxation.
std::pair<SuperMatrix, double> train_cycle(const TrainDrive& drive,
                                           const SpinSystemParams& sys,
                                           const RelaxationParams& r,
                                           double inter_delay = 0.0);

// Repeats the cycle from the thermal state, recording the nuclear
// enhancement every readout_stride cycles.
BuildupCurve run_saturation_train(const TrainDrive& drive, const SpinSystemParams& sys,
                                  const RelaxationParams& r, double total_time,
                                  long long readout_stride = 1, double inter_delay = 0.0);

enum class AngleAxis { Theta1, Theta2, Theta3, Theta4, Theta12 };

struct AngleMapSpec {
  std::array<double, 4> fixed{0, 0, 0, 0};
  AngleAxis x_axis = AngleAxis::Theta1;
  AngleAxis y_axis = AngleAxis::Theta3;
  double x_lo = 0.0, x_hi = M_PI;
  double y_lo = 0.0, y_hi = M_PI;
  int nx = 32, ny = 32;
  double dt = -1.0;

  void validate() const;
};

struct AngleMapResult {
  std::vector<double> xs, ys;
  std::vector<double> values;  // row-major, index = iy * nx + ix

  double at(int ix, int iy) const;
};

// Asymptotic enhancement over the angle grid; cells are independent and may
// be evaluated on several threads, assembly order is fixed.
AngleMapResult dnp_angle_map(const AngleMapSpec& spec, const SpinSystemParams& sys,
                             const RelaxationParams& r, int threads = 1);

// Fixed-angle slices of the rotation-angle space.  Panels: (a) transition 1
// vs 3 with a pi/2 drive on 2; (b) 2 vs 3 with pi/2 on 1; (c) 2 vs 4 with
// pi/2 on 1; (d) 3 vs 4 with pi/2 on both electron lines; (e) both electron
// lines jointly vs 4 with pi/2 on 3.
AngleMapSpec angle_map_panel(char panel);

enum class SweepParameter { RabiFrequency, AnisotropicB, TdqRatio };

struct SweepSpec {
  SweepParameter parameter = SweepParameter::RabiFrequency;
  std::vector<double> values;
};

struct SweepPulse {
  std::string name;
  bool rederive_hard = false;  // rebuild the nominal pi/2 pulse per point
  PulseSequence sequence;      // used when rederive_hard is false
};

struct SweepRow {
  std::string pulse;
  double value;
  double enhancement;
};

// Asymptotic enhancement per (pulse, parameter value); dependent quantities
// (hard-pulse duration, drift frame, channels) are re-derived at every point.
std::vector<SweepRow> sweep(const SweepSpec& spec, const std::vector<SweepPulse>& pulses,
                            const SpinSystemParams& sys, const RelaxationParams& r,
                            int threads = 1);

struct DqLeakageRow {
  std::string pulse;
  double baseline;
  double with_dq;
};

// Asymptotic enhancements without and with the double-quantum channel at
// Tdq = tdq_ratio * Tzq.
std::vector<DqLeakageRow> dq_leakage_run(const SpinSystemParams& sys,
                                         const RelaxationParams& r, double tdq_ratio,
                                         const std::vector<SweepPulse>& pulses);

struct ExpFit {
  double amplitude;
  double time_constant;
  double residual;
  bool buildup;     // a(1-e^{-t/tau}) when true, a e^{-t/tau} otherwise
  bool degenerate;  // flat input, time constant not identifiable
};

ExpFit fit_exponential(const BuildupCurve& curve);

// Pauli coefficients (order II, IX, ..., ZZ) of the map's fixed point,
// expressed in the canonical drift eigenbasis, where populations and
// zero-quantum coherences separate cleanly.
std::vector<std::pair<std::string, complexd>> final_state_report(const SuperMatrix& s,
                                                                 const DriftFrame& frame);

// ---- CSV helpers -----------------------------------------------------------

// 12 significant digits, locale-independent.
std::string g12(double v);

// Commented key=value header lines, then a column-name row, then data rows.
void write_csv(const std::string& path,
               const std::vector<std::pair<std::string, std::string>>& header,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<std::string>>& rows);

}  // namespace dnp
