#include "dnp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numeric>
#include <thread>

namespace dnp {

Matrix4c transition_angle_unitary(const std::array<double, 4>& theta,
                                  const DriftFrame& frame) {
  for (double t : theta)
    if (!std::isfinite(t)) throw std::invalid_argument("angles must be finite");
  Matrix4c gen = Matrix4c::Zero();
  for (int i = 0; i < 4; ++i)
    gen += 0.5 * theta[static_cast<std::size_t>(i)] * transition_generator(frame, i + 1);
  return propagator(gen, 1.0);
}

namespace {

double angle_dt(double dt, const RelaxationParams& r) {
  return dt > 0 ? dt : std::min(r.T1e, r.Tzq) / 100.0;
}

SuperMatrix relaxation_super(double dt, const SpinSystemParams& sys,
                             const RelaxationParams& r, const DriftFrame& frame) {
  SuperMatrix s = kraus_to_super(tx_channel(dt, r, sys, frame));
  if (r.Tdq) s = SuperMatrix{kraus_to_super(tdq_channel(dt, r, sys, frame)).m * s.m};
  s = SuperMatrix{kraus_to_super(t1e_channel(dt, r, sys, frame)).m * s.m};
  return s;
}

}  // namespace

std::pair<SuperMatrix, double> train_cycle(const TrainDrive& drive,
                                           const SpinSystemParams& sys,
                                           const RelaxationParams& r, double inter_delay) {
  if (inter_delay < 0 || !std::isfinite(inter_delay))
    throw std::invalid_argument("inter_delay must be >= 0");

  if (std::holds_alternative<AngleDrive>(drive)) {
    const DriftFrame frame = drift_frame(sys);
    const auto& ad = std::get<AngleDrive>(drive);
    const double dt = angle_dt(ad.dt, r) + inter_delay;
    const Matrix4c u = transition_angle_unitary(ad.theta, frame);
    SuperMatrix cycle{relaxation_super(dt, sys, r, frame).m *
                      kraus_to_super(KrausSet{{u}}).m};
    return {std::move(cycle), dt};
  }

  const auto& seq = std::get<PulseSequence>(drive);
  SuperMatrix cycle = saturation_supercycle(seq, sys, r, inter_delay);
  const double duration = 4.0 * (seq.total_duration() + inter_delay);
  return {std::move(cycle), duration};
}

BuildupCurve run_saturation_train(const TrainDrive& drive, const SpinSystemParams& sys,
                                  const RelaxationParams& r, double total_time,
                                  long long readout_stride, double inter_delay) {
  if (total_time <= 0) throw std::invalid_argument("total_time must be positive");
  if (readout_stride < 1) throw std::invalid_argument("readout_stride must be >= 1");
  auto [cycle, duration] = train_cycle(drive, sys, r, inter_delay);
  if (duration <= 0) throw std::invalid_argument("train cycle has zero duration");

  const SuperMatrix chunk = super_power(cycle, readout_stride);
  const double t_chunk = duration * static_cast<double>(readout_stride);
  const auto n_points = static_cast<long long>(std::ceil(total_time / t_chunk));

  BuildupCurve curve;
  Eigen::VectorXcd v = vec(MatrixXc(thermal_state(sys)));
  curve.times.push_back(0.0);
  curve.enhancements.push_back(
      enhancement(partial_trace(Matrix4c(unvec(v, 4)), Subsystem::Nucleus), sys)
          .enhancement);
  for (long long k = 1; k <= n_points; ++k) {
    v = chunk.m * v;
    curve.times.push_back(static_cast<double>(k) * t_chunk);
    curve.enhancements.push_back(
        enhancement(partial_trace(Matrix4c(unvec(v, 4)), Subsystem::Nucleus), sys)
            .enhancement);
  }
  return curve;
}

void AngleMapSpec::validate() const {
  for (double t : fixed)
    if (t < 0 || t > M_PI + 1e-12)
      throw std::invalid_argument("angle-map: fixed angles must lie in [0, pi]");
  for (double t : {x_lo, x_hi, y_lo, y_hi})
    if (t < 0 || t > M_PI + 1e-12)
      throw std::invalid_argument("angle-map: axis ranges must lie in [0, pi]");
  if (nx < 2 || ny < 2) throw std::invalid_argument("angle-map: grid must be >= 2x2");
}

double AngleMapResult::at(int ix, int iy) const {
  return values[static_cast<std::size_t>(iy) * xs.size() + static_cast<std::size_t>(ix)];
}

namespace {

void set_axis(std::array<double, 4>& theta, AngleAxis axis, double value) {
  switch (axis) {
    case AngleAxis::Theta1: theta[0] = value; break;
    case AngleAxis::Theta2: theta[1] = value; break;
    case AngleAxis::Theta3: theta[2] = value; break;
    case AngleAxis::Theta4: theta[3] = value; break;
    case AngleAxis::Theta12: theta[0] = theta[1] = value; break;
  }
}

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  std::atomic<int> next{0};
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
    });
  for (auto& th : pool) th.join();
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return v;
}

}  // namespace

AngleMapResult dnp_angle_map(const AngleMapSpec& spec, const SpinSystemParams& sys,
                             const RelaxationParams& r, int threads) {
  spec.validate();
  const double dt = angle_dt(spec.dt, r);
  const DriftFrame frame = drift_frame(sys);
  const SuperMatrix relax = relaxation_super(dt, sys, r, frame);

  AngleMapResult result;
  result.xs = linspace(spec.x_lo, spec.x_hi, spec.nx);
  result.ys = linspace(spec.y_lo, spec.y_hi, spec.ny);
  result.values.assign(static_cast<std::size_t>(spec.nx) * spec.ny, 0.0);

  parallel_for(spec.nx * spec.ny, threads, [&](int cell) {
    const int ix = cell % spec.nx;
    const int iy = cell / spec.nx;
    std::array<double, 4> theta = spec.fixed;
    set_axis(theta, spec.x_axis, result.xs[static_cast<std::size_t>(ix)]);
    set_axis(theta, spec.y_axis, result.ys[static_cast<std::size_t>(iy)]);
    const Matrix4c u = transition_angle_unitary(theta, frame);
    const SuperMatrix cycle{relax.m * kraus_to_super(KrausSet{{u}}).m};
    result.values[static_cast<std::size_t>(cell)] = asymptotic_enhancement(cycle, sys);
  });
  return result;
}

AngleMapSpec angle_map_panel(char panel) {
  AngleMapSpec spec;
  switch (panel) {
    case 'a':
      spec.fixed = {0, M_PI / 2, 0, 0};
      spec.x_axis = AngleAxis::Theta1;
      spec.y_axis = AngleAxis::Theta3;
      break;
    case 'b':
      spec.fixed = {M_PI / 2, 0, 0, 0};
      spec.x_axis = AngleAxis::Theta2;
      spec.y_axis = AngleAxis::Theta3;
      break;
    case 'c':
      spec.fixed = {M_PI / 2, 0, 0, 0};
      spec.x_axis = AngleAxis::Theta2;
      spec.y_axis = AngleAxis::Theta4;
      break;
    case 'd':
      spec.fixed = {M_PI / 2, M_PI / 2, 0, 0};
      spec.x_axis = AngleAxis::Theta3;
      spec.y_axis = AngleAxis::Theta4;
      break;
    case 'e':
      spec.fixed = {0, 0, M_PI / 2, 0};
      spec.x_axis = AngleAxis::Theta12;
      spec.y_axis = AngleAxis::Theta4;
      break;
    default:
      throw std::invalid_argument("angle-map panel must be one of a..e");
  }
  return spec;
}

namespace {

SuperMatrix pulse_point_cycle(const SweepPulse& pulse, const SpinSystemParams& sys,
                              const RelaxationParams& r) {
  const PulseSequence seq =
      pulse.rederive_hard ? hard_pulse(pulse.sequence.omega_d) : pulse.sequence;
  return saturation_supercycle(seq, sys, r);
}

}  // namespace

std::vector<SweepRow> sweep(const SweepSpec& spec, const std::vector<SweepPulse>& pulses,
                            const SpinSystemParams& sys, const RelaxationParams& r,
                            int threads) {
  if (spec.values.empty()) throw std::invalid_argument("sweep: empty value list");
  const auto n = static_cast<int>(spec.values.size() * pulses.size());
  std::vector<SweepRow> rows(static_cast<std::size_t>(n));
  parallel_for(n, threads, [&](int idx) {
    const std::size_t pi = static_cast<std::size_t>(idx) / spec.values.size();
    const std::size_t vi = static_cast<std::size_t>(idx) % spec.values.size();
    const double value = spec.values[vi];
    SpinSystemParams point_sys = sys;
    RelaxationParams point_r = r;
    SweepPulse pulse = pulses[pi];
    switch (spec.parameter) {
      case SweepParameter::RabiFrequency:
        pulse.sequence.omega_d = value;
        break;
      case SweepParameter::AnisotropicB:
        point_sys.B = value;
        break;
      case SweepParameter::TdqRatio:
        point_r.Tdq = value * r.Tzq;
        break;
    }
    const SuperMatrix cycle = pulse_point_cycle(pulse, point_sys, point_r);
    rows[static_cast<std::size_t>(idx)] =
        SweepRow{pulse.name, value, asymptotic_enhancement(cycle, point_sys)};
  });
  return rows;
}

std::vector<DqLeakageRow> dq_leakage_run(const SpinSystemParams& sys,
                                         const RelaxationParams& r, double tdq_ratio,
                                         const std::vector<SweepPulse>& pulses) {
  if (tdq_ratio <= 0) throw std::invalid_argument("dq_leakage_run: tdq_ratio must be > 0");
  RelaxationParams base = r;
  base.Tdq.reset();
  RelaxationParams leaky = r;
  leaky.Tdq = tdq_ratio * r.Tzq;

  std::vector<DqLeakageRow> rows;
  rows.reserve(pulses.size());
  for (const auto& pulse : pulses) {
    const double clean = asymptotic_enhancement(pulse_point_cycle(pulse, sys, base), sys);
    const double dq = asymptotic_enhancement(pulse_point_cycle(pulse, sys, leaky), sys);
    rows.push_back(DqLeakageRow{pulse.name, clean, dq});
  }
  return rows;
}

ExpFit fit_exponential(const BuildupCurve& curve) {
  const auto n = curve.times.size();
  if (n < 4 || curve.enhancements.size() != n)
    throw std::invalid_argument("fit_exponential: need at least 4 points");
  const auto& t = curve.times;
  const auto& y = curve.enhancements;

  const double y_min = *std::min_element(y.begin(), y.end());
  const double y_max = *std::max_element(y.begin(), y.end());
  const double spread = y_max - y_min;
  const double scale = std::max({std::abs(y_min), std::abs(y_max), 1e-30});
  if (spread < 1e-9 * scale) {
    double rss = 0;
    for (double v : y) rss += (v - y.front()) * (v - y.front());
    return ExpFit{0.0, 0.0, std::sqrt(rss), true, true};
  }

  const bool buildup = std::abs(y.back()) >= std::abs(y.front());
  auto model = [&](double a, double tau, double ti) {
    return buildup ? a * (1.0 - std::exp(-ti / tau)) : a * std::exp(-ti / tau);
  };
  auto rss = [&](const Eigen::VectorXd& p) {
    const double a = p(0);
    const double tau = std::max(std::abs(p(1)), 1e-30);
    double acc = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = y[i] - model(a, tau, t[i]);
      acc += d * d;
    }
    return acc;
  };

  // Endpoint heuristics: asymptote from the tail, time constant from the
  // first crossing of 1 - 1/e (or 1/e for decay) of the range.
  const double a0 = buildup ? y.back() : y.front();
  const double target = buildup ? y.front() + (y.back() - y.front()) * (1.0 - std::exp(-1.0))
                                : y.front() * std::exp(-1.0);
  double tau0 = t.back() / 2.0;
  for (std::size_t i = 1; i < n; ++i) {
    const bool crossed = buildup ? (std::abs(y[i]) >= std::abs(target))
                                 : (std::abs(y[i]) <= std::abs(target));
    if (crossed) {
      tau0 = std::max(t[i], t.back() * 1e-6);
      break;
    }
  }

  NelderMeadConfig cfg;
  cfg.max_iterations = 2000;
  cfg.convergence_tol = 1e-14 * (1.0 + a0 * a0);
  cfg.initial_step = 0.1 * std::max(std::abs(a0), tau0);
  cfg.mirror_nonnegative = false;  // the amplitude may be negative
  Eigen::VectorXd p0(2);
  p0 << a0, tau0;
  const NelderMeadResult res = nelder_mead(rss, p0, cfg);
  return ExpFit{res.x(0), std::abs(res.x(1)), std::sqrt(res.value), buildup, false};
}

std::vector<std::pair<std::string, complexd>> final_state_report(const SuperMatrix& s,
                                                                 const DriftFrame& frame) {
  if (s.dim() != 4) throw std::invalid_argument("final_state_report: 16x16 map expected");
  const Matrix4c rho = fixed_point(s);
  const Matrix4c rho_eig = frame.basis.adjoint() * rho * frame.basis;
  const PauliCoefficients c = pauli_decompose(rho_eig);
  std::vector<std::pair<std::string, complexd>> rows;
  rows.reserve(16);
  for (int k = 0; k < 16; ++k)
    rows.emplace_back(pauli_labels()[static_cast<std::size_t>(k)], c(k));
  return rows;
}

std::string g12(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void write_csv(const std::string& path,
               const std::vector<std::pair<std::string, std::string>>& header,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream os(path, std::ios::binary);  // fixed newlines across platforms
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  for (const auto& [k, v] : header) os << "# " << k << "=" << v << "\n";
  for (std::size_t i = 0; i < columns.size(); ++i)
    os << columns[i] << (i + 1 < columns.size() ? "," : "");
  os << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      os << row[i] << (i + 1 < row.size() ? "," : "");
    os << "\n";
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

}  // namespace dnp
