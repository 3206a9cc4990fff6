#include "dnp/model.hpp"

#include <cmath>
#include <iostream>

namespace dnp {

namespace {

constexpr complexd kI{0.0, 1.0};

void require_time(double v, const char* name) {
  if (!std::isfinite(v) || v <= 0)
    throw std::invalid_argument(std::string(name) + " must be finite and positive");
}

}  // namespace

void RelaxationParams::validate() const {
  require_time(T1e, "T1e");
  require_time(Tzq, "Tzq");
  if (Tdq) require_time(*Tdq, "Tdq");
  require_time(temperature, "temperature");
}

double boltzmann_upper_weight(double gap_hz, double temperature) {
  const double x = phys::planck_h * gap_hz / (2.0 * phys::boltzmann_k * temperature);
  return std::exp(-x) / (2.0 * std::cosh(x));
}

KrausSet pair_relaxation_channel(const DriftFrame& frame, std::pair<int, int> pair,
                                 double p_upper, double dt, double T) {
  if (dt < 0 || !std::isfinite(dt)) throw std::invalid_argument("dt must be >= 0");
  require_time(T, "relaxation time");
  if (p_upper < 0 || p_upper > 1)
    throw std::invalid_argument("stationary weight must lie in [0,1]");
  const int i = pair.first;   // upper level
  const int j = pair.second;  // lower level
  if (i < 0 || i > 3 || j < 0 || j > 3 || i == j)
    throw std::invalid_argument("invalid level pair");

  const double eps = std::exp(-dt / T);
  const double se = std::sqrt(eps);
  const double sj = std::sqrt(1.0 - eps);
  const double sp = std::sqrt(p_upper);
  const double sq = std::sqrt(1.0 - p_upper);

  Matrix4c k1 = Matrix4c::Identity();
  k1(j, j) = se;
  Matrix4c k2 = Matrix4c::Zero();
  k2(i, j) = sj;
  Matrix4c k3 = Matrix4c::Identity();
  k3(i, i) = se;
  Matrix4c k4 = Matrix4c::Zero();
  k4(j, i) = sj;

  const Matrix4c& v = frame.basis;
  KrausSet out;
  out.ops = {sp * (v * k1 * v.adjoint()), sp * (v * k2 * v.adjoint()),
             sq * (v * k3 * v.adjoint()), sq * (v * k4 * v.adjoint())};
  return out;
}

KrausSet t1e_channel(double dt, const RelaxationParams& r, const SpinSystemParams& sys,
                     const DriftFrame& frame) {
  if (dt < 0 || !std::isfinite(dt)) throw std::invalid_argument("dt must be >= 0");
  r.validate();
  const double p = boltzmann_upper_weight(sys.omega_S, r.temperature);
  const double eps = std::exp(-dt / r.T1e);
  const double se = std::sqrt(eps);
  const double sj = std::sqrt(1.0 - eps);

  // Electron flip acting as an operator on the manifold index, identity on
  // the nuclear label within each manifold.
  Matrix4c a1 = Matrix4c::Identity();
  a1(2, 2) = a1(3, 3) = se;
  Matrix4c a2 = Matrix4c::Zero();
  a2(0, 2) = a2(1, 3) = sj;
  Matrix4c a3 = Matrix4c::Identity();
  a3(0, 0) = a3(1, 1) = se;
  Matrix4c a4 = Matrix4c::Zero();
  a4(2, 0) = a4(3, 1) = sj;

  const Matrix4c& v = frame.basis;
  const double sp = std::sqrt(p);
  const double sq = std::sqrt(1.0 - p);
  KrausSet out;
  out.ops = {sp * (v * a1 * v.adjoint()), sp * (v * a2 * v.adjoint()),
             sq * (v * a3 * v.adjoint()), sq * (v * a4 * v.adjoint())};
  return out;
}

KrausSet tx_channel(double dt, const RelaxationParams& r, const SpinSystemParams& sys,
                    const DriftFrame& frame) {
  r.validate();
  const double q = boltzmann_upper_weight(sys.omega_S - sys.omega_I, r.temperature);
  return pair_relaxation_channel(frame, frame.zq, q, dt, r.Tzq);
}

KrausSet tdq_channel(double dt, const RelaxationParams& r, const SpinSystemParams& sys,
                     const DriftFrame& frame) {
  r.validate();
  if (!r.Tdq) throw std::invalid_argument("tdq_channel: Tdq is not configured");
  const double q = boltzmann_upper_weight(sys.omega_S + sys.omega_I, r.temperature);
  return pair_relaxation_channel(frame, frame.dq, q, dt, *r.Tdq);
}

namespace {

void warn_coarse_step(double dt, const RelaxationParams& r, const RelaxationSelect& sel) {
  double fastest = std::numeric_limits<double>::max();
  if (sel.t1e) fastest = std::min(fastest, r.T1e);
  if (sel.tx) fastest = std::min(fastest, r.Tzq);
  if (sel.tdq && r.Tdq) fastest = std::min(fastest, *r.Tdq);
  if (fastest < std::numeric_limits<double>::max() && dt > fastest / 20.0) {
    static bool warned = false;
    if (!warned) {
      std::cerr << "warning: evolution step dt = " << dt
                << " s is coarse relative to the fastest relaxation time " << fastest
                << " s\n";
      warned = true;
    }
  }
}

}  // namespace

KrausSet evolution_step(const Matrix4c& h_total, double dt, const RelaxationParams& r,
                        const SpinSystemParams& sys, const DriftFrame& frame,
                        const RelaxationSelect& select) {
  if (!std::isfinite(dt) || dt < 0) throw std::invalid_argument("dt must be >= 0");
  warn_coarse_step(dt, r, select);
  KrausSet k;
  k.ops = {propagator(h_total, dt)};
  if (select.tdq) k = compose(tdq_channel(dt, r, sys, frame), k);
  if (select.tx) k = compose(tx_channel(dt, r, sys, frame), k);
  if (select.t1e) k = compose(t1e_channel(dt, r, sys, frame), k);
  return k;
}

Matrix4c transition_generator(const DriftFrame& frame, int transition) {
  std::pair<int, int> pair;
  switch (transition) {
    case 1: pair = {0, 2}; break;
    case 2: pair = {1, 3}; break;
    case 3: pair = frame.zq; break;
    case 4: pair = frame.dq; break;
    default: throw std::invalid_argument("transition must be 1..4");
  }
  Matrix4c x = Matrix4c::Zero();
  x(pair.first, pair.second) = 1.0;
  x(pair.second, pair.first) = 1.0;
  return frame.basis * x * frame.basis.adjoint();
}

SuperMatrix ideal_dnp_cycle(DnpKind kind, const SpinSystemParams& sys,
                            const RelaxationParams& r, double pulse_angle, double dt) {
  const DriftFrame frame = drift_frame(sys);
  Matrix4c gen;
  if (kind == DnpKind::Overhauser)
    gen = transition_generator(frame, 1) + transition_generator(frame, 2);
  else
    gen = transition_generator(frame, 3);
  const Matrix4c u = propagator(0.5 * pulse_angle * gen, 1.0);

  // The zero-quantum channel runs in both cycles; it is what sustains the
  // steady zero-quantum coherence of the solid-effect fixed point.
  SuperMatrix cycle = kraus_to_super(KrausSet{{u}});
  cycle = SuperMatrix{kraus_to_super(tx_channel(dt, r, sys, frame)).m * cycle.m};
  if (r.Tdq)
    cycle = SuperMatrix{kraus_to_super(tdq_channel(dt, r, sys, frame)).m * cycle.m};
  cycle = SuperMatrix{kraus_to_super(t1e_channel(dt, r, sys, frame)).m * cycle.m};
  return cycle;
}

SuperMatrix ideal_dnp_map(DnpKind kind, const SpinSystemParams& sys,
                          const RelaxationParams& r, double pulse_angle,
                          long long n_cycles, double dt) {
  if (n_cycles < 1) throw std::invalid_argument("n_cycles must be >= 1");
  return super_power(ideal_dnp_cycle(kind, sys, r, pulse_angle, dt), n_cycles);
}

// ---------------------------------------------------------------------------
// Closed-form reduced nuclear maps
// ---------------------------------------------------------------------------

namespace {

struct NuclearGeometry {
  Vector2c ket_ua, ket_ub, ket_da, ket_db;  // nuclear parts of the canonical basis
  double omega_u, omega_d;                  // intra-manifold gaps (Hz)
  Eigen::Vector3d axis_u, axis_d;           // effective field directions
  bool zq_is_ba;                            // zero-quantum pair is (up_b, dn_a)
};

// Kets carry the same deterministic sign convention as the drift frame
// (largest-magnitude entry real positive), so the closed-form operators and
// the frame-conjugated channels agree without relative signs.
Vector2c sign_fixed(Vector2c v) {
  const int imax = std::abs(v(0)) >= std::abs(v(1)) ? 0 : 1;
  if (v(imax).real() < 0) v = -v;
  return v;
}

Vector2c aligned_ket(double theta) {
  return sign_fixed(Vector2c(std::cos(theta / 2.0), std::sin(theta / 2.0)));
}

Vector2c anti_ket(double theta) {
  return sign_fixed(Vector2c(-std::sin(theta / 2.0), std::cos(theta / 2.0)));
}

NuclearGeometry nuclear_geometry(const SpinSystemParams& sys) {
  sys.validate();
  NuclearGeometry g;
  const double zu = sys.omega_I + sys.A / 2.0;
  const double zd = sys.omega_I - sys.A / 2.0;
  const double xu = sys.B / 2.0;
  const double xd = -sys.B / 2.0;
  const double theta_u = std::atan2(xu, zu);
  const double theta_d = std::atan2(xd, zd);
  g.omega_u = std::hypot(xu, zu);
  g.omega_d = std::hypot(xd, zd);
  g.axis_u = Eigen::Vector3d(std::sin(theta_u), 0.0, std::cos(theta_u));
  g.axis_d = Eigen::Vector3d(std::sin(theta_d), 0.0, std::cos(theta_d));

  const Vector2c up_low = anti_ket(theta_u);
  const Vector2c up_high = aligned_ket(theta_u);
  const Vector2c dn_low = anti_ket(theta_d);
  const Vector2c dn_high = aligned_ket(theta_d);

  // Same cross-manifold pairing rule as drift_frame: pair by maximal overlap.
  const bool straight = std::abs(std::cos((theta_u - theta_d) / 2.0)) >=
                        std::abs(std::sin((theta_u - theta_d) / 2.0));
  g.ket_ua = up_low;
  g.ket_ub = up_high;
  g.ket_da = straight ? dn_low : dn_high;
  g.ket_db = straight ? dn_high : dn_low;

  const double e_ua = sys.omega_S / 2.0 - g.omega_u / 2.0;
  const double e_ub = sys.omega_S / 2.0 + g.omega_u / 2.0;
  const double e_da = -sys.omega_S / 2.0 + (straight ? -g.omega_d : g.omega_d) / 2.0;
  const double e_db = -sys.omega_S / 2.0 + (straight ? g.omega_d : -g.omega_d) / 2.0;
  g.zq_is_ba = std::abs(e_ub - e_da) <= std::abs(e_ua - e_db);
  return g;
}

Matrix2c pauli_vec(const Eigen::Vector3d& n) {
  Matrix2c m;
  m << n.z(), complexd(n.x(), -n.y()), complexd(n.x(), n.y()), -n.z();
  return m;
}

// exp(-i pi Omega t n.sigma) — the manifold propagator in closed form.
Matrix2c manifold_propagator(double omega_hz, const Eigen::Vector3d& axis, double t) {
  const double phase = M_PI * omega_hz * t;
  if (omega_hz <= 0) return Matrix2c::Identity();
  return std::cos(phase) * Matrix2c::Identity() - kI * std::sin(phase) * pauli_vec(axis);
}

struct Factor {
  double amp;
  Matrix2c op;
};

}  // namespace

ReducedKraus analytic_reduced_kraus(DnpKind kind, double t, const SpinSystemParams& sys,
                                    const RelaxationParams& r) {
  r.validate();
  if (!std::isfinite(t) || t < 0) throw std::invalid_argument("t must be >= 0");
  const double fastest = (kind == DnpKind::Overhauser) ? std::min(r.T1e, r.Tzq) : r.T1e;
  if (t >= fastest)
    throw std::invalid_argument("analytic_reduced_kraus: t exceeds the relaxation time");
  if (t > fastest / 10.0) {
    static bool warned = false;
    if (!warned) {
      std::cerr << "warning: analytic reduced map requested at t = " << t
                << " s, outside its first-order validity\n";
      warned = true;
    }
  }

  const NuclearGeometry g = nuclear_geometry(sys);
  const double p = boltzmann_upper_weight(sys.omega_S, r.temperature);
  const double q = boltzmann_upper_weight(sys.omega_S - sys.omega_I, r.temperature);

  // First-order damping amplitudes: eps ~ 1 - t/T.
  const double e1 = 1.0 - t / r.T1e;
  const double ez = 1.0 - t / r.Tzq;
  const bool with_tx = (kind == DnpKind::Overhauser);

  const Matrix2c id = Matrix2c::Identity();
  const Matrix2c rot = g.ket_ua * g.ket_da.adjoint() + g.ket_ub * g.ket_db.adjoint();
  const Matrix2c kzq = g.zq_is_ba ? Matrix2c(g.ket_ub * g.ket_da.adjoint())
                                  : Matrix2c(g.ket_ua * g.ket_db.adjoint());
  const Matrix2c n_up_zq = g.zq_is_ba ? Matrix2c(g.ket_ub * g.ket_ub.adjoint())
                                      : Matrix2c(g.ket_ua * g.ket_ua.adjoint());
  const Matrix2c n_dn_zq = g.zq_is_ba ? Matrix2c(g.ket_da * g.ket_da.adjoint())
                                      : Matrix2c(g.ket_db * g.ket_db.adjoint());

  const Matrix2c u_up = manifold_propagator(g.omega_u, g.axis_u, t);
  const Matrix2c u_dn = manifold_propagator(g.omega_d, g.axis_d, t);

  // Electron-path factors, index 0 = up manifold, 1 = down.  The two
  // diagonal T1 branches act as the same (identity) nuclear operator and
  // merge into one Kraus term.
  std::vector<Factor> a_diag[2], b_diag[2];
  a_diag[0] = {{std::sqrt(p + (1.0 - p) * e1), id}};
  a_diag[1] = {{std::sqrt(p * e1 + (1.0 - p)), id}};
  const Factor a_up_from_dn{std::sqrt(p * (1.0 - e1)), rot};
  const Factor a_dn_from_up{std::sqrt((1.0 - p) * (1.0 - e1)), rot.adjoint()};

  if (with_tx) {
    b_diag[0] = {{std::sqrt(q), id},
                 {std::sqrt(1.0 - q), id + (std::sqrt(ez) - 1.0) * n_up_zq}};
    b_diag[1] = {{std::sqrt(q), id + (std::sqrt(ez) - 1.0) * n_dn_zq},
                 {std::sqrt(1.0 - q), id}};
  } else {
    b_diag[0] = {{1.0, id}};
    b_diag[1] = {{1.0, id}};
  }
  const Factor b_up_from_dn{with_tx ? std::sqrt(q * (1.0 - ez)) : 0.0, kzq};
  const Factor b_dn_from_up{with_tx ? std::sqrt((1.0 - q) * (1.0 - ez)) : 0.0,
                            kzq.adjoint()};

  const Matrix2c u_seg[2] = {u_up, u_dn};
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

  ReducedKraus out;
  out.set.ops.reserve(16);
  auto emit = [&](double amp, const Matrix2c& op, std::vector<std::size_t>& bucket) {
    if (amp <= 0.0) return;
    bucket.push_back(out.set.ops.size());
    out.set.ops.push_back(MatrixXc(amp * op));
  };

  for (int s_in = 0; s_in < 2; ++s_in) {
    for (int s_mid = 0; s_mid < 2; ++s_mid) {
      std::vector<Factor> bs;
      if (s_mid == s_in)
        bs = b_diag[s_in];
      else
        bs = {s_in == 1 ? b_up_from_dn : b_dn_from_up};
      for (int s_out = 0; s_out < 2; ++s_out) {
        std::vector<Factor> as;
        if (s_out == s_mid)
          as = a_diag[s_mid];
        else
          as = {s_mid == 1 ? a_up_from_dn : a_dn_from_up};
        for (const auto& b : bs)
          for (const auto& a : as) {
            const double amp = inv_sqrt2 * a.amp * b.amp;
            const Matrix2c op = a.op * b.op * u_seg[s_in];
            const bool t1_jump = (s_out != s_mid);
            const bool tx_jump = (s_mid != s_in);
            if (t1_jump && tx_jump)
              emit(amp, op, out.double_jump_idx);
            else if (t1_jump)
              emit(amp, op, out.t1_jump_idx);
            else if (tx_jump)
              emit(amp, op, out.tx_jump_idx);
            else
              emit(amp, op, out.nojump_idx);
          }
      }
    }
  }

  ReducedKrausParams& pr = out.params;
  pr.Gamma = p;
  pr.alpha = std::sqrt((1.0 - std::exp(-t / r.T1e)) / 2.0);
  pr.Gamma1 = 1.0 - 2.0 * p * (1.0 - std::exp(-t / r.T1e));
  pr.GammaX = q;
  pr.alpha_prime =
      std::exp(-t * (1.0 / r.T1e + 1.0 / r.Tzq)) * (std::exp(t / r.Tzq) - 1.0);
  pr.beta_plus = std::sqrt((p + (1.0 - p) * e1) / 2.0);
  pr.beta_minus = std::sqrt(((1.0 - p) + p * e1) / 2.0);
  pr.Delta_plus = u_up(0, 0) / u_up(1, 1);
  pr.Delta_minus = u_dn(0, 0) / u_dn(1, 1);
  pr.beta_prime_plus = with_tx ? std::sqrt(q) * pr.beta_plus : pr.beta_plus;
  pr.beta_prime_minus = with_tx ? std::sqrt(q) * pr.beta_minus : pr.beta_minus;
  pr.Delta_prime_plus = pr.Delta_plus;
  pr.Delta_prime_minus = pr.Delta_minus;
  const double wi = sys.omega_I;
  pr.eta_plus = std::sqrt(4 * sys.A * sys.A + 4 * sys.B * sys.B + 4 * sys.A * wi + wi * wi);
  pr.eta_minus = std::sqrt(4 * sys.A * sys.A + 4 * sys.B * sys.B - 4 * sys.A * wi + wi * wi);
  const double xs = phys::planck_h * sys.omega_S / (2.0 * phys::boltzmann_k * r.temperature);
  const double xzq = phys::planck_h * (sys.omega_S - sys.omega_I) /
                     (2.0 * phys::boltzmann_k * r.temperature);
  pr.gamma1 = std::exp(xs);
  pr.gammaX = std::exp(xzq);
  return out;
}

std::array<Matrix2c, 2> oe_short_time_jumps(double t, const SpinSystemParams& sys,
                                            const RelaxationParams& r) {
  const double q = boltzmann_upper_weight(sys.omega_S - sys.omega_I, r.temperature);
  const double scale = std::sqrt(t / (2.0 * r.Tzq));
  Matrix2c raise = Matrix2c::Zero();
  raise(0, 1) = 1.0;
  Matrix2c lower = Matrix2c::Zero();
  lower(1, 0) = 1.0;
  return {Matrix2c(scale * std::sqrt(1.0 - q) * raise),
          Matrix2c(scale * std::sqrt(q) * lower)};
}

EnhancementMetrics enhancement(const Matrix2c& rho_n, const SpinSystemParams& sys) {
  const double ref = thermal_nuclear_polarization(sys);
  if (std::abs(ref) < 1e-300)
    throw std::invalid_argument("enhancement: thermal nuclear polarization is zero");
  Matrix2c sz;
  sz << 1, 0, 0, -1;
  const double pol = (sz * rho_n).trace().real();  // <2 I_z>
  return EnhancementMetrics{pol, pol / ref, pol};
}

double polarizing_strength(const SuperMatrix& nuclear_map) {
  if (nuclear_map.dim() != 2)
    throw std::invalid_argument("polarizing_strength: nuclear (2-level) map expected");
  const Matrix2c mapped = dnp::apply(nuclear_map, MatrixXc(Matrix2c::Identity()));
  Matrix2c sz;
  sz << 1, 0, 0, -1;
  return ((sz * mapped).trace() / 2.0).real();
}

double thermal_nuclear_polarization(const SpinSystemParams& sys) {
  sys.validate();
  return std::tanh(phys::planck_h * sys.omega_I /
                   (2.0 * phys::boltzmann_k * sys.temperature));
}

double thermal_electron_polarization(const SpinSystemParams& sys) {
  sys.validate();
  return -std::tanh(phys::planck_h * sys.omega_S /
                    (2.0 * phys::boltzmann_k * sys.temperature));
}

double enhancement_cap(const SpinSystemParams& sys) {
  return sys.omega_S / sys.omega_I * (1.0 + 1e-6);
}

double asymptotic_nuclear_polarization(const SuperMatrix& cycle,
                                       const SpinSystemParams& sys) {
  Matrix4c rho;
  try {
    rho = fixed_point(cycle);
  } catch (const FixedPointDegenerate&) {
    const SuperMatrix longrun = super_power(cycle, 1LL << 22);
    rho = unvec(longrun.m * vec(MatrixXc(thermal_state(sys))), 4);
  }
  Matrix2c sz;
  sz << 1, 0, 0, -1;
  return (sz * partial_trace(rho, Subsystem::Nucleus)).trace().real();
}

double asymptotic_enhancement(const SuperMatrix& cycle, const SpinSystemParams& sys) {
  return asymptotic_nuclear_polarization(cycle, sys) / thermal_nuclear_polarization(sys);
}

}  // namespace dnp
