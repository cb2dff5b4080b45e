#include "foucault/reduced_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "foucault/error.hpp"
#include "foucault/io.hpp"
#include "foucault/rk4.hpp"

namespace foucault {

namespace {

constexpr double kTwist = 3.0 / 8.0;

struct Active {
  bool aniso = false, coriolis = false, twist = false, damping = false;
};

Active active_terms(FlowKind k) {
  switch (k) {
    case FlowKind::anisotropy: return {true, false, false, false};
    case FlowKind::coriolis: return {false, true, false, false};
    case FlowKind::twisting: return {false, false, true, false};
    case FlowKind::combined: return {true, true, true, false};
    case FlowKind::damped_combined: return {true, true, true, true};
  }
  throw ValidationError("unknown flow kind");
}

StokesRate eval(const StokesState& s, const PendulumConfig& c, Active a) {
  StokesRate d{0.0, 0.0, 0.0};
  if (a.coriolis) {
    d[0] += 2.0 * c.omega_rot * s.s2;
    d[1] -= 2.0 * c.omega_rot * s.s1;
  }
  if (a.twist) {
    const double w = kTwist * c.omega * s.s3;
    d[0] -= w * s.s2;
    d[1] += w * s.s1;
  }
  if (a.aniso) {
    d[1] -= c.delta_omega * s.s3;
    d[2] += c.delta_omega * s.s2;
  }
  if (a.damping) {
    const double sum = 0.5 * (c.gamma_x + c.gamma_y);
    const double diff = 0.5 * (c.gamma_x - c.gamma_y);
    d[0] -= diff * s.s0() + sum * s.s1;
    d[1] -= sum * s.s2;
    d[2] -= sum * s.s3;
  }
  return d;
}

}  // namespace

std::string_view to_string(FlowKind k) {
  switch (k) {
    case FlowKind::anisotropy: return "anisotropy";
    case FlowKind::coriolis: return "coriolis";
    case FlowKind::twisting: return "twisting";
    case FlowKind::combined: return "combined";
    case FlowKind::damped_combined: return "damped-combined";
  }
  return "?";
}

FlowKind flow_kind_from_string(std::string_view name) {
  for (auto k : {FlowKind::anisotropy, FlowKind::coriolis, FlowKind::twisting,
                 FlowKind::combined, FlowKind::damped_combined}) {
    if (name == to_string(k)) return k;
  }
  if (name == "damped_combined" || name == "damped") return FlowKind::damped_combined;
  throw ValidationError("unknown flow kind '" + std::string(name) + "'");
}

StokesRate rhs_conservative(const StokesState& s, const PendulumConfig& c) {
  return eval(s, c, active_terms(FlowKind::combined));
}

StokesRate rhs_damped(const StokesState& s, const PendulumConfig& c) {
  return eval(s, c, active_terms(FlowKind::damped_combined));
}

StokesRate rhs(const StokesState& s, const PendulumConfig& c, FlowKind kind) {
  return eval(s, c, active_terms(kind));
}

double hamiltonian_h(const StokesState& s, const PendulumConfig& c) {
  return c.delta_omega * s.s1 - 2.0 * c.omega_rot * s.s3 + (3.0 / 16.0) * c.omega * s.s3 * s.s3;
}

double Trajectory::max_h_drift() const {
  double m = 0.0;
  for (double h : h_values) m = std::max(m, std::abs(h - h_values.front()));
  return m;
}

double Trajectory::max_s0_drift() const {
  double m = 0.0;
  for (double v : s0_values) m = std::max(m, std::abs(v - s0_values.front()));
  return m;
}

StepLimit max_stable_step(const StokesState& s, const PendulumConfig& c, FlowKind kind) {
  const Active a = active_terms(kind);
  StepLimit out{std::numeric_limits<double>::infinity(), "none"};
  double fastest = 0.0;
  auto consider = [&](bool on, double rate, const char* name) {
    if (on && rate > fastest) {
      fastest = rate;
      out.limiting_rate = name;
    }
  };
  consider(a.aniso, std::abs(c.delta_omega), "|delta_omega|");
  consider(a.coriolis, 2.0 * std::abs(c.omega_rot), "2|Omega|");
  consider(a.twist, kTwist * c.omega * s.s0(), "(3/8) omega s0");
  consider(a.damping, 0.5 * (c.gamma_x + c.gamma_y), "(gamma_x + gamma_y)/2");
  if (fastest > 0.0) out.max_dt = 0.05 / fastest;
  return out;
}

namespace {

std::size_t checked_steps(const StokesState& init, const PendulumConfig& c, FlowKind kind,
                          double t_end, double dt) {
  validate(c);
  detail::require_finite(init.s1, "S1");
  detail::require_finite(init.s2, "S2");
  detail::require_finite(init.s3, "S3");
  detail::require_positive(dt, "dt");
  detail::require_finite(t_end, "t_end");
  if (t_end < 0.0) throw ValidationError("t_end must be non-negative");
  const StepLimit lim = max_stable_step(init, c, kind);
  if (dt > lim.max_dt * (1.0 + 1e-12)) {
    std::ostringstream os;
    os.precision(6);
    os << "dt = " << dt << " exceeds the stability guard " << lim.max_dt
       << " set by the rate " << lim.limiting_rate;
    throw ValidationError(os.str());
  }
  return t_end == 0.0 ? 0 : static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
}

}  // namespace

StokesState rk4_step(const StokesState& s, const PendulumConfig& c, FlowKind kind, double h) {
  const Active a = active_terms(kind);
  return StokesState::from_array(rk4_step<3>(s.as_array(), h, [&](const Vec<3>& y) {
    return eval(StokesState::from_array(y), c, a);
  }));
}

Trajectory integrate(const StokesState& init, const PendulumConfig& c, FlowKind kind,
                     double t_end, double dt) {
  const std::size_t n = checked_steps(init, c, kind, t_end, dt);
  const double h = n ? t_end / static_cast<double>(n) : 0.0;
  Trajectory tr;
  tr.times.reserve(n + 1);
  tr.states.reserve(n + 1);
  tr.h_values.reserve(n + 1);
  tr.s0_values.reserve(n + 1);
  auto record = [&](double t, const StokesState& s) {
    tr.times.push_back(t);
    tr.states.push_back(s);
    tr.h_values.push_back(hamiltonian_h(s, c));
    tr.s0_values.push_back(s.s0());
  };
  StokesState s = init;
  record(0.0, s);
  for (std::size_t i = 1; i <= n; ++i) {
    s = rk4_step(s, c, kind, h);
    record(i == n ? t_end : static_cast<double>(i) * h, s);
  }
  return tr;
}

StokesState propagate(const StokesState& init, const PendulumConfig& c, FlowKind kind,
                      double t_end, double dt) {
  const std::size_t n = checked_steps(init, c, kind, t_end, dt);
  const double h = n ? t_end / static_cast<double>(n) : 0.0;
  StokesState s = init;
  for (std::size_t i = 0; i < n; ++i) s = rk4_step(s, c, kind, h);
  return s;
}

double airy_precession_rate(const EllipseGeometry& e, const PendulumConfig& c) {
  validate(c);
  detail::require_finite(e.a, "ellipse semi-axis a");
  detail::require_finite(e.b, "ellipse semi-axis b");
  if (e.b < 0.0 || e.a < e.b) throw ValidationError("ellipse semi-axes must satisfy a >= b >= 0");
  const double sign = e.handedness == Handedness::counterclockwise ? 1.0 : -1.0;
  return sign * 3.0 * e.a * e.b * c.omega / (8.0 * c.length * c.length);
}

void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
  os << "t,s1,s2,s3,s0,H\n";
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const auto& s = tr.states[i];
    write_csv_row(os, {tr.times[i], s.s1, s.s2, s.s3, tr.s0_values[i], tr.h_values[i]});
  }
}

}  // namespace foucault
