#include "foucault/cartesian_reference.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include "foucault/error.hpp"
#include "foucault/io.hpp"
#include "foucault/reduced_dynamics.hpp"
#include "foucault/rk4.hpp"

namespace foucault {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Vec<4> pack(const ProjectedState& q) { return {q.u, q.v, q.du, q.dv}; }
ProjectedState unpack(const Vec<4>& y) { return {y[0], y[1], y[2], y[3]}; }

double height(double r2) {
  if (!(r2 < 1.0)) throw DomainError("bob reached the horizontal plane (theta >= pi/2)");
  return std::sqrt(1.0 - r2);
}

}  // namespace

std::array<double, 4> full_rhs(const SphericalState& s, const PendulumConfig& c) {
  if (!(s.theta < 0.5 * std::numbers::pi)) throw DomainError("theta >= pi/2");
  const double st = std::sin(s.theta), ct = std::cos(s.theta);
  if (st == 0.0) throw DomainError("azimuth equation is singular at theta = 0");
  const double w = s.alpha_dot + c.omega_rot;
  const double aniso = c.omega * c.delta_omega;
  const double thdd = st * ct * w * w - c.omega * c.omega * st - aniso * st * ct * std::cos(2.0 * s.alpha);
  const double aldd = aniso * std::sin(2.0 * s.alpha) - 2.0 * ct / st * s.theta_dot * w;
  return {s.theta_dot, s.alpha_dot, thdd, aldd};
}

std::array<double, 4> projected_rhs(const ProjectedState& q, const PendulumConfig& c) {
  const double r2 = q.u * q.u + q.v * q.v;
  const double w = height(r2);
  const double om = c.omega_rot;
  const double w2 = c.omega * c.omega;
  const double aniso = c.omega * c.delta_omega;
  // horizontal force per unit mass, gravity already projected through 1/w
  const double ax = 2.0 * om * q.dv + om * om * q.u - w2 * q.u / w - aniso * q.u;
  const double ay = -2.0 * om * q.du + om * om * q.v - w2 * q.v / w + aniso * q.v;
  const double s = q.u * q.du + q.v * q.dv;
  const double lambda = q.du * q.du + q.dv * q.dv + q.u * ax + q.v * ay + s * s / (w * w);
  return {q.du, q.dv, ax - q.u * lambda, ay - q.v * lambda};
}

ProjectedState to_projected(const SphericalState& s) {
  const double st = std::sin(s.theta), ct = std::cos(s.theta);
  const double ca = std::cos(s.alpha), sa = std::sin(s.alpha);
  return {st * ca, st * sa, ct * ca * s.theta_dot - st * sa * s.alpha_dot,
          ct * sa * s.theta_dot + st * ca * s.alpha_dot};
}

SphericalState to_spherical(const ProjectedState& q) {
  const double r2 = q.u * q.u + q.v * q.v;
  const double r = std::sqrt(r2);
  const double w = height(r2);
  SphericalState s;
  s.theta = std::asin(std::min(r, 1.0));
  s.alpha = std::atan2(q.v, q.u);
  if (r > 0.0) {
    const double rdot = (q.u * q.du + q.v * q.dv) / r;
    s.theta_dot = rdot / w;
    s.alpha_dot = (q.u * q.dv - q.v * q.du) / r2;
  }
  return s;
}

double jacobi_energy(const ProjectedState& q, const PendulumConfig& c) {
  const double r2 = q.u * q.u + q.v * q.v;
  const double w = height(r2);
  const double s = q.u * q.du + q.v * q.dv;
  return 0.5 * (q.du * q.du + q.dv * q.dv) + 0.5 * s * s / (w * w) -
         0.5 * c.omega_rot * c.omega_rot * r2 - c.omega * c.omega * w +
         0.5 * c.omega * c.delta_omega * (q.u * q.u - q.v * q.v);
}

double excitation_energy(const ProjectedState& q, const PendulumConfig& c) {
  return jacobi_energy(q, c) + c.omega * c.omega;
}

double vertical_angular_momentum(const ProjectedState& q, const PendulumConfig& c) {
  return q.u * q.dv - q.v * q.du + c.omega_rot * (q.u * q.u + q.v * q.v);
}

ProjectedState seed_from_stokes(const StokesState& s, const PendulumConfig& c) {
  validate(c);
  const EllipseGeometry e = ellipse_from_stokes(s, c.length).ellipse;
  const PhaseSample p = phase_point_on_ellipse(e, c.omega, 0.0);
  const double L = c.length;
  ProjectedState q{p.x / L, p.y / L, p.vx / L, p.vy / L};
  q.du += c.omega_rot * q.v;
  q.dv -= c.omega_rot * q.u;
  return q;
}

PhaseSample CartesianTrajectory::inertial_sample(std::size_t i, double omega_rot) const {
  return {x[i], y[i], xdot[i] - omega_rot * y[i], ydot[i] + omega_rot * x[i]};
}

CartesianTrajectory integrate_full(const ProjectedState& init, const PendulumConfig& c,
                                   double t_end, double dt) {
  validate(c);
  detail::require_positive(dt, "dt");
  detail::require_finite(t_end, "t_end");
  if (t_end < 0.0) throw ValidationError("t_end must be non-negative");
  const double guard = kTwoPi / (kMinFullStepsPerPeriod * c.omega);
  if (dt > guard * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "dt = " << dt << " exceeds 2 pi / (64 omega) = " << guard;
    throw ValidationError(os.str());
  }
  height(init.u * init.u + init.v * init.v);

  const auto n = t_end == 0.0 ? std::size_t{0}
                              : static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
  const double h = n ? t_end / static_cast<double>(n) : 0.0;
  const double L = c.length;
  CartesianTrajectory tr;
  for (auto* v : {&tr.t, &tr.x, &tr.y, &tr.xdot, &tr.ydot, &tr.energy, &tr.angular_momentum}) {
    v->reserve(n + 1);
  }
  auto record = [&](double t, const ProjectedState& q) {
    tr.t.push_back(t);
    tr.x.push_back(L * q.u);
    tr.y.push_back(L * q.v);
    tr.xdot.push_back(L * q.du);
    tr.ydot.push_back(L * q.dv);
    tr.energy.push_back(excitation_energy(q, c));
    tr.angular_momentum.push_back(vertical_angular_momentum(q, c));
  };
  Vec<4> y = pack(init);
  record(0.0, init);
  auto f = [&](const Vec<4>& s) { return projected_rhs(unpack(s), c); };
  for (std::size_t i = 1; i <= n; ++i) {
    y = rk4_step<4>(y, h, f);
    record(i == n ? t_end : static_cast<double>(i) * h, unpack(y));
  }
  return tr;
}

CartesianTrajectory integrate_full(const SphericalState& init, const PendulumConfig& c,
                                   double t_end, double dt) {
  if (!(init.theta < 0.5 * std::numbers::pi) || init.theta < 0.0) {
    throw DomainError("initial theta must lie in [0, pi/2)");
  }
  return integrate_full(to_projected(init), c, t_end, dt);
}

namespace {

// One-period Stokes averages of a full trajectory starting every `stride`
// samples. Returns (centre time, state) pairs.
std::vector<std::pair<double, StokesState>> windowed_stokes(const CartesianTrajectory& tr,
                                                            const PendulumConfig& c,
                                                            std::size_t per_period,
                                                            std::size_t stride,
                                                            StokesEstimator est) {
  const double period = kTwoPi / c.omega;
  const double h = tr.t[1] - tr.t[0];
  std::vector<PhaseSample> win(per_period + 1);
  std::vector<std::pair<double, StokesState>> out;
  for (std::size_t start = 0; start + per_period < tr.size(); start += stride) {
    for (std::size_t i = 0; i <= per_period; ++i) {
      win[i] = tr.inertial_sample(start + i, c.omega_rot);
    }
    const StokesState s =
        est == StokesEstimator::osculating
            ? osculating_stokes_average(win, h, period, c.omega, c.length)
            : stokes_from_trajectory(win, h, period, c.length);
    out.emplace_back(tr.t[start] + 0.5 * period, s);
  }
  return out;
}

double linear_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace

ComparisonReport compare_reduced_full(const StokesState& init, const PendulumConfig& c,
                                      double t_end, const CompareOptions& opt) {
  validate(c);
  detail::require_positive(t_end, "t_end");
  if (opt.samples_per_period < kMinFullStepsPerPeriod || opt.samples_per_period != std::floor(opt.samples_per_period) ||
      std::fmod(opt.samples_per_period, 4.0) != 0.0) {
    throw ValidationError("samples_per_period must be a multiple of 4 and at least 64");
  }
  ComparisonReport rep;
  rep.s0 = init.s0();
  rep.out_of_regime = rep.s0 > kComparisonRegimeS0;

  const double period = kTwoPi / c.omega;
  const auto per_period = static_cast<std::size_t>(opt.samples_per_period);
  const std::size_t stride = per_period / 4;
  const double quarter = 0.25 * period;
  const auto n_quarters = static_cast<std::size_t>(std::floor(t_end / quarter + 1e-9));
  if (n_quarters < 2) throw ValidationError("t_end must cover at least half a period");

  // full run long enough that the last window centred at or before t_end is complete
  const double t_full = static_cast<double>(n_quarters + 2) * quarter;
  const auto full = integrate_full(seed_from_stokes(init, c), c, t_full,
                                   period / opt.samples_per_period);
  const auto windows = windowed_stokes(full, c, per_period, stride, opt.estimator);

  PendulumConfig cons = c;
  cons.gamma_x = cons.gamma_y = 0.0;
  const double guard = std::min(max_stable_step(init, cons, FlowKind::combined).max_dt, period / 64.0);
  const auto sub = static_cast<std::size_t>(std::ceil(quarter / guard - 1e-9));
  const double h = quarter / static_cast<double>(sub);

  StokesState red = init;
  std::size_t q = 0;
  for (const auto& [tc, sf] : windows) {
    if (tc > t_end * (1.0 + 1e-12)) break;
    const auto target = static_cast<std::size_t>(std::llround(tc / quarter));
    for (; q < target; ++q) {
      for (std::size_t k = 0; k < sub; ++k) red = rk4_step(red, cons, FlowKind::combined, h);
    }
    const double d = std::hypot(red.s1 - sf.s1, red.s2 - sf.s2, red.s3 - sf.s3) / rep.s0;
    rep.window_centers.push_back(tc);
    rep.reduced.push_back(red);
    rep.full.push_back(sf);
    rep.deviations.push_back(d);
    rep.max_deviation = std::max(rep.max_deviation, d);
  }
  return rep;
}

FrequencySplit measure_frequency_split(const PendulumConfig& c, double s0, double periods) {
  validate(c);
  detail::require_positive(s0, "s0");
  detail::require_positive(periods, "periods");
  PendulumConfig planar = c;
  planar.omega_rot = 0.0;
  const double amp = std::sqrt(s0);
  const double dt = kTwoPi / (256.0 * c.omega);

  auto measure = [&](bool along_x) {
    ProjectedState q;
    (along_x ? q.u : q.v) = amp;
    const auto tr = integrate_full(q, planar, periods * kTwoPi / c.omega, dt);
    const auto& z = along_x ? tr.x : tr.y;
    const auto& zd = along_x ? tr.xdot : tr.ydot;
    std::vector<double> crossings;
    for (std::size_t i = 1; i < tr.size(); ++i) {
      if ((z[i - 1] < 0.0) != (z[i] < 0.0)) {
        // cubic Hermite root on the step, refined by Newton from the linear guess
        const double h = tr.t[i] - tr.t[i - 1];
        double s = z[i - 1] / (z[i - 1] - z[i]);
        for (int it = 0; it < 8; ++it) {
          const double s2 = s * s, s3 = s2 * s;
          const double val = (2 * s3 - 3 * s2 + 1) * z[i - 1] + (s3 - 2 * s2 + s) * h * zd[i - 1] +
                             (-2 * s3 + 3 * s2) * z[i] + (s3 - s2) * h * zd[i];
          const double der = (6 * s2 - 6 * s) * z[i - 1] + (3 * s2 - 4 * s + 1) * h * zd[i - 1] +
                             (-6 * s2 + 6 * s) * z[i] + (3 * s2 - 2 * s) * h * zd[i];
          if (der == 0.0) break;
          s -= val / der;
        }
        crossings.push_back(tr.t[i - 1] + s * h);
      }
    }
    if (crossings.size() < 3) throw ValidationError("run too short to measure a frequency");
    const double half = (crossings.back() - crossings.front()) / static_cast<double>(crossings.size() - 1);
    return std::numbers::pi / half;
  };
  FrequencySplit out;
  out.omega_x = measure(true);
  out.omega_y = measure(false);
  out.split = out.omega_x - out.omega_y;
  return out;
}

double measure_orbit_precession(const StokesState& init, const PendulumConfig& c, double t_end) {
  validate(c);
  const double period = kTwoPi / c.omega;
  const auto tr = integrate_full(seed_from_stokes(init, c), c, t_end + period, period / 128.0);
  const auto windows = windowed_stokes(tr, c, 128, 32, StokesEstimator::osculating);
  std::vector<double> t, psi;
  double prev = 0.0, offset = 0.0;
  for (const auto& [tc, s] : windows) {
    double p = 0.5 * std::atan2(s.s2, s.s1);
    if (!psi.empty()) {
      while (p + offset - prev > 0.5 * std::numbers::pi) offset -= std::numbers::pi;
      while (p + offset - prev < -0.5 * std::numbers::pi) offset += std::numbers::pi;
    }
    prev = p + offset;
    t.push_back(tc);
    psi.push_back(prev);
  }
  if (t.size() < 2) throw ValidationError("run too short to measure a precession rate");
  return linear_slope(t, psi);
}

void write_cartesian_csv(std::ostream& os, const CartesianTrajectory& tr) {
  os << "t,x,y,xdot,ydot\n";
  for (std::size_t i = 0; i < tr.size(); ++i) {
    write_csv_row(os, {tr.t[i], tr.x[i], tr.y[i], tr.xdot[i], tr.ydot[i]});
  }
}

nlohmann::json to_json(const ComparisonReport& r) {
  nlohmann::json windows = nlohmann::json::array();
  for (std::size_t i = 0; i < r.deviations.size(); ++i) {
    windows.push_back({{"t", r.window_centers[i]},
                       {"reduced", {r.reduced[i].s1, r.reduced[i].s2, r.reduced[i].s3}},
                       {"full", {r.full[i].s1, r.full[i].s2, r.full[i].s3}},
                       {"deviation", r.deviations[i]}});
  }
  return {{"s0", r.s0},
          {"out_of_regime", r.out_of_regime},
          {"max_deviation", r.max_deviation},
          {"windows", windows}};
}

}  // namespace foucault
