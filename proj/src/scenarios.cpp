#include "foucault/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "foucault/error.hpp"
#include "foucault/io.hpp"
#include "foucault/parallel.hpp"
#include "foucault/quantum_lmg.hpp"
#include "foucault/reduced_dynamics.hpp"

namespace foucault {

namespace {

struct Neumaier {
  double sum = 0.0, comp = 0.0;
  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + comp; }
};

void require_trapping_config(const PendulumConfig& c) {
  validate(c);
  if (c.omega_rot != 0.0) throw ValidationError("self-trapping demo requires Omega = 0");
  if (c.delta_omega == 0.0) throw ValidationError("self-trapping demo requires delta_omega != 0");
}

}  // namespace

double zeno_run(const ZenoProtocol& p) {
  if (p.n_filters < 0) throw ValidationError("n_filters must be non-negative");
  detail::require_positive(p.omega, "omega");
  detail::require_positive(p.omega_rot, "omega_rot");
  detail::require_positive(p.gamma_filter, "gamma_filter");
  detail::require_positive(p.filter_duration, "filter_duration");
  if (p.gamma_filter * p.filter_duration < kMinFilterQuality) {
    std::ostringstream os;
    os << "filter quality gamma * duration = " << p.gamma_filter * p.filter_duration
       << " is below " << kMinFilterQuality;
    throw ValidationError(os.str());
  }

  PendulumConfig rot;
  rot.omega = p.omega;
  rot.omega_rot = p.omega_rot;
  PendulumConfig filt;
  filt.omega = p.omega;
  filt.gamma_x = p.gamma_filter;

  const StokesState start{-1.0, 0.0, 0.0};
  StokesState s = start;
  auto filter = [&] {
    const double dt = max_stable_step(s, filt, FlowKind::damped_combined).max_dt;
    s = propagate(s, filt, FlowKind::damped_combined, p.filter_duration, dt);
  };
  if (p.n_filters == 0) {
    const double t = std::numbers::pi / (2.0 * p.omega_rot);
    s = propagate(s, rot, FlowKind::coriolis, t, max_stable_step(s, rot, FlowKind::coriolis).max_dt);
    return s.s0() / start.s0();
  }
  const double segment = std::numbers::pi / (2.0 * p.omega_rot * p.n_filters);
  filter();
  for (int i = 0; i < p.n_filters; ++i) {
    const double dt = std::min(max_stable_step(s, rot, FlowKind::coriolis).max_dt, segment / 16.0);
    s = propagate(s, rot, FlowKind::coriolis, segment, dt);
    filter();
  }
  return s.s0() / start.s0();
}

double zeno_ideal_fraction(int n_filters) {
  if (n_filters < 0) throw ValidationError("n_filters must be non-negative");
  if (n_filters == 0) return 1.0;
  double f = 1.0;
  const double c = std::cos(std::numbers::pi / (2.0 * n_filters));
  for (int i = 0; i < n_filters; ++i) f *= c * c;
  return f;
}

double SqueezeWindow::mid() const { return std::sqrt(lower * upper); }

SqueezeWindow squeeze_window(const EnsembleSpec& e, const PendulumConfig& c) {
  return {8.0 / (3.0 * c.omega * e.s0), 4.0 / (3.0 * c.omega * e.spread)};
}

std::vector<StokesState> sample_ensemble(const EnsembleSpec& e) {
  if (e.n_members < 2) throw ValidationError("ensemble needs at least two members");
  detail::require_positive(e.s0, "ensemble s0");
  detail::require_positive(e.spread, "ensemble spread");
  if (e.spread > 0.05 * e.s0) throw ValidationError("ensemble spread must not exceed 0.05 s0");
  std::vector<StokesState> out(e.n_members);
  for (std::size_t i = 0; i < e.n_members; ++i) {
    std::mt19937_64 rng(derive_seed(e.seed, i));
    std::normal_distribution<double> g(0.0, e.spread);
    const double s2 = g(rng);
    const double s3 = g(rng);
    const double scale = e.s0 / std::hypot(e.s0, s2, s3);
    out[i] = {e.s0 * scale, s2 * scale, s3 * scale};
  }
  return out;
}

Covariance2 covariance_s23(const std::vector<StokesState>& members) {
  if (members.size() < 2) throw ValidationError("covariance needs at least two members");
  const double n = static_cast<double>(members.size());
  Neumaier m2, m3;
  for (const auto& s : members) {
    m2.add(s.s2);
    m3.add(s.s3);
  }
  const double mean2 = m2.value() / n, mean3 = m3.value() / n;
  Neumaier a, b, c;
  for (const auto& s : members) {
    const double d2 = s.s2 - mean2, d3 = s.s3 - mean3;
    a.add(d2 * d2);
    b.add(d3 * d3);
    c.add(d2 * d3);
  }
  Covariance2 out;
  out.var_a = a.value() / (n - 1.0);
  out.var_b = b.value() / (n - 1.0);
  out.cov = c.value() / (n - 1.0);
  const double half_sum = 0.5 * (out.var_a + out.var_b);
  const double rad = std::hypot(0.5 * (out.var_a - out.var_b), out.cov);
  out.major = std::sqrt(std::max(half_sum + rad, 0.0));
  out.minor = std::sqrt(std::max(half_sum - rad, 0.0));
  double ang = 0.5 * std::atan2(2.0 * out.cov, out.var_a - out.var_b);
  if (ang <= -0.5 * std::numbers::pi) ang += std::numbers::pi;
  out.angle = ang;
  return out;
}

SqueezeResult squeeze_ensemble(const EnsembleSpec& e, const PendulumConfig& c, double tau,
                               unsigned threads) {
  validate(c);
  detail::require_finite(tau, "tau");
  if (tau < 0.0) throw ValidationError("tau must be non-negative");
  SqueezeResult r;
  const SqueezeWindow w = squeeze_window(e, c);
  if (tau > 10.0 * w.upper) {
    std::ostringstream os;
    os << "tau = " << tau << " is more than ten times the squeezing window end " << w.upper;
    throw DomainError(os.str());
  }
  if (tau <= w.lower) {
    std::ostringstream os;
    os << "tau = " << tau << " is not large compared with 8/(3 omega s0) = " << w.lower
       << "; the ensemble is barely sheared";
    r.warnings.push_back(os.str());
  }
  if (tau > w.upper) {
    std::ostringstream os;
    os << "tau = " << tau << " exceeds 4/(3 omega spread) = " << w.upper
       << "; the ensemble no longer looks elliptical";
    r.warnings.push_back(os.str());
  }

  r.members = sample_ensemble(e);
  PendulumConfig twist;
  twist.omega = c.omega;
  twist.length = c.length;
  twist.mass = c.mass;
  const double dt = max_stable_step({e.s0, 0.0, 0.0}, twist, FlowKind::twisting).max_dt;
  parallel_for(r.members.size(), [&](std::size_t i) {
    r.members[i] = propagate(r.members[i], twist, FlowKind::twisting, tau, dt);
  }, threads);

  const Covariance2 cov = covariance_s23(r.members);
  r.var_s2 = cov.var_a;
  r.var_s3 = cov.var_b;
  r.cov_s23 = cov.cov;
  r.delta_plus = cov.major;
  r.delta_minus = cov.minor;
  r.alpha = cov.angle;
  return r;
}

std::vector<StokesState> derotate_ensemble(const std::vector<StokesState>& members, double angle) {
  detail::require_finite(angle, "angle");
  const double c = std::cos(angle), s = std::sin(angle);
  std::vector<StokesState> out(members.size());
  for (std::size_t i = 0; i < members.size(); ++i) {
    const auto& m = members[i];
    out[i] = {m.s1, c * m.s2 + s * m.s3, -s * m.s2 + c * m.s3};
  }
  return out;
}

void write_ensemble_csv(std::ostream& os, const std::vector<StokesState>& members) {
  os << "member,s1,s2,s3\n";
  for (std::size_t i = 0; i < members.size(); ++i) {
    os << i << ',';
    write_csv_row(os, {members[i].s1, members[i].s2, members[i].s3});
  }
}

TrappingRun self_trapping_run(const PendulumConfig& c, double s0, double t_end) {
  require_trapping_config(c);
  detail::require_positive(s0, "s0");
  if (t_end <= 0.0) t_end = 10.0 * 2.0 * std::numbers::pi / std::abs(c.delta_omega);
  PendulumConfig cons = c;
  cons.gamma_x = cons.gamma_y = 0.0;
  StokesState s{0.0, 0.0, s0};
  const double guard = max_stable_step(s, cons, FlowKind::combined).max_dt;
  const auto n = static_cast<std::size_t>(std::ceil(t_end / guard));
  const double h = t_end / static_cast<double>(n);
  TrappingRun run;
  run.s0 = s0;
  run.min_abs_s3 = s0;
  for (std::size_t i = 1; i <= n; ++i) {
    s = rk4_step(s, cons, FlowKind::combined, h);
    run.min_abs_s3 = std::min(run.min_abs_s3, std::abs(s.s3));
    if (!run.flipped && s.s3 <= 0.0) {
      run.flipped = true;
      run.first_flip_time = static_cast<double>(i) * h;
    }
  }
  return run;
}

TrappingDemo self_trapping_demo(const PendulumConfig& c, double s0_sub, double s0_super,
                                double t_end) {
  return {self_trapping_run(c, s0_sub, t_end), self_trapping_run(c, s0_super, t_end)};
}

double self_trapping_transition(const PendulumConfig& c, double lo, double hi, double rel_tol,
                                double t_end) {
  require_trapping_config(c);
  detail::require_positive(lo, "lower s0");
  detail::require_positive(rel_tol, "rel_tol");
  if (!(hi > lo)) throw ValidationError("bisection bracket must satisfy hi > lo");
  if (!self_trapping_run(c, lo, t_end).flipped) {
    throw DomainError("lower bracket end does not flip");
  }
  if (self_trapping_run(c, hi, t_end).flipped) {
    throw DomainError("upper bracket end is not self-trapped");
  }
  while (hi - lo > rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    (self_trapping_run(c, mid, t_end).flipped ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace foucault
