#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "foucault/cartesian_reference.hpp"
#include "foucault/error.hpp"
#include "foucault/reduced_dynamics.hpp"

using namespace foucault;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

PendulumConfig cfg(double dw, double W) {
  PendulumConfig c;
  c.delta_omega = dw;
  c.omega_rot = W;
  return c;
}

double max_rel_drift(const std::vector<double>& v) {
  double m = 0.0;
  for (double e : v) m = std::max(m, std::abs(e - v.front()));
  return m / std::abs(v.front());
}

}  // namespace

TEST_CASE("spherical and projected equations agree") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const auto c = cfg(0.05 * u(rng), 0.05 * u(rng));
    const SphericalState s{0.2 + 0.6 * std::abs(u(rng)), 3.0 * u(rng), 0.3 * u(rng), 0.8 * u(rng)};
    const auto d = full_rhs(s, c);
    const auto q = projected_rhs(to_projected(s), c);
    // differentiate the map (theta, alpha) -> (u, v) along the flow
    const double h = 1e-6;
    auto shifted = [&](double k) {
      return to_projected({s.theta + k * d[0], s.alpha + k * d[1], s.theta_dot + k * d[2],
                           s.alpha_dot + k * d[3]});
    };
    const auto p = shifted(h), m = shifted(-h);
    CHECK(q[0] == Approx((p.u - m.u) / (2 * h)).epsilon(1e-7));
    CHECK(q[1] == Approx((p.v - m.v) / (2 * h)).epsilon(1e-7));
    CHECK(q[2] == Approx((p.du - m.du) / (2 * h)).epsilon(1e-6));
    CHECK(q[3] == Approx((p.dv - m.dv) / (2 * h)).epsilon(1e-6));
  }
}

TEST_CASE("coordinate round trip") {
  const SphericalState s{0.4, 1.2, -0.1, 0.3};
  const auto b = to_spherical(to_projected(s));
  CHECK(b.theta == Approx(s.theta));
  CHECK(b.alpha == Approx(s.alpha));
  CHECK(b.theta_dot == Approx(s.theta_dot));
  CHECK(b.alpha_dot == Approx(s.alpha_dot));
}

TEST_CASE("domain errors") {
  CHECK_THROWS_AS(full_rhs({kPi / 2, 0, 0, 0}, cfg(0, 0)), DomainError);
  CHECK_THROWS_AS(full_rhs({0.0, 0, 0, 0}, cfg(0, 0)), DomainError);
  CHECK_THROWS_AS(integrate_full(SphericalState{1.6, 0, 0, 0}, cfg(0, 0), 1.0, 0.05), DomainError);
  CHECK_THROWS_AS(integrate_full(ProjectedState{0.1, 0, 0, 0}, cfg(0, 0), 1.0, 0.2), ValidationError);
  // a swing energetic enough to pass the horizontal plane
  CHECK_THROWS_AS(integrate_full(ProjectedState{0.0, 0, 3.0, 0}, cfg(0, 0), 10.0, 0.01), DomainError);
}

TEST_CASE("plane pendulum frequency") {
  const auto tr = integrate_full(ProjectedState{0.01, 0, 0, 0}, cfg(0, 0), 2 * kPi, 2 * kPi / 1024);
  CHECK(tr.x.back() == Approx(0.01).epsilon(1e-4));
  CHECK(std::abs(tr.y.back()) < 1e-15);
}

TEST_CASE("conical pendulum keeps its polar angle") {
  const double theta = 0.1;
  const double rate = std::sqrt(1.0 / std::cos(theta));
  const auto tr =
      integrate_full(SphericalState{theta, 0.0, 0.0, rate}, cfg(0, 0), 200 * kPi, 2 * kPi / 256);
  double worst = 0.0;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    worst = std::max(worst, std::abs(std::asin(std::hypot(tr.x[i], tr.y[i])) - theta));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("energy conservation") {
  const auto c = cfg(0.02, 0.01);
  const auto init = seed_from_stokes({0.02, 0.01, 0.03}, c);
  const double periods = 100;
  const auto fine = integrate_full(init, c, periods * 2 * kPi, 2 * kPi / 512);
  CHECK(max_rel_drift(fine.energy) < 1e-8);

  // at 256 steps per period the drift is the RK4 amplitude error (w h)^6 / 72 per step
  const double h = 2 * kPi / 256;
  const auto coarse = integrate_full(init, c, periods * 2 * kPi, h);
  const double predicted = 2.0 * 256 * periods * std::pow(h, 6) / 72.0;
  const double drift = max_rel_drift(coarse.energy);
  CHECK(drift > 0.5 * predicted);
  CHECK(drift < 1.5 * predicted);
}

TEST_CASE("vertical angular momentum without anisotropy") {
  const auto c = cfg(0, 0.01);
  const auto init = seed_from_stokes({0.03, 0.0, 0.02}, c);
  const auto tr = integrate_full(init, c, 100 * 2 * kPi, 2 * kPi / 1024);
  CHECK(max_rel_drift(tr.angular_momentum) < 1e-10);
}

TEST_CASE("frequency split") {
  const auto c = cfg(0.02, 0.0);
  const auto small = measure_frequency_split(c, 0.001);
  CHECK(small.split == Approx(0.02).epsilon(0.002));
  CHECK(small.omega_x > small.omega_y);
  // finite-amplitude correction split = dw (1 - 7 s0 / 16)
  for (double s0 : {0.02, 0.05, 0.1}) {
    const auto f = measure_frequency_split(c, s0);
    CHECK(f.split / 0.02 == Approx(1.0 - 7.0 * s0 / 16.0).epsilon(2e-3));
  }
}

TEST_CASE("orbit precession") {
  SUBCASE("linear orbit turns at -Omega") {
    const double rate = measure_orbit_precession({0.05, 0, 0}, cfg(0, 0.01), 50 * 2 * kPi);
    CHECK(rate == Approx(-0.01).epsilon(0.02));
  }
  SUBCASE("Airy rate at s0 = 0.05") {
    const StokesState s{0.04, 0.0, 0.03};
    const double rate = measure_orbit_precession(s, cfg(0, 0), 50 * 2 * kPi);
    CHECK(rate == Approx(3.0 / 16.0 * s.s3).epsilon(0.02));
  }
  SUBCASE("apsidal precession for a = 0.2 L, b = 0.1 L") {
    const auto s = stokes_from_ellipse({0.2, 0.1, 0.0, Handedness::counterclockwise}, 1.0);
    const double rate = measure_orbit_precession(s, cfg(0, 0), 20 * 2 * kPi);
    CHECK(rate == Approx(3.0 * 0.2 * 0.1 / 8.0).epsilon(0.05));
  }
}

TEST_CASE("reduced model tracks the full model") {
  SUBCASE("desk-scale example") {
    const auto r = compare_reduced_full({0.1, 0, 0}, cfg(0.02, 0.01), 50 * 2 * kPi);
    CHECK_FALSE(r.out_of_regime);
    CHECK(r.window_centers.size() == r.deviations.size());
    CHECK(r.max_deviation < 0.1);
  }
  SUBCASE("small amplitude") {
    const auto r = compare_reduced_full({0.05, 0, 0}, cfg(0.02, 0.01), 50 * 2 * kPi);
    CHECK(r.max_deviation < 0.05);
  }
  SUBCASE("Airy term only") {
    const auto r = compare_reduced_full({0.006, 0.0, 0.008}, cfg(0, 0), 50 * 2 * kPi);
    CHECK(r.max_deviation < 0.005);
  }
  SUBCASE("single flows at s0 = 0.3") {
    CHECK(compare_reduced_full({0.3, 0, 0}, cfg(0.02, 0), 50 * 2 * kPi).max_deviation < 0.05);
    CHECK(compare_reduced_full({0.3, 0, 0}, cfg(0, 0.01), 50 * 2 * kPi).max_deviation < 0.05);
  }
  SUBCASE("out of regime flag") {
    const auto r = compare_reduced_full({0.6, 0, 0}, cfg(0.02, 0.01), 4 * 2 * kPi);
    CHECK(r.out_of_regime);
  }
}

TEST_CASE("deviation grows with amplitude") {
  double prev = 0.0;
  for (double s0 : {0.05, 0.1, 0.2}) {
    const double d = compare_reduced_full({s0, 0, 0}, cfg(0.02, 0.01), 50 * 2 * kPi).max_deviation;
    CHECK(d > prev);
    prev = d;
  }
}

TEST_CASE("covariance estimator is selectable") {
  CompareOptions opt;
  opt.estimator = StokesEstimator::covariance;
  const auto r = compare_reduced_full({0.01, 0, 0}, cfg(0, 0), 10 * 2 * kPi, opt);
  CHECK(r.max_deviation < 0.01);
}

TEST_CASE("outputs") {
  const auto tr = integrate_full(ProjectedState{0.01, 0, 0, 0}, cfg(0, 0), 1.0, 0.05);
  std::ostringstream os;
  write_cartesian_csv(os, tr);
  CHECK(os.str().rfind("t,x,y,xdot,ydot\n", 0) == 0);
  const auto r = compare_reduced_full({0.01, 0, 0}, cfg(0, 0), 4 * 2 * kPi);
  const auto j = to_json(r);
  CHECK(j.contains("max_deviation"));
  CHECK(j.contains("out_of_regime"));
  CHECK(j.at("windows").size() == r.deviations.size());
}
