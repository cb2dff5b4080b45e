#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "foucault/error.hpp"
#include "foucault/scenarios.hpp"
#include "foucault/stationary.hpp"

using namespace foucault;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

double stddev_s3(const std::vector<StokesState>& m) {
  return std::sqrt(covariance_s23(m).var_b);
}

}  // namespace

TEST_CASE("zeno ideal fraction") {
  CHECK(zeno_ideal_fraction(0) == 1.0);
  CHECK(zeno_ideal_fraction(1) == Approx(0.0).epsilon(1e-30));
  CHECK(zeno_ideal_fraction(2) == Approx(0.25));
  double prod = 1.0;
  for (int i = 0; i < 32; ++i) prod *= std::cos(kPi / 64) * std::cos(kPi / 64);
  CHECK(zeno_ideal_fraction(32) == Approx(prod).epsilon(1e-14));
}

TEST_CASE("zeno protocol") {
  ZenoProtocol p;
  p.n_filters = 1;
  CHECK(zeno_run(p) < 1e-8);
  p.n_filters = 0;
  CHECK(zeno_run(p) == Approx(1.0).epsilon(1e-6));
  double prev = 0.0;
  for (int n = 1; n <= 32; n *= 2) {
    p.n_filters = n;
    const double f = zeno_run(p);
    CHECK(f >= prev);
    CHECK(f <= 1.0);
    if (n >= 2) CHECK(f == Approx(zeno_ideal_fraction(n)).epsilon(0.02));
    prev = f;
  }
  CHECK(prev >= 0.92);
}

TEST_CASE("zeno protocol validation") {
  ZenoProtocol p;
  p.filter_duration = 1.0;  // quality 10 < 20
  CHECK_THROWS_AS(zeno_run(p), ValidationError);
  p = {};
  p.n_filters = -1;
  CHECK_THROWS_AS(zeno_run(p), ValidationError);
  p = {};
  p.omega_rot = 0.0;
  CHECK_THROWS_AS(zeno_run(p), ValidationError);
}

TEST_CASE("ensemble sampling") {
  EnsembleSpec e;
  e.n_members = 5000;
  e.seed = 3;
  const auto m = sample_ensemble(e);
  REQUIRE(m.size() == 5000);
  for (const auto& s : m) CHECK(s.s0() == Approx(1.0).epsilon(1e-14));
  const auto cov = covariance_s23(m);
  CHECK(std::sqrt(cov.var_a) == Approx(0.01).epsilon(0.05));
  CHECK(std::sqrt(cov.var_b) == Approx(0.01).epsilon(0.05));
  CHECK(std::abs(cov.cov) < 0.1 * 1e-4);
  CHECK(sample_ensemble(e) == m);
  e.spread = 0.06;
  CHECK_THROWS_AS(sample_ensemble(e), ValidationError);
}

TEST_CASE("squeezing window") {
  PendulumConfig c;
  EnsembleSpec e;
  const auto w = squeeze_window(e, c);
  CHECK(w.lower == Approx(8.0 / 3.0));
  CHECK(w.upper == Approx(400.0 / 3.0));
  CHECK(w.mid() == Approx(std::sqrt(w.lower * w.upper)));
}

TEST_CASE("squeezing at mid window") {
  PendulumConfig c;
  EnsembleSpec e;
  e.seed = 11;
  const double tau = squeeze_window(e, c).mid();
  const auto r = squeeze_ensemble(e, c, tau, 2);
  const double k = 3.0 / 8.0 * e.s0 * c.omega * tau;
  CHECK(r.warnings.empty());
  CHECK(r.delta_plus == Approx(k * e.spread).epsilon(0.1));
  CHECK(r.delta_minus == Approx(e.spread / k).epsilon(0.1));
  CHECK(r.delta_plus * r.delta_minus == Approx(e.spread * e.spread).epsilon(0.1));
  CHECK(std::abs(r.alpha) == Approx(1.0 / k).epsilon(0.1));
  CHECK(r.members.size() == e.n_members);

  const auto flat = derotate_ensemble(r.members, r.alpha);
  const auto cov = covariance_s23(flat);
  CHECK(std::sqrt(cov.var_b) < e.spread);
  CHECK(std::sqrt(cov.var_a) > e.spread);
  CHECK(std::abs(cov.angle) < 1e-3);
}

TEST_CASE("squeezing limits") {
  PendulumConfig c;
  EnsembleSpec e;
  e.seed = 5;
  const auto r = squeeze_ensemble(e, c, 1e-6);
  CHECK(r.delta_plus == Approx(e.spread).epsilon(0.05));
  CHECK(r.delta_minus == Approx(e.spread).epsilon(0.05));
  CHECK_FALSE(r.warnings.empty());
  const double upper = squeeze_window(e, c).upper;
  CHECK_FALSE(squeeze_ensemble(e, c, 2.0 * upper).warnings.empty());
  CHECK_THROWS_AS(squeeze_ensemble(e, c, 11.0 * upper), DomainError);
}

TEST_CASE("squeezing is deterministic and thread independent") {
  PendulumConfig c;
  EnsembleSpec e;
  e.n_members = 2000;
  e.seed = 8;
  const auto a = squeeze_ensemble(e, c, 20.0, 1);
  const auto b = squeeze_ensemble(e, c, 20.0, 3);
  CHECK(a.members == b.members);
  CHECK(a.var_s2 == b.var_s2);
  CHECK(a.cov_s23 == b.cov_s23);
}

TEST_CASE("derotation") {
  EnsembleSpec e;
  e.n_members = 100;
  const auto m = sample_ensemble(e);
  CHECK(derotate_ensemble(m, 0.0) == m);
  const auto full = derotate_ensemble(m, 2 * kPi);
  for (std::size_t i = 0; i < m.size(); ++i) {
    CHECK(std::abs(full[i].s2 - m[i].s2) < 1e-12);
    CHECK(std::abs(full[i].s3 - m[i].s3) < 1e-12);
    CHECK(full[i].s1 == m[i].s1);
  }
}

TEST_CASE("covariance is orthogonally invariant") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  std::vector<StokesState> m;
  for (int i = 0; i < 1000; ++i) {
    const double a = g(rng), b = 0.3 * g(rng);
    m.push_back({1.0, a + b, a - 2 * b});
  }
  const auto c0 = covariance_s23(m);
  CHECK(c0.var_a >= 0);
  CHECK(c0.major >= c0.minor);
  CHECK(c0.minor >= 0);
  CHECK(c0.cov * c0.cov <= c0.var_a * c0.var_b);
  for (double t : {0.3, 1.1, 2.5}) {
    const auto c1 = covariance_s23(derotate_ensemble(m, t));
    CHECK(c1.major == Approx(c0.major).epsilon(1e-12));
    CHECK(c1.minor == Approx(c0.minor).epsilon(1e-12));
    CHECK(std::remainder(c1.angle - (c0.angle - t), kPi) == Approx(0.0).epsilon(1e-9));
  }
}

TEST_CASE("ensemble csv") {
  EnsembleSpec e;
  e.n_members = 3;
  std::ostringstream os;
  write_ensemble_csv(os, sample_ensemble(e));
  CHECK(os.str().rfind("member,s1,s2,s3\n", 0) == 0);
  const std::string text = os.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);
}

TEST_CASE("self trapping") {
  PendulumConfig c;
  c.delta_omega = 0.02;
  const double crit = critical_s0(c);
  const auto demo = self_trapping_demo(c, 0.5 * crit, 2.1 * crit);
  CHECK(demo.sub.flipped);
  CHECK(demo.sub.first_flip_time > 0.0);
  CHECK_FALSE(demo.super.flipped);
  CHECK(demo.super.min_abs_s3 > 0.0);
  // between the critical radius and twice it the pole still lies outside the lobes
  CHECK(self_trapping_run(c, 1.5 * crit).flipped);
  const double t = self_trapping_transition(c, 0.5 * crit, 3.0 * crit);
  CHECK(t / crit == Approx(2.0).epsilon(1e-3));

  c.omega_rot = 0.01;
  CHECK_THROWS_AS(self_trapping_run(c, 1.0), ValidationError);
}
