#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "foucault/config.hpp"
#include "foucault/stokes.hpp"

namespace foucault {

// Equidistant strong-damping filters interleaved with a quarter turn of the
// swing plane. n_filters rotation segments of pi/(2 Omega n) are separated by
// n_filters + 1 filters (one at the start, one at the end).
struct ZenoProtocol {
  int n_filters = 1;
  double omega = 1.0;
  double omega_rot = 0.01;
  double gamma_filter = 10.0;
  double filter_duration = 3.0;
};

inline constexpr double kMinFilterQuality = 20.0;  // gamma_filter * filter_duration

// Final s0 / initial s0, starting from a swing along the undamped (y) axis.
double zeno_run(const ZenoProtocol& p);

// cos^(2n)(pi / (2n)), the limit of perfect projections; 1 for n = 0.
double zeno_ideal_fraction(int n_filters);

struct EnsembleSpec {
  std::size_t n_members = 10000;
  double s0 = 1.0;
  double spread = 0.01;  // std of s2 and s3 before projection onto the sphere
  std::uint64_t seed = 0;
};

struct SqueezeWindow {
  double lower = 0.0;  // 8 / (3 omega s0)
  double upper = 0.0;  // 4 / (3 omega spread)
  double mid() const;  // geometric mean
};

SqueezeWindow squeeze_window(const EnsembleSpec& e, const PendulumConfig& c);

struct SqueezeResult {
  double var_s2 = 0.0;
  double var_s3 = 0.0;
  double cov_s23 = 0.0;
  double delta_plus = 0.0;   // principal standard deviations
  double delta_minus = 0.0;
  double alpha = 0.0;        // major-axis tilt from the equator, (-pi/2, pi/2]
  std::vector<StokesState> members;
  std::vector<std::string> warnings;
};

struct Covariance2 {
  double var_a = 0.0, var_b = 0.0, cov = 0.0;
  double major = 0.0, minor = 0.0;  // principal standard deviations
  double angle = 0.0;               // major axis from the a axis, (-pi/2, pi/2]
};

// Sample covariance of (s2, s3), compensated summation.
Covariance2 covariance_s23(const std::vector<StokesState>& members);

std::vector<StokesState> sample_ensemble(const EnsembleSpec& e);

// Twisting flow only (Delta omega = Omega = 0). Warns outside the squeezing
// window; throws DomainError when tau exceeds ten times its upper end.
SqueezeResult squeeze_ensemble(const EnsembleSpec& e, const PendulumConfig& c, double tau,
                               unsigned threads = 1);

// Rotation of every member about S1 by -angle, so that passing the measured
// alpha lays the major axis on the equator.
std::vector<StokesState> derotate_ensemble(const std::vector<StokesState>& members, double angle);

void write_ensemble_csv(std::ostream& os, const std::vector<StokesState>& members);

struct TrappingRun {
  double s0 = 0.0;
  bool flipped = false;  // s3 changed sign
  double min_abs_s3 = 0.0;
  double first_flip_time = -1.0;
};

// Evolves the pole (0, 0, s0) under the conservative flow for t_end.
// Requires Omega = 0 and Delta omega != 0. t_end <= 0 selects ten linear
// flip periods 2 pi / |Delta omega|.
TrappingRun self_trapping_run(const PendulumConfig& c, double s0, double t_end = 0.0);

struct TrappingDemo {
  TrappingRun sub;
  TrappingRun super;
};

TrappingDemo self_trapping_demo(const PendulumConfig& c, double s0_sub, double s0_super,
                                double t_end = 0.0);

// Bisection for the flip/trap boundary in s0 inside [lo, hi]; lo must flip and
// hi must stay trapped.
double self_trapping_transition(const PendulumConfig& c, double lo, double hi,
                                double rel_tol = 1e-4, double t_end = 0.0);

}  // namespace foucault
