#include "foucault/stokes.hpp"

#include <numbers>
#include <sstream>

#include "foucault/error.hpp"

namespace foucault {

namespace {

void check_ellipse(const EllipseGeometry& e) {
  detail::require_finite(e.a, "ellipse semi-axis a");
  detail::require_finite(e.b, "ellipse semi-axis b");
  detail::require_finite(e.psi, "ellipse inclination psi");
  if (e.b < 0.0 || e.a < e.b) {
    throw ValidationError("ellipse semi-axes must satisfy a >= b >= 0");
  }
}

// Trapezoid average over exactly one period of f(i), i indexing the samples.
template <std::size_t K, class F>
std::array<double, K> period_average(std::size_t n_samples, double dt, double period, F&& f) {
  detail::require_positive(dt, "sample spacing dt");
  detail::require_positive(period, "averaging period");
  const double steps = period / dt;
  if (steps < kMinSamplesPerPeriod) {
    std::ostringstream os;
    os << "only " << steps << " samples per period; at least " << kMinSamplesPerPeriod
       << " are required";
    throw ValidationError(os.str());
  }
  auto n_full = static_cast<std::size_t>(std::floor(steps + 1e-9));
  double frac = steps - static_cast<double>(n_full);
  if (frac < 1e-9) frac = 0.0;
  const std::size_t needed = n_full + 1 + (frac > 0.0 ? 1 : 0);
  if (n_samples < needed) {
    std::ostringstream os;
    os << "window of " << n_samples << " samples is shorter than one period (" << needed
       << " needed)";
    throw ValidationError(os.str());
  }

  std::array<double, K> sum{};
  auto add = [&](const std::array<double, K>& v, double w) {
    for (std::size_t k = 0; k < K; ++k) sum[k] += w * v[k];
  };
  add(f(0), 0.5);
  for (std::size_t i = 1; i < n_full; ++i) add(f(i), 1.0);
  const auto last = f(n_full);
  add(last, 0.5);
  if (frac > 0.0) {
    // partial interval [n_full, n_full + frac], integrand interpolated linearly
    const auto next = f(n_full + 1);
    for (std::size_t k = 0; k < K; ++k) {
      const double end = last[k] + frac * (next[k] - last[k]);
      sum[k] += frac * 0.5 * (last[k] + end);
    }
  }
  for (auto& v : sum) v /= steps;
  return sum;
}

}  // namespace

double normalize_inclination(double psi) {
  double r = std::fmod(psi, std::numbers::pi);
  if (r < 0.0) r += std::numbers::pi;
  if (r >= std::numbers::pi) r = 0.0;
  return r;
}

double normalize_phase(double phi) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::fmod(phi, two_pi);
  if (r <= -std::numbers::pi) r += two_pi;
  if (r > std::numbers::pi) r -= two_pi;
  return r;
}

StokesState stokes_from_ellipse(const EllipseGeometry& e, double length) {
  check_ellipse(e);
  detail::require_positive(length, "length");
  const double l2 = length * length;
  const double diff = (e.a * e.a - e.b * e.b) / l2;
  const double sign = e.handedness == Handedness::counterclockwise ? 1.0 : -1.0;
  return {diff * std::cos(2.0 * e.psi), diff * std::sin(2.0 * e.psi), sign * 2.0 * e.a * e.b / l2};
}

StokesState stokes_from_amplitudes(const AmplitudePhase& p, double length) {
  detail::require_finite(p.A, "amplitude A");
  detail::require_finite(p.B, "amplitude B");
  detail::require_finite(p.phi, "phase difference phi");
  if (p.A < 0.0 || p.B < 0.0) throw ValidationError("amplitudes A and B must be non-negative");
  detail::require_positive(length, "length");
  const double l2 = length * length;
  const double cross = 2.0 * p.A * p.B / l2;
  return {(p.A * p.A - p.B * p.B) / l2, cross * std::cos(p.phi), cross * std::sin(p.phi)};
}

EllipseEstimate ellipse_from_stokes(const StokesState& s, double length) {
  detail::require_finite(s.s1, "S1");
  detail::require_finite(s.s2, "S2");
  detail::require_finite(s.s3, "S3");
  detail::require_positive(length, "length");
  const double s0 = s.s0();
  if (s0 == 0.0) throw ValidationError("degenerate orbit: S0 = 0 has no ellipse");

  const double linear = std::hypot(s.s1, s.s2);  // (a^2 - b^2) / L^2
  EllipseEstimate out;
  auto& e = out.ellipse;
  e.a = length * std::sqrt(0.5 * (s0 + linear));
  // 2ab = |S3| L^2; this form keeps b accurate when the orbit is nearly linear
  e.b = std::abs(s.s3) * length * length / (2.0 * e.a);
  if (e.b > e.a) e.b = e.a;
  e.handedness = s.s3 < 0.0 ? Handedness::clockwise : Handedness::counterclockwise;
  if (linear <= 1e-12 * s0) {
    out.orientation_undefined = true;
    e.psi = 0.0;
  } else {
    e.psi = normalize_inclination(0.5 * std::atan2(s.s2, s.s1));
  }
  return out;
}

Observables observables(const StokesState& s, const PendulumConfig& c) {
  validate(c);
  const double ml2 = c.mass * c.length * c.length;
  return {0.5 * ml2 * c.omega * c.omega * s.s0(), 0.5 * ml2 * c.omega * s.s3};
}

StokesState stokes_from_trajectory(std::span<const PhaseSample> samples, double dt,
                                   double period, double length) {
  detail::require_positive(length, "length");
  const auto m = period_average<4>(samples.size(), dt, period, [&](std::size_t i) {
    const auto& p = samples[i];
    return std::array<double, 4>{p.x * p.x, p.y * p.y, p.x * p.y, p.x * p.vy - p.y * p.vx};
  });
  const double l2 = length * length;
  const double det = std::max(m[0] * m[1] - m[2] * m[2], 0.0);
  const double sign = m[3] < 0.0 ? -1.0 : 1.0;
  return {2.0 * (m[0] - m[1]) / l2, 4.0 * m[2] / l2, sign * 4.0 * std::sqrt(det) / l2};
}

StokesState osculating_stokes(const PhaseSample& p, double omega, double length) {
  // complex amplitudes X = x - i vx/omega, Y = y - i vy/omega; S2 + i S3 = 2 X conj(Y)
  const double xr = p.x, xi = -p.vx / omega;
  const double yr = p.y, yi = -p.vy / omega;
  const double l2 = length * length;
  return {(xr * xr + xi * xi - yr * yr - yi * yi) / l2, 2.0 * (xr * yr + xi * yi) / l2,
          2.0 * (xi * yr - xr * yi) / l2};
}

StokesState osculating_stokes_average(std::span<const PhaseSample> samples, double dt,
                                      double period, double omega, double length) {
  detail::require_positive(omega, "omega");
  detail::require_positive(length, "length");
  const auto m = period_average<3>(samples.size(), dt, period, [&](std::size_t i) {
    return osculating_stokes(samples[i], omega, length).as_array();
  });
  return StokesState::from_array(m);
}

PhaseSample phase_point_on_ellipse(const EllipseGeometry& e, double omega, double t) {
  const double b = e.handedness == Handedness::counterclockwise ? e.b : -e.b;
  const double c = std::cos(omega * t), s = std::sin(omega * t);
  const double cp = std::cos(e.psi), sp = std::sin(e.psi);
  return {e.a * cp * c - b * sp * s, e.a * sp * c + b * cp * s,
          omega * (-e.a * cp * s - b * sp * c), omega * (-e.a * sp * s + b * cp * c)};
}

}  // namespace foucault
