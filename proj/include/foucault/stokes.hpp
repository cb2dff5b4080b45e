#pragma once

#include <array>
#include <cmath>
#include <span>

#include "foucault/config.hpp"

namespace foucault {

/// A point (S1, S2, S3) of the Poincare sphere.
///
/// S0 is not stored: it is always recomputed from the three components so the
/// sphere identity S0^2 = S1^2 + S2^2 + S3^2 cannot be violated.
struct StokesState {
  double s1 = 0.0;
  double s2 = 0.0;
  double s3 = 0.0;

  double s0() const noexcept { return std::hypot(s1, s2, s3); }

  std::array<double, 3> as_array() const noexcept { return {s1, s2, s3}; }
  static StokesState from_array(const std::array<double, 3>& v) noexcept {
    return {v[0], v[1], v[2]};
  }

  bool operator==(const StokesState&) const = default;
};

/// Time derivative (dS1/dt, dS2/dt, dS3/dt).
using StokesRate = std::array<double, 3>;

enum class Handedness { counterclockwise, clockwise };

/// Orbit described by its semi-axes and the inclination of the major axis.
/// Invariants: a >= b >= 0, psi in [0, pi).
struct EllipseGeometry {
  double a = 0.0;
  double b = 0.0;
  double psi = 0.0;
  Handedness handedness = Handedness::counterclockwise;
};

/// Orbit described by x = A cos(wt), y = B cos(wt - phi).
/// Invariants: A >= 0, B >= 0, phi in (-pi, pi].
struct AmplitudePhase {
  double A = 0.0;
  double B = 0.0;
  double phi = 0.0;
};

/// Result of inverting the ellipse parametrization. For circular orbits the
/// inclination is meaningless; psi is then 0 and `orientation_undefined` is set.
struct EllipseEstimate {
  EllipseGeometry ellipse;
  bool orientation_undefined = false;
};

struct Observables {
  double energy = 0.0;            ///< J
  double angular_momentum = 0.0;  ///< vertical component, kg m^2/s
};

/// Horizontal position and velocity of the bob at one instant.
struct PhaseSample {
  double x = 0.0;
  double y = 0.0;
  double vx = 0.0;
  double vy = 0.0;
};

/// Minimum number of samples per averaging period accepted by the
/// trajectory estimators.
inline constexpr double kMinSamplesPerPeriod = 16.0;

double normalize_inclination(double psi);  // -> [0, pi)
double normalize_phase(double phi);        // -> (-pi, pi]

StokesState stokes_from_ellipse(const EllipseGeometry& e, double length);
StokesState stokes_from_amplitudes(const AmplitudePhase& p, double length);

/// Throws ValidationError when S0 = 0 (no orbit to describe).
EllipseEstimate ellipse_from_stokes(const StokesState& s, double length);

Observables observables(const StokesState& s, const PendulumConfig& c);

/// Period averages <x^2>, <y^2>, <xy> of uniformly spaced samples, turned into
/// Stokes parameters. |S3| comes from the position covariance and its sign from
/// the mean of x*vy - y*vx.
///
/// The average uses the trapezoid rule over exactly one `period` starting at
/// the first sample; a fractional last interval is handled by linear
/// interpolation. Throws ValidationError when the samples do not cover one
/// period or when there are fewer than 16 samples per period.
StokesState stokes_from_trajectory(std::span<const PhaseSample> samples, double dt,
                                   double period, double length);

/// Stokes parameters of the harmonic ellipse (frequency omega) that osculates
/// the phase point `p`. Exact for a pure ellipse at any instant.
StokesState osculating_stokes(const PhaseSample& p, double omega, double length);

/// One-period trapezoid average of osculating_stokes with the same window rules
/// as stokes_from_trajectory. Unlike the covariance estimator it is not biased
/// by slow rotation of the orbit inside the window.
StokesState osculating_stokes_average(std::span<const PhaseSample> samples, double dt,
                                      double period, double omega, double length);

/// The orbit x = a cos(psi) cos(wt) - b' sin(psi) sin(wt),
///           y = a sin(psi) cos(wt) + b' cos(psi) sin(wt),
/// with b' = +b for counterclockwise and -b for clockwise motion.
PhaseSample phase_point_on_ellipse(const EllipseGeometry& e, double omega, double t);

}  // namespace foucault
