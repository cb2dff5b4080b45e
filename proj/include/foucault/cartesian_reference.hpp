#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include <json.hpp>

#include "foucault/config.hpp"
#include "foucault/stokes.hpp"

namespace foucault {

// Angles of the bob in the rotating frame; theta is measured from the
// downward vertical.
struct SphericalState {
  double theta = 0.0;
  double alpha = 0.0;
  double theta_dot = 0.0;
  double alpha_dot = 0.0;
};

// (theta_dot, alpha_dot, theta_ddot, alpha_ddot). Singular at theta = 0.
std::array<double, 4> full_rhs(const SphericalState& s, const PendulumConfig& c);

// Horizontal projection u = x/L, v = y/L of the bob and its rotating-frame
// velocity. Regular at the bottom of the sphere, unlike SphericalState.
struct ProjectedState {
  double u = 0.0;
  double v = 0.0;
  double du = 0.0;
  double dv = 0.0;
};

std::array<double, 4> projected_rhs(const ProjectedState& q, const PendulumConfig& c);

ProjectedState to_projected(const SphericalState& s);
SphericalState to_spherical(const ProjectedState& q);

// Jacobi constant per m L^2 (gravity measured from the suspension point).
double jacobi_energy(const ProjectedState& q, const PendulumConfig& c);
// Same, shifted so that the bob at rest at the bottom has zero energy.
double excitation_energy(const ProjectedState& q, const PendulumConfig& c);
// Inertial vertical angular momentum per m L^2: sin^2(theta) (alpha_dot + Omega).
double vertical_angular_momentum(const ProjectedState& q, const PendulumConfig& c);

// Rotating-frame state matching the ellipse of `s`, launched at the end of its
// major axis. The ellipse is taken in the inertial sense: the rotating-frame
// velocity is the inertial one minus Omega x r.
ProjectedState seed_from_stokes(const StokesState& s, const PendulumConfig& c);

struct CartesianTrajectory {
  std::vector<double> t;
  std::vector<double> x, y, xdot, ydot;  // rotating frame, physical units
  std::vector<double> energy;            // excitation_energy
  std::vector<double> angular_momentum;  // vertical_angular_momentum

  std::size_t size() const noexcept { return t.size(); }
  PhaseSample sample(std::size_t i) const { return {x[i], y[i], xdot[i], ydot[i]}; }
  // Velocities seen from the inertial frame, components on the rotating axes.
  PhaseSample inertial_sample(std::size_t i, double omega_rot) const;
};

inline constexpr double kMinFullStepsPerPeriod = 64.0;

CartesianTrajectory integrate_full(const ProjectedState& init, const PendulumConfig& c,
                                   double t_end, double dt);
CartesianTrajectory integrate_full(const SphericalState& init, const PendulumConfig& c,
                                   double t_end, double dt);

enum class StokesEstimator { osculating, covariance };

struct CompareOptions {
  double samples_per_period = 128.0;
  StokesEstimator estimator = StokesEstimator::osculating;
};

struct ComparisonReport {
  double s0 = 0.0;
  bool out_of_regime = false;
  std::vector<double> window_centers;
  std::vector<StokesState> reduced;
  std::vector<StokesState> full;
  std::vector<double> deviations;  // |S_reduced - S_full| / s0
  double max_deviation = 0.0;
};

inline constexpr double kComparisonRegimeS0 = 0.5;

// Runs the reduced conservative flow and the full model from the same orbit
// and compares one-period Stokes averages of the full trajectory, taken every
// quarter period, with the reduced state at the window centre.
ComparisonReport compare_reduced_full(const StokesState& init, const PendulumConfig& c,
                                      double t_end, const CompareOptions& opt = {});

struct FrequencySplit {
  double omega_x = 0.0;
  double omega_y = 0.0;
  double split = 0.0;
};

// Oscillation frequencies of planar swings of amplitude sqrt(s0) L along each
// axis, from zero-crossing times over `periods` periods. Omega is ignored.
FrequencySplit measure_frequency_split(const PendulumConfig& c, double s0, double periods = 100.0);

// Slope of the unwrapped orbit inclination psi(t) of the full model started
// from `init`, estimated from one-period osculating Stokes averages.
double measure_orbit_precession(const StokesState& init, const PendulumConfig& c, double t_end);

void write_cartesian_csv(std::ostream& os, const CartesianTrajectory& tr);
nlohmann::json to_json(const ComparisonReport& r);

}  // namespace foucault
