#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "foucault/config.hpp"
#include "foucault/stokes.hpp"

namespace foucault {

enum class FlowKind { anisotropy, coriolis, twisting, combined, damped_combined };

std::string_view to_string(FlowKind k);
FlowKind flow_kind_from_string(std::string_view name);

StokesRate rhs_conservative(const StokesState& s, const PendulumConfig& c);
StokesRate rhs_damped(const StokesState& s, const PendulumConfig& c);
// Only the terms selected by `kind`.
StokesRate rhs(const StokesState& s, const PendulumConfig& c, FlowKind kind);

double hamiltonian_h(const StokesState& s, const PendulumConfig& c);

struct Trajectory {
  std::vector<double> times;
  std::vector<StokesState> states;
  std::vector<double> h_values;
  std::vector<double> s0_values;

  std::size_t size() const noexcept { return times.size(); }
  double max_h_drift() const;   // max |H(t) - H(0)|
  double max_s0_drift() const;  // max |s0(t) - s0(0)|
};

struct StepLimit {
  double max_dt = 0.0;  // +inf when every rate vanishes
  std::string limiting_rate;
};

// Largest step allowed by dt <= 0.05 / (fastest active rate).
StepLimit max_stable_step(const StokesState& s, const PendulumConfig& c, FlowKind kind);

// Fixed-step RK4 from t=0 to t_end. The step actually used is
// t_end / ceil(t_end / dt), so the run ends exactly at t_end.
Trajectory integrate(const StokesState& init, const PendulumConfig& c, FlowKind kind,
                     double t_end, double dt);

// Final state only, no recording.
StokesState propagate(const StokesState& init, const PendulumConfig& c, FlowKind kind,
                      double t_end, double dt);

StokesState rk4_step(const StokesState& s, const PendulumConfig& c, FlowKind kind, double h);

// Airy precession 3ab w / (8 L^2), positive for counterclockwise orbits.
double airy_precession_rate(const EllipseGeometry& e, const PendulumConfig& c);

void write_trajectory_csv(std::ostream& os, const Trajectory& tr);

}  // namespace foucault
