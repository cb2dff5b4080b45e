#pragma once

#include <string>
#include <vector>

namespace foucault {

/// Physical parameters of the pendulum shared by every module.
///
/// Rates are in rad/s (or 1/s for damping), length in metres, mass in kg.
struct PendulumConfig {
  double omega = 1.0;        ///< small-oscillation frequency sqrt(g/L)
  double delta_omega = 0.0;  ///< frequency split omega_x - omega_y
  double omega_rot = 0.0;    ///< rotation rate of the frame about the vertical
  double gamma_x = 0.0;      ///< damping rate along x
  double gamma_y = 0.0;      ///< damping rate along y
  double length = 1.0;
  double mass = 1.0;
};

/// Ratio |rate|/omega above which the slow-rate assumption is reported as a
/// warning.
inline constexpr double kAdvisoryRateRatio = 0.1;

/// Throws ValidationError for hard violations (non-finite values, omega <= 0,
/// length <= 0, mass <= 0, negative damping). Returns advisory warnings when
/// delta_omega or omega_rot are not small compared with omega.
std::vector<std::string> validate(const PendulumConfig& config);

namespace detail {
void require_finite(double value, const char* name);
void require_positive(double value, const char* name);
}  // namespace detail

}  // namespace foucault
