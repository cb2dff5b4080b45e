#include "foucault/config.hpp"

#include <cmath>
#include <sstream>

#include "foucault/error.hpp"

namespace foucault {

namespace detail {

void require_finite(double value, const char* name) {
  if (!std::isfinite(value)) {
    throw ValidationError(std::string(name) + " must be finite");
  }
}

void require_positive(double value, const char* name) {
  require_finite(value, name);
  if (value <= 0.0) {
    std::ostringstream os;
    os << name << " must be positive (got " << value << ")";
    throw ValidationError(os.str());
  }
}

}  // namespace detail

std::vector<std::string> validate(const PendulumConfig& config) {
  detail::require_positive(config.omega, "omega");
  detail::require_positive(config.length, "length");
  detail::require_positive(config.mass, "mass");
  detail::require_finite(config.delta_omega, "delta_omega");
  detail::require_finite(config.omega_rot, "omega_rot");
  detail::require_finite(config.gamma_x, "gamma_x");
  detail::require_finite(config.gamma_y, "gamma_y");
  if (config.gamma_x < 0.0 || config.gamma_y < 0.0) {
    throw ValidationError("damping rates gamma_x, gamma_y must be non-negative");
  }

  std::vector<std::string> warnings;
  auto advise = [&](double rate, const char* name) {
    if (std::abs(rate) > kAdvisoryRateRatio * config.omega) {
      std::ostringstream os;
      os << "|" << name << "| = " << std::abs(rate) << " is not small compared with omega = "
         << config.omega << "; the averaged equations assume |" << name << "| << omega";
      warnings.push_back(os.str());
    }
  };
  advise(config.delta_omega, "delta_omega");
  advise(config.omega_rot, "omega_rot");
  return warnings;
}

}  // namespace foucault
