#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "foucault/config.hpp"
#include "foucault/stokes.hpp"

namespace foucault {

enum class Stability { stable_center, unstable_saddle, degenerate };
enum class Regime { two_point, critical, four_point, symmetric_degenerate };

std::string_view to_string(Stability s);
std::string_view to_string(Regime r);

struct StationaryPoint {
  StokesState state;
  Stability stability = Stability::degenerate;
  double residual = 0.0;  // max |rhs| at the point
};

struct StationarySet {
  std::vector<StationaryPoint> points;
  double s0 = 0.0;
  double s0_crit = 0.0;
  std::optional<double> separatrix_h;
  Regime regime = Regime::two_point;
  // Delta omega = 0 only: the circle of stationary points s3 = 16 Omega / (3 omega).
  std::optional<double> degenerate_circle_s3;
  // H of a center that is neither the global minimum nor maximum of H on the sphere.
  std::optional<double> local_extremum_h;

  std::size_t count(Stability s) const;
};

// Width of the band around s0_crit reported as Regime::critical.
inline constexpr double kCriticalBand = 0.01;

StationarySet stationary_points(const PendulumConfig& c, double s0);

double critical_s0(const PendulumConfig& c);

double stationary_residual(const StokesState& p, const PendulumConfig& c);

Stability classify_stability(const StokesState& p, const PendulumConfig& c);

enum class Region { outer, upper_lobe, lower_lobe, separatrix };
std::string_view to_string(Region r);

class RegionClassifier {
 public:
  RegionClassifier(double separatrix_h, double saddle_s3, double lobe_sign, double tolerance,
                   PendulumConfig c);

  Region classify(const StokesState& s) const;
  double separatrix_h() const noexcept { return h_sep_; }

 private:
  double h_sep_;
  double saddle_s3_;
  double lobe_sign_;  // +1 when the lobes lie at H > separatrix_h
  double tol_;
  PendulumConfig c_;
};

// Requires a set with one saddle (four-point regime) or the symmetric
// degenerate circle. Throws DomainError otherwise.
RegionClassifier separatrix_and_regions(const StationarySet& set, const PendulumConfig& c);

double parabola_curvature_radius(double s3, const PendulumConfig& c);
double critical_contact_s3(const PendulumConfig& c);

nlohmann::json to_json(const StationarySet& set);

}  // namespace foucault
