#include "foucault/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "foucault/error.hpp"
#include "foucault/reduced_dynamics.hpp"

namespace foucault {

namespace {

constexpr double kTwist = 3.0 / 8.0;

double max_abs(const StokesRate& r) {
  return std::max({std::abs(r[0]), std::abs(r[1]), std::abs(r[2])});
}

// Natural magnitude of the right-hand side on a sphere of radius s0.
double rate_scale(const PendulumConfig& c, double s0) {
  return s0 * (kTwist * c.omega * s0 + std::abs(c.delta_omega) + 2.0 * std::abs(c.omega_rot));
}

// ds2/dt / s0 on the great circle s2 = 0, s1 = s0 cos t, s3 = s0 sin t.
double circle_f(double t, const PendulumConfig& c, double s0) {
  const double ct = std::cos(t), st = std::sin(t);
  return -2.0 * c.omega_rot * ct - c.delta_omega * st + kTwist * c.omega * s0 * st * ct;
}

double circle_df(double t, const PendulumConfig& c, double s0) {
  const double ct = std::cos(t), st = std::sin(t);
  return 2.0 * c.omega_rot * st - c.delta_omega * ct + kTwist * c.omega * s0 * std::cos(2.0 * t);
}

// Real roots in [-1, 1] of x^4 - 2 d x^3 + (d^2 + o^2 - 1) x^2 + 2 d x - d^2 = 0,
// the stationarity quartic in x = s1 / s0.
std::vector<double> quartic_seeds(double d, double o) {
  const double a3 = -2.0 * d, a2 = d * d + o * o - 1.0, a1 = 2.0 * d, a0 = -d * d;
  Eigen::Matrix4d comp = Eigen::Matrix4d::Zero();
  comp(1, 0) = comp(2, 1) = comp(3, 2) = 1.0;
  comp(0, 3) = -a0;
  comp(1, 3) = -a1;
  comp(2, 3) = -a2;
  comp(3, 3) = -a3;
  Eigen::EigenSolver<Eigen::Matrix4d> es(comp, false);
  std::vector<double> out;
  for (int i = 0; i < 4; ++i) {
    const std::complex<double> z = es.eigenvalues()[i];
    if (std::abs(z.imag()) > 1e-4 * std::max(1.0, std::abs(z))) continue;
    if (std::abs(z.real()) > 1.0 + 1e-6) continue;
    out.push_back(std::clamp(z.real(), -1.0, 1.0));
  }
  return out;
}

double wrap_angle(double t) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  t = std::fmod(t, two_pi);
  if (t <= -std::numbers::pi) t += two_pi;
  if (t > std::numbers::pi) t -= two_pi;
  return t;
}

// Newton on the circle, falling back to bisection when a bracket is known.
double polish_angle(double t, const PendulumConfig& c, double s0) {
  for (int it = 0; it < 60; ++it) {
    const double f = circle_f(t, c, s0);
    const double df = circle_df(t, c, s0);
    if (f == 0.0 || df == 0.0) break;
    const double step = f / df;
    t -= std::clamp(step, -0.1, 0.1);
    if (std::abs(step) < 1e-16) break;
  }
  return wrap_angle(t);
}

double bisect_angle(double lo, double hi, const PendulumConfig& c, double s0) {
  double flo = circle_f(lo, c, s0);
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = circle_f(mid, c, s0);
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return polish_angle(0.5 * (lo + hi), c, s0);
}

std::vector<double> circle_roots(const PendulumConfig& c, double s0) {
  std::vector<double> cand;
  const double kk = kTwist * c.omega;
  for (double x : quartic_seeds(c.delta_omega / (kk * s0), 2.0 * c.omega_rot / (kk * s0))) {
    const double t = std::acos(x);
    cand.push_back(polish_angle(t, c, s0));
    cand.push_back(polish_angle(-t, c, s0));
  }
  // sign-change scan guards against seeds lost to an ill-conditioned companion matrix
  constexpr int kScan = 2048;
  const double step = 2.0 * std::numbers::pi / kScan;
  double prev_t = -std::numbers::pi;
  double prev_f = circle_f(prev_t, c, s0);
  for (int i = 1; i <= kScan; ++i) {
    const double t = -std::numbers::pi + i * step;
    const double f = circle_f(t, c, s0);
    if ((f < 0.0) != (prev_f < 0.0) || f == 0.0) cand.push_back(bisect_angle(prev_t, t, c, s0));
    prev_t = t;
    prev_f = f;
  }
  return cand;
}

struct Eig2 {
  std::complex<double> l1, l2;
};

Eig2 tangent_eigenvalues(const StokesState& p, const PendulumConfig& c) {
  const double k = kTwist * c.omega;
  Eigen::Matrix3d J;
  J << 0.0, 2.0 * c.omega_rot - k * p.s3, -k * p.s2,
      -2.0 * c.omega_rot + k * p.s3, 0.0, -c.delta_omega + k * p.s1,
      0.0, c.delta_omega, 0.0;
  const Eigen::Vector3d n = Eigen::Vector3d(p.s1, p.s2, p.s3).normalized();
  Eigen::Vector3d helper = std::abs(n.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
  const Eigen::Vector3d e1 = (helper - helper.dot(n) * n).normalized();
  const Eigen::Vector3d e2 = n.cross(e1);
  Eigen::Matrix<double, 3, 2> E;
  E.col(0) = e1;
  E.col(1) = e2;
  const Eigen::Matrix2d M = E.transpose() * J * E;
  const double tr = M.trace(), det = M.determinant();
  const std::complex<double> disc = std::sqrt(std::complex<double>(0.25 * tr * tr - det, 0.0));
  return {0.5 * tr + disc, 0.5 * tr - disc};
}

}  // namespace

std::string_view to_string(Stability s) {
  switch (s) {
    case Stability::stable_center: return "stable-center";
    case Stability::unstable_saddle: return "unstable-saddle";
    case Stability::degenerate: return "degenerate";
  }
  return "?";
}

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::two_point: return "two-point";
    case Regime::critical: return "critical";
    case Regime::four_point: return "four-point";
    case Regime::symmetric_degenerate: return "symmetric-degenerate";
  }
  return "?";
}

std::string_view to_string(Region r) {
  switch (r) {
    case Region::outer: return "outer";
    case Region::upper_lobe: return "upper-lobe";
    case Region::lower_lobe: return "lower-lobe";
    case Region::separatrix: return "separatrix";
  }
  return "?";
}

std::size_t StationarySet::count(Stability s) const {
  return static_cast<std::size_t>(
      std::count_if(points.begin(), points.end(), [s](const auto& p) { return p.stability == s; }));
}

double critical_s0(const PendulumConfig& c) {
  validate(c);
  const double sum = std::cbrt(c.delta_omega * c.delta_omega) +
                     std::cbrt(4.0 * c.omega_rot * c.omega_rot);
  return 8.0 / (3.0 * c.omega) * sum * std::sqrt(sum);
}

double stationary_residual(const StokesState& p, const PendulumConfig& c) {
  return max_abs(rhs_conservative(p, c));
}

Stability classify_stability(const StokesState& p, const PendulumConfig& c) {
  validate(c);
  const double s0 = p.s0();
  if (!(s0 > 0.0)) throw DomainError("stability is undefined at the origin S0 = 0");
  const double res = stationary_residual(p, c);
  if (res > 1e-9 * rate_scale(c, s0)) {
    std::ostringstream os;
    os << "point is not stationary (residual " << res << ")";
    throw DomainError(os.str());
  }
  const Eig2 ev = tangent_eigenvalues(p, c);
  const double big = std::max(std::abs(ev.l1), std::abs(ev.l2));
  if (big < 1e-10 * c.omega) return Stability::degenerate;
  const double re = std::max(std::abs(ev.l1.real()), std::abs(ev.l2.real()));
  const double im = std::max(std::abs(ev.l1.imag()), std::abs(ev.l2.imag()));
  if (re < 1e-8 * c.omega && im > 0.0) return Stability::stable_center;
  if (ev.l1.real() * ev.l2.real() < 0.0) return Stability::unstable_saddle;
  return Stability::degenerate;
}

StationarySet stationary_points(const PendulumConfig& c, double s0) {
  validate(c);
  detail::require_positive(s0, "s0");
  StationarySet set;
  set.s0 = s0;
  set.s0_crit = critical_s0(c);
  const double strict = std::max(1e-10 * c.omega * s0 * s0, 1e-15 * rate_scale(c, s0));

  auto add_point = [&](const StokesState& p) {
    StationaryPoint sp;
    sp.state = p;
    sp.residual = stationary_residual(p, c);
    if (sp.residual >= strict) {
      throw ConvergenceError("stationary point polish did not reach the residual tolerance",
                             sp.residual);
    }
    sp.stability = classify_stability(p, c);
    set.points.push_back(sp);
  };

  const bool near_critical =
      set.s0_crit > 0.0 && std::abs(s0 - set.s0_crit) <= kCriticalBand * set.s0_crit;

  if (c.delta_omega == 0.0) {
    add_point({0.0, 0.0, s0});
    add_point({0.0, 0.0, -s0});
    const double circle = 2.0 * c.omega_rot / (kTwist * c.omega);
    if (near_critical) {
      set.regime = Regime::critical;
    } else if (std::abs(circle) < s0) {
      set.regime = Regime::symmetric_degenerate;
      set.degenerate_circle_s3 = circle;
      set.separatrix_h = hamiltonian_h({0.0, 0.0, circle}, c);
    } else {
      set.regime = Regime::two_point;
    }
    return set;
  }

  std::vector<double> angles = circle_roots(c, s0);
  std::sort(angles.begin(), angles.end());
  std::vector<StokesState> found;
  for (double t : angles) {
    StokesState p{s0 * std::cos(t), 0.0, s0 * std::sin(t)};
    double r = stationary_residual(p, c);
    if (r > 1e-6 * rate_scale(c, s0)) continue;
    if (r >= strict) {
      // a near miss of two merging roots has no sign change around it
      std::optional<double> root;
      for (double d = 1e-9; d <= 1e-3 && !root; d *= 10.0) {
        if ((circle_f(t - d, c, s0) < 0.0) != (circle_f(t + d, c, s0) < 0.0)) {
          root = bisect_angle(t - d, t + d, c, s0);
        }
      }
      if (!root) continue;
      p = {s0 * std::cos(*root), 0.0, s0 * std::sin(*root)};
      r = stationary_residual(p, c);
    }
    bool dup = false;
    for (const auto& q : found) {
      if (std::hypot(p.s1 - q.s1, p.s3 - q.s3) < 1e-7 * s0) {
        dup = true;
        break;
      }
    }
    if (!dup) found.push_back(p);
  }
  for (const auto& p : found) add_point(p);

  const std::size_t saddles = set.count(Stability::unstable_saddle);
  if (near_critical || (set.points.size() != 2 && set.points.size() != 4)) {
    set.regime = Regime::critical;
  } else if (set.points.size() == 4) {
    set.regime = Regime::four_point;
  } else {
    set.regime = Regime::two_point;
  }
  if (saddles == 1) {
    for (const auto& p : set.points) {
      if (p.stability == Stability::unstable_saddle) set.separatrix_h = hamiltonian_h(p.state, c);
    }
  }
  if (set.points.size() == 4 && saddles == 1) {
    std::vector<double> hs;
    for (const auto& p : set.points) {
      if (p.stability == Stability::stable_center) hs.push_back(hamiltonian_h(p.state, c));
    }
    const auto [lo, hi] = std::minmax_element(hs.begin(), hs.end());
    const double eps = 1e-12 * std::max(std::abs(*lo), std::abs(*hi)) + 1e-300;
    for (double h : hs) {
      if (h > *lo + eps && h < *hi - eps) set.local_extremum_h = h;
    }
  }
  return set;
}

RegionClassifier::RegionClassifier(double separatrix_h, double saddle_s3, double lobe_sign,
                                   double tolerance, PendulumConfig c)
    : h_sep_(separatrix_h), saddle_s3_(saddle_s3), lobe_sign_(lobe_sign), tol_(tolerance), c_(c) {}

Region RegionClassifier::classify(const StokesState& s) const {
  const double dh = hamiltonian_h(s, c_) - h_sep_;
  if (std::abs(dh) <= tol_) return Region::separatrix;
  if (dh * lobe_sign_ < 0.0) return Region::outer;
  return s.s3 > saddle_s3_ ? Region::upper_lobe : Region::lower_lobe;
}

RegionClassifier separatrix_and_regions(const StationarySet& set, const PendulumConfig& c) {
  const double tol = 1e-10 * std::max(1.0, std::abs(set.separatrix_h.value_or(0.0)));
  if (set.regime == Regime::symmetric_degenerate && set.degenerate_circle_s3) {
    // s3 is conserved, the circle splits the sphere into two caps
    return RegionClassifier(*set.separatrix_h, *set.degenerate_circle_s3, 0.0, tol, c);
  }
  if (set.regime != Regime::four_point || !set.separatrix_h) {
    throw DomainError(std::string("separatrix regions need the four-point regime, got ") +
                      std::string(to_string(set.regime)));
  }
  const StationaryPoint* saddle = nullptr;
  for (const auto& p : set.points) {
    if (p.stability == Stability::unstable_saddle) saddle = &p;
  }
  const double h_sep = *set.separatrix_h;
  int above = 0, below = 0;
  for (const auto& p : set.points) {
    if (p.stability != Stability::stable_center) continue;
    (hamiltonian_h(p.state, c) > h_sep ? above : below)++;
  }
  const double lobe_sign = above >= below ? 1.0 : -1.0;
  return RegionClassifier(h_sep, saddle->state.s3, lobe_sign, tol, c);
}

double parabola_curvature_radius(double s3, const PendulumConfig& c) {
  validate(c);
  detail::require_finite(s3, "s3");
  if (c.delta_omega == 0.0) {
    throw DomainError("curvature radius is undefined for delta_omega = 0 (the cylinder is a pair of planes)");
  }
  const double dw = c.delta_omega;
  const double slope = 2.0 * c.omega_rot / dw - 3.0 * c.omega / (8.0 * dw) * s3;
  const double base = 1.0 + slope * slope;
  return 8.0 * std::abs(dw) / (3.0 * c.omega) * base * std::sqrt(base);
}

double critical_contact_s3(const PendulumConfig& c) {
  validate(c);
  if (c.delta_omega == 0.0) {
    throw DomainError("critical contact point is undefined for delta_omega = 0");
  }
  const double r = 2.0 * c.omega_rot / c.delta_omega;
  return 8.0 * c.delta_omega / (3.0 * c.omega) * (r + std::cbrt(r));
}

nlohmann::json to_json(const StationarySet& set) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : set.points) {
    pts.push_back({{"s1", p.state.s1},
                   {"s2", p.state.s2},
                   {"s3", p.state.s3},
                   {"stability", std::string(to_string(p.stability))},
                   {"residual", p.residual}});
  }
  nlohmann::json j{{"points", pts},
                   {"s0", set.s0},
                   {"s0_crit", set.s0_crit},
                   {"regime", std::string(to_string(set.regime))}};
  j["separatrix_h"] = set.separatrix_h ? nlohmann::json(*set.separatrix_h) : nlohmann::json(nullptr);
  if (set.degenerate_circle_s3) j["degenerate_circle_s3"] = *set.degenerate_circle_s3;
  if (set.local_extremum_h) j["local_extremum_h"] = *set.local_extremum_h;
  return j;
}

}  // namespace foucault
