#include <CLI11.hpp>
#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "foucault/cartesian_reference.hpp"
#include "foucault/parallel.hpp"
#include "foucault/quantum_lmg.hpp"
#include "foucault/reduced_dynamics.hpp"
#include "foucault/scenarios.hpp"
#include "foucault/stationary.hpp"

using namespace foucault;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

PendulumConfig cfg(double dw, double W) {
  PendulumConfig c;
  c.delta_omega = dw;
  c.omega_rot = W;
  return c;
}

double rel(double got, double want) { return std::abs(got / want - 1.0); }

void conservation(Outcome& o) {
  const auto c = cfg(0.02, 0.01);
  const StokesState init{0.12, 0.0, 0.16};
  const auto tr = integrate(init, c, FlowKind::combined, 100 * kTwoPi, kTwoPi / 256);
  const double ds0 = tr.max_s0_drift() / init.s0();
  const double dh = tr.max_h_drift() / std::abs(tr.h_values.front());
  o.detail << "s0 drift " << ds0 << ", H drift " << dh << " ";
  o.check(ds0 < 1e-8, "s0 drift < 1e-8");
  o.check(dh < 1e-8, "H drift < 1e-8");
}

void elementary_rates(Outcome& o) {
  const double s0 = 0.05;
  const auto split = measure_frequency_split(cfg(0.02, 0.0), s0);
  const double e_split = rel(split.split, 0.02);
  const double prec = measure_orbit_precession({s0, 0, 0}, cfg(0, 0.01), 50 * kTwoPi);
  const double e_prec = rel(prec, -0.01);
  const StokesState ell{0.04, 0.0, 0.03};
  const double airy = measure_orbit_precession(ell, cfg(0, 0), 50 * kTwoPi);
  const double e_airy = rel(airy, 3.0 / 16.0 * ell.s3);
  o.detail << "split error " << e_split << ", precession error " << e_prec << ", Airy error " << e_airy << " ";
  o.check(e_split <= 0.02, "frequency split within 2%");
  o.check(e_prec <= 0.02, "precession within 2%");
  o.check(e_airy <= 0.05, "Airy rate within 5%");
}

void validation_grid(Outcome& o) {
  const std::vector<double> values{0.0, 0.01, 0.02};
  int failed = 0, cells = 0;
  double worst = 0.0;
  for (double s0 : {0.05, 0.1, 0.2, 0.3}) {
    for (double dw : values) {
      for (double W : values) {
        const double d = compare_reduced_full({s0, 0, 0}, cfg(dw, W), 50 * kTwoPi).max_deviation;
        ++cells;
        worst = std::max(worst, d);
        if (!(d < 0.05)) {
          ++failed;
          o.detail << "(s0 " << s0 << ", dw " << dw << ", W " << W << ": " << d << ") ";
        }
      }
    }
  }
  o.detail << failed << "/" << cells << " cells over 0.05, worst " << worst << " ";
  o.check(failed == 0, "all cells < 0.05");
}

double count_flip(const std::function<bool(double)>& four_points, double lo, double hi) {
  // four_points(lo) is false and four_points(hi) is true
  while (hi - lo > 1e-5 * hi) {
    const double mid = 0.5 * (lo + hi);
    (four_points(mid) ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

void critical_surface(Outcome& o) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const auto c = cfg(u(rng), u(rng));
    const double crit = critical_s0(c);
    auto four = [&](double s0) { return stationary_points(c, s0).points.size() == 4; };
    o.check(!four(0.5 * crit) && four(2.0 * crit), "count is 2 below and 4 above");
    const double flip = count_flip(four, 0.5 * crit, 2.0 * crit);
    worst = std::max(worst, rel(flip, crit));
  }
  o.detail << "worst flip offset " << worst << " ";
  o.check(worst <= 0.01, "flip within 1% of the critical radius");
  const double W = 0.3, dw = 0.4;
  o.check(critical_s0(cfg(0, W)) == 16.0 * W / 3.0, "16|Omega|/(3 omega)");
  o.check(critical_s0(cfg(dw, 0)) == 8.0 * dw / 3.0, "8|delta_omega|/(3 omega)");
  const auto c0 = cfg(dw, 0);
  auto four0 = [&](double s0) { return stationary_points(c0, s0).points.size() == 4; };
  const double flip0 = count_flip(four0, 0.5 * 8 * dw / 3, 2.0 * 8 * dw / 3);
  o.detail << "Omega = 0 flip offset " << rel(flip0, 8 * dw / 3) << " ";
  o.check(rel(flip0, 8 * dw / 3) <= 0.01, "Omega = 0 count flip at 8|delta_omega|/(3 omega)");
}

void rotating_critical(Outcome& o) {
  const int n = 200;
  const double u = 3.0 / 16.0 * n;
  const double s0 = n / 2.0;
  // four points below the critical delta_omega, two above
  auto two = [&](double dw) { return stationary_points(cfg(dw, 0.2 * u), s0).points.size() == 2; };
  const double dw = count_flip(two, 0.05 * u, u);
  double lo = 0.05 * u, hi = u;
  while (hi - lo > 1e-12 * u) {
    const double mid = 0.5 * (lo + hi);
    (critical_s0(cfg(mid, 0.2 * u)) > s0 ? hi : lo) = mid;
  }
  o.detail << "critical delta_omega " << dw / u << " (count flip), " << lo / u << " (closed form) in units of (3/16) omega N ";
  o.check(rel(dw / u, 0.309) <= 0.005, "count flip within 0.5% of 0.309");
  o.check(rel(lo / u, 0.309) <= 0.005, "closed form within 0.5% of 0.309");
}

void quantum_spectrum(Outcome& o) {
  const int n = 50;
  auto ev = eigen_spectrum(build_hamiltonian(n, cfg(0, 0)));
  std::vector<double> expect;
  for (int m = -25; m <= 25; ++m) expect.push_back(3.0 / 16.0 * m * m);
  std::sort(expect.begin(), expect.end());
  o.check(ev == expect, "diagonal case exact");

  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> r(-2.0, 2.0);
  double worst = 0.0;
  for (int k = 1; k <= 8; ++k) {
    for (int t = 0; t < 10; ++t) {
      PendulumConfig c = cfg(r(rng), r(rng));
      c.omega = 0.1 + std::abs(r(rng));
      const auto h = build_hamiltonian(k, c);
      Eigen::MatrixXd m = Eigen::MatrixXd::Zero(k + 1, k + 1);
      for (int i = 0; i <= k; ++i) m(i, i) = h.diag[i];
      for (int i = 0; i < k; ++i) m(i, i + 1) = m(i + 1, i) = h.offdiag[i];
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
      const auto got = eigen_spectrum(h, 1);
      for (int i = 0; i <= k; ++i) worst = std::max(worst, std::abs(got[i] - es.eigenvalues()[i]));
    }
  }
  o.detail << "dense oracle error " << worst << "; ";
  o.check(worst <= 1e-10, "N <= 8 within 1e-10 of the dense oracle");

  // doublets: lobe states more than half the lobe depth away from the separatrix
  const double u = 3.0 / 16.0 * n;
  const auto c = cfg(0.5 * u, 0);
  ev = eigen_spectrum(build_hamiltonian(n, c));
  const double h_sep = *stationary_points(c, n / 2.0).separatrix_h;
  const double cut = h_sep + 0.5 * (ev.back() - h_sep);
  int pairs = 0;
  double worst_ratio = 0.0;
  for (std::size_t top = ev.size() - 1; top >= 2 && ev[top - 1] > cut; top -= 2) {
    const double ratio = (ev[top] - ev[top - 1]) / (ev[top - 1] - ev[top - 2]);
    worst_ratio = std::max(worst_ratio, ratio);
    ++pairs;
  }
  // outer-region levels below the separatrix are not paired
  double min_outer = INFINITY;
  for (std::size_t i = 0; i + 2 < ev.size() && ev[i + 2] < h_sep; ++i) {
    min_outer = std::min(min_outer, (ev[i + 1] - ev[i]) / (ev[i + 2] - ev[i + 1]));
  }
  o.detail << pairs << " lobe doublets, worst paired/unpaired gap " << worst_ratio
           << ", smallest outer gap ratio " << min_outer << " ";
  o.check(pairs >= 2, "at least two lobe doublets");
  o.check(worst_ratio < 1e-3, "paired gaps < 1e-3 x unpaired gaps");
  o.check(min_outer > 0.1, "outer levels unpaired");
}

void dos_correspondence(Outcome& o) {
  const int n = 200;
  const double u = 3.0 / 16.0 * n;
  SpectrumOptions opt;
  opt.seed = 1;
  opt.threads = default_thread_count();
  const auto r = compute_spectrum(n, cfg(0.5 * u, 0), opt);
  const auto f = dos_features(r.quantum, r.classical_range);
  const auto sep_bin = r.quantum.bin_of(*r.separatrix_eps);
  o.detail << "four-point: peak bin " << f.peak_bin << ", separatrix bin " << (sep_bin ? int(*sep_bin) : -1) << "; ";
  o.check(sep_bin && *sep_bin == f.peak_bin, "peak bin contains the separatrix");

  const auto r6 = compute_spectrum(n, cfg(0.1 * u, 0.2 * u), opt);
  const auto f6 = dos_features(r6.quantum, r6.classical_range);
  const bool found = r6.local_extremum_eps && f6.step_edge;
  const double off = found ? std::abs(*f6.step_edge - *r6.local_extremum_eps) : INFINITY;
  o.detail << "rotating regime: step at " << (found ? *f6.step_edge : NAN) << ", local maximum at "
           << (r6.local_extremum_eps ? *r6.local_extremum_eps : NAN) << ", bin width " << r6.quantum.width(0) << " ";
  o.check(found && off <= r6.quantum.width(0), "discontinuity within one bin of the local maximum");
  o.check(found && *f6.step_bin > f6.peak_bin, "discontinuity separate from the peak");
}

void zeno(Outcome& o) {
  ZenoProtocol p;
  double prev = 0.0, worst = 0.0;
  bool monotone = true, bounded = true;
  double first = 0.0, last = 0.0;
  for (int n = 1; n <= 32; ++n) {
    p.n_filters = n;
    const double f = zeno_run(p);
    const double ideal = zeno_ideal_fraction(n);
    if (n == 1) first = f;
    last = f;
    monotone = monotone && f >= prev;
    bounded = bounded && f <= 1.0;
    worst = std::max(worst, std::abs(f - ideal) / std::max(ideal, 1e-8));
    prev = f;
  }
  o.detail << "n = 1: " << first << ", n = 32: " << last << ", worst deviation from ideal " << worst << " ";
  o.check(first < 1e-8, "n = 1 below 1e-8");
  o.check(monotone && bounded, "monotone and bounded by 1");
  o.check(last > 0.92, "n = 32 above 0.92");
  o.check(worst <= 0.02, "within 2% of cos^(2n)(pi/(2n))");
}

void squeezing(Outcome& o) {
  PendulumConfig c;
  EnsembleSpec e;
  e.n_members = 10000;
  e.seed = 9;
  const double tau = squeeze_window(e, c).mid();
  const auto r = squeeze_ensemble(e, c, tau, default_thread_count());
  const double k = 3.0 / 8.0 * e.s0 * c.omega * tau;
  const double ep = rel(r.delta_plus, k * e.spread);
  const double em = rel(r.delta_minus, e.spread / k);
  const double eprod = rel(r.delta_plus * r.delta_minus, e.spread * e.spread);
  const auto flat = covariance_s23(derotate_ensemble(r.members, r.alpha));
  o.detail << "tau " << tau << ", delta_plus error " << ep << ", delta_minus error " << em << ", product error "
           << eprod << ", derotated std(s3) " << std::sqrt(flat.var_b) << " ";
  o.check(ep <= 0.1, "delta_plus within 10%");
  o.check(em <= 0.1, "delta_minus within 10%");
  o.check(eprod <= 0.1, "product within 10%");
  o.check(std::sqrt(flat.var_b) < e.spread, "derotated std(s3) < spread");
}

void self_trapping(Outcome& o) {
  const auto c = cfg(0.02, 0);
  const double target = 8.0 * 0.02 / 3.0;
  const double t = self_trapping_transition(c, 0.5 * target, 3.0 * target);
  o.detail << "transition at " << t / target << " x 8|delta_omega|/(3 omega) ";
  o.check(rel(t, target) <= 0.02, "within 2% of 8|delta_omega|/(3 omega)");
}

struct Criterion {
  const char* name;
  double budget_s;
  void (*run)(Outcome&);
};

const Criterion kCriteria[] = {
    {"conservation", 1.0, conservation},
    {"elementary rates", 10.0, elementary_rates},
    {"reduced vs full grid", 120.0, validation_grid},
    {"critical surface", 5.0, critical_surface},
    {"rotating critical point", 1.0, rotating_critical},
    {"quantum spectrum", 5.0, quantum_spectrum},
    {"DOS correspondence", 30.0, dos_correspondence},
    {"Zeno", 5.0, zeno},
    {"squeezing", 30.0, squeezing},
    {"self-trapping", 10.0, self_trapping},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  int only = 0;
  app.add_option("--only", only, "run a single criterion (1-10)")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  bool all = true;
  for (int i = 1; i <= 10; ++i) {
    if (only && i != only) continue;
    const Criterion& cr = kCriteria[i - 1];
    Outcome o;
    o.detail.precision(4);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      cr.run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "[exception: " << e.what() << "] ";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.check(secs <= cr.budget_s, "runtime budget");
    std::cout << "criterion " << (i < 10 ? "0" : "") << i << " " << cr.name << ": " << (o.pass ? "PASS" : "FAIL")
              << " | " << o.detail.str() << "| " << secs << " s of " << cr.budget_s << " s\n";
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
