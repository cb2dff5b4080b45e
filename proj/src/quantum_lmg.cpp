#include "foucault/quantum_lmg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "foucault/error.hpp"
#include "foucault/io.hpp"
#include "foucault/parallel.hpp"
#include "foucault/reduced_dynamics.hpp"
#include "foucault/stationary.hpp"
#include "foucault/stokes.hpp"

namespace foucault {

namespace {

constexpr int kQlIterationCap = 60;

double inf_norm(const TridiagonalHamiltonian& h) {
  double best = 0.0;
  const std::size_t n = h.dimension();
  for (std::size_t i = 0; i < n; ++i) {
    double row = std::abs(h.diag[i]);
    if (i > 0) row += std::abs(h.offdiag[i - 1]);
    if (i + 1 < n) row += std::abs(h.offdiag[i]);
    best = std::max(best, row);
  }
  return best;
}

// Implicit QL with Wilkinson-type shift on a symmetric tridiagonal matrix.
// d: diagonal (overwritten by eigenvalues), e: sub-diagonal with e[n-1] = 0.
void tql(std::vector<double>& d, std::vector<double>& e) {
  const int n = static_cast<int>(d.size());
  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (iter++ == kQlIterationCap) {
          throw ConvergenceError("tridiagonal QL did not converge", std::abs(e[l]));
        }
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        int i;
        for (i = m - 1; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

// Solves (T - sigma I) x = b in place by LU with partial pivoting.
void shifted_solve(const TridiagonalHamiltonian& h, double sigma, double tiny, std::vector<double>& b) {
  const std::size_t n = h.dimension();
  std::vector<double> d(n), dl(h.offdiag), du(h.offdiag), du2(n > 2 ? n - 2 : 0, 0.0);
  std::vector<bool> swapped(n, false);
  for (std::size_t i = 0; i < n; ++i) d[i] = h.diag[i] - sigma;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (std::abs(d[i]) >= std::abs(dl[i])) {
      if (d[i] != 0.0) {
        const double fact = dl[i] / d[i];
        dl[i] = fact;
        d[i + 1] -= fact * du[i];
      }
    } else {
      const double fact = d[i] / dl[i];
      d[i] = dl[i];
      dl[i] = fact;
      const double temp = du[i];
      du[i] = d[i + 1];
      d[i + 1] = temp - fact * d[i + 1];
      if (i + 2 < n) {
        du2[i] = du[i + 1];
        du[i + 1] = -fact * du[i + 1];
      }
      swapped[i] = true;
    }
  }
  for (auto& v : d) {
    if (std::abs(v) < tiny) v = v < 0.0 ? -tiny : tiny;
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (!swapped[i]) {
      b[i + 1] -= dl[i] * b[i];
    } else {
      const double temp = b[i];
      b[i] = b[i + 1];
      b[i + 1] = temp - dl[i] * b[i];
    }
  }
  for (std::size_t k = n; k-- > 0;) {
    double v = b[k];
    if (k + 1 < n) v -= du[k] * b[k + 1];
    if (k + 2 < n) v -= du2[k] * b[k + 2];
    b[k] = v / d[k];
  }
}

}  // namespace

double TridiagonalHamiltonian::max_abs_entry() const {
  double m = 0.0;
  for (double v : diag) m = std::max(m, std::abs(v));
  for (double v : offdiag) m = std::max(m, std::abs(v));
  return m;
}

TridiagonalHamiltonian build_hamiltonian(int n_particles, const PendulumConfig& c) {
  if (n_particles < 1) throw ValidationError("particle number N must be at least 1");
  validate(c);
  TridiagonalHamiltonian h;
  h.basis.n_particles = n_particles;
  h.config = c;
  const std::size_t dim = h.basis.dimension();
  h.diag.resize(dim);
  h.offdiag.resize(dim - 1);
  const double cas = h.basis.casimir();
  for (std::size_t i = 0; i < dim; ++i) {
    const double m = h.basis.m(i);
    h.diag[i] = -2.0 * c.omega_rot * m + (3.0 / 16.0) * c.omega * m * m;
    if (i + 1 < dim) h.offdiag[i] = 0.5 * c.delta_omega * std::sqrt(cas - m * (m + 1.0));
  }
  return h;
}

double eigenpair_residual(const TridiagonalHamiltonian& h, double lambda) {
  const std::size_t n = h.dimension();
  const double norm = std::max(inf_norm(h), std::numeric_limits<double>::min());
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = 1.0 + 0.25 * std::sin(1.7 * static_cast<double>(i) + 0.3);
  auto normalize = [&] {
    double s = 0.0;
    for (double v : x) s += v * v;
    s = std::sqrt(s);
    for (double& v : x) v /= s;
  };
  normalize();
  for (int it = 0; it < 3; ++it) {
    shifted_solve(h, lambda, 1e-14 * norm, x);
    normalize();
  }
  double res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double hv = h.diag[i] * x[i] - lambda * x[i];
    if (i > 0) hv += h.offdiag[i - 1] * x[i - 1];
    if (i + 1 < n) hv += h.offdiag[i] * x[i + 1];
    res += hv * hv;
  }
  return std::sqrt(res);
}

std::vector<double> eigen_spectrum(const TridiagonalHamiltonian& h, std::size_t verify_stride) {
  const std::size_t n = h.dimension();
  if (n == 0 || h.offdiag.size() + 1 != n) throw ValidationError("malformed tridiagonal matrix");
  std::vector<double> d(h.diag);
  std::vector<double> e(n, 0.0);
  std::copy(h.offdiag.begin(), h.offdiag.end(), e.begin());
  tql(d, e);
  std::sort(d.begin(), d.end());

  if (verify_stride > 0) {
    const double tol = 1e-10 * std::max(inf_norm(h), std::numeric_limits<double>::min());
    for (std::size_t i = 0; i < n; ++i) {
      if (i % verify_stride != 0 && i + 1 != n) continue;
      const double r = eigenpair_residual(h, d[i]);
      if (!(r <= tol)) {
        std::ostringstream os;
        os << "eigenpair " << i << " failed verification (residual " << r << ")";
        throw ConvergenceError(os.str(), r);
      }
    }
  }
  return d;
}

std::optional<std::size_t> Histogram::bin_of(double x) const {
  if (edges.size() < 2 || x < edges.front() || x > edges.back()) return std::nullopt;
  auto it = std::upper_bound(edges.begin(), edges.end(), x);
  std::size_t i = static_cast<std::size_t>(it - edges.begin());
  i = i == 0 ? 0 : i - 1;
  return std::min(i, values.size() - 1);
}

EnergyRange classical_energy_range(const PendulumConfig& c, double s0) {
  validate(c);
  detail::require_positive(s0, "s0");
  // H does not depend on s2, so its extremes over the sphere lie on the
  // great circle s2 = 0 or at an interior critical point of the disc.
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  auto take = [&](double h) {
    lo = std::min(lo, h);
    hi = std::max(hi, h);
  };
  constexpr int kScan = 4096;
  for (int i = 0; i < kScan; ++i) {
    const double t = 2.0 * std::numbers::pi * i / kScan;
    take(hamiltonian_h({s0 * std::cos(t), 0.0, s0 * std::sin(t)}, c));
  }
  const StationarySet set = stationary_points(c, s0);
  for (const auto& p : set.points) take(hamiltonian_h(p.state, c));
  if (set.degenerate_circle_s3) take(hamiltonian_h({0.0, 0.0, *set.degenerate_circle_s3}, c));
  return {lo / (s0 * s0), hi / (s0 * s0)};
}

std::vector<double> dos_bin_edges(const PendulumConfig& c, double s0, std::size_t n_bins,
                                  const std::vector<double>& extra) {
  if (n_bins < 1) throw ValidationError("at least one bin is required");
  const EnergyRange range = classical_energy_range(c, s0);
  double lo = range.lo, hi = range.hi;
  for (double v : extra) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  double pad = 0.05 * (hi - lo);
  if (pad == 0.0) pad = 0.05 * std::max(std::abs(lo), 1.0);
  lo -= pad;
  hi += pad;
  std::vector<double> edges(n_bins + 1);
  for (std::size_t i = 0; i <= n_bins; ++i) {
    edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n_bins);
  }
  edges.back() = hi;
  return edges;
}

std::vector<double> dos_bin_edges(const PendulumConfig& c, double s0, std::size_t n_bins) {
  return dos_bin_edges(c, s0, n_bins, {});
}

Histogram classical_dos(const PendulumConfig& c, double s0, const std::vector<double>& edges,
                        std::size_t n_samples, std::uint64_t seed, unsigned threads) {
  validate(c);
  detail::require_positive(s0, "s0");
  if (edges.size() < 2) throw ValidationError("at least one bin is required");
  if (n_samples == 0) throw ValidationError("n_samples must be positive");
  constexpr std::size_t kChunk = 1u << 16;
  const std::size_t chunks = (n_samples + kChunk - 1) / kChunk;
  const std::size_t nb = edges.size() - 1;
  const double lo = edges.front(), hi = edges.back();
  const double inv_width = static_cast<double>(nb) / (hi - lo);
  std::vector<std::vector<std::uint64_t>> partial(chunks, std::vector<std::uint64_t>(nb, 0));

  parallel_for(chunks, [&](std::size_t k) {
    std::mt19937_64 rng(derive_seed(seed, k));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t count = std::min(kChunk, n_samples - k * kChunk);
    auto& hist = partial[k];
    for (std::size_t i = 0; i < count; ++i) {
      // uniform area measure: s3 uniform, azimuth uniform
      const double z = s0 * (2.0 * unit(rng) - 1.0);
      const double phi = 2.0 * std::numbers::pi * unit(rng);
      const double rho = std::sqrt(std::max(s0 * s0 - z * z, 0.0));
      const double eps = hamiltonian_h({rho * std::cos(phi), rho * std::sin(phi), z}, c) / (s0 * s0);
      if (eps < lo || eps > hi) continue;
      auto b = static_cast<std::size_t>((eps - lo) * inv_width);
      hist[std::min(b, nb - 1)]++;
    }
  }, threads);

  Histogram out;
  out.edges = edges;
  out.values.assign(nb, 0.0);
  for (std::size_t b = 0; b < nb; ++b) {
    std::uint64_t total = 0;
    for (const auto& p : partial) total += p[b];
    out.values[b] = static_cast<double>(total) / (static_cast<double>(n_samples) * out.width(b));
  }
  return out;
}

Histogram classical_dos(const PendulumConfig& c, double s0, std::size_t n_bins,
                        std::size_t n_samples, std::uint64_t seed, unsigned threads) {
  return classical_dos(c, s0, dos_bin_edges(c, s0, n_bins), n_samples, seed, threads);
}

Histogram quantum_dos(const std::vector<double>& eigenvalues, int n_particles,
                      const std::vector<double>& edges) {
  if (eigenvalues.empty()) throw ValidationError("no eigenvalues to histogram");
  if (n_particles < 1) throw ValidationError("particle number N must be at least 1");
  if (edges.size() < 2) throw ValidationError("at least one bin is required");
  Histogram out;
  out.edges = edges;
  out.values.assign(edges.size() - 1, 0.0);
  const double s0 = 0.5 * n_particles;
  for (double l : eigenvalues) {
    if (auto b = out.bin_of(l / (s0 * s0))) out.values[*b] += 1.0;
  }
  return out;
}

std::size_t default_quantum_bins(int n_particles) {
  return static_cast<std::size_t>(std::max(4.0, std::ceil(std::sqrt(n_particles + 1.0))));
}

std::string_view to_string(LmgCase c) {
  return c == LmgCase::symmetric_rotating ? "symmetric-rotating" : "asymmetric-static";
}

PendulumConfig LmgMapping::apply(PendulumConfig base) const {
  base.omega = omega;
  base.delta_omega = delta_omega;
  base.omega_rot = omega_rot;
  return base;
}

LmgMapping lmg_map(double epsilon, double v, double w) {
  detail::require_finite(epsilon, "epsilon");
  detail::require_finite(v, "V");
  detail::require_finite(w, "W");
  LmgMapping m;
  if (v == 0.0) {
    m.lmg_case = LmgCase::symmetric_rotating;
    m.omega = -16.0 * w / 3.0;
    m.omega_rot = -0.5 * epsilon;
  } else if (std::abs(v + w) <= 1e-12 * std::abs(w)) {
    m.lmg_case = LmgCase::asymmetric_static;
    m.omega = 32.0 * w / 3.0;
    m.delta_omega = epsilon;
  } else {
    throw ValidationError("generalized LMG case, supply pendulum parameters directly");
  }
  if (!(m.omega > 0.0)) {
    throw ValidationError("LMG parameters map to a non-positive pendulum frequency");
  }
  return m;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(master ^ mix(index));
}

SpectrumResult compute_spectrum(int n_particles, const PendulumConfig& c, const SpectrumOptions& opt) {
  SpectrumResult r;
  r.config = c;
  r.n_particles = n_particles;
  r.seed = opt.seed;
  const auto h = build_hamiltonian(n_particles, c);
  r.eigenvalues = eigen_spectrum(h);
  const double s0 = 0.5 * n_particles;
  std::vector<double> eps(r.eigenvalues.size());
  for (std::size_t i = 0; i < eps.size(); ++i) eps[i] = r.eigenvalues[i] / (s0 * s0);
  const std::size_t nb = opt.n_bins ? opt.n_bins : default_quantum_bins(n_particles);
  const auto edges = dos_bin_edges(c, s0, nb, eps);
  r.quantum = quantum_dos(r.eigenvalues, n_particles, edges);
  r.classical = classical_dos(c, s0, edges, opt.classical_samples, opt.seed, opt.threads);
  r.classical_range = classical_energy_range(c, s0);
  const StationarySet set = stationary_points(c, s0);
  if (set.separatrix_h) r.separatrix_eps = *set.separatrix_h / (s0 * s0);
  if (set.local_extremum_h) r.local_extremum_eps = *set.local_extremum_h / (s0 * s0);
  return r;
}

std::vector<SpectrumResult> spectrum_sweep(int n_particles, const PendulumConfig& base,
                                           const std::vector<double>& delta_omegas,
                                           const SpectrumOptions& opt) {
  std::vector<SpectrumResult> out(delta_omegas.size());
  parallel_for(delta_omegas.size(), [&](std::size_t i) {
    PendulumConfig c = base;
    c.delta_omega = delta_omegas[i];
    SpectrumOptions o = opt;
    o.seed = derive_seed(opt.seed, i);
    o.threads = 1;
    out[i] = compute_spectrum(n_particles, c, o);
  }, opt.threads);
  return out;
}

DosFeatures dos_features(const Histogram& h, const EnergyRange& range) {
  if (h.bins() == 0) throw ValidationError("empty histogram");
  DosFeatures f;
  f.peak_bin = static_cast<std::size_t>(std::max_element(h.values.begin(), h.values.end()) - h.values.begin());
  double best = 0.0;
  for (std::size_t j = f.peak_bin; j + 1 < h.bins(); ++j) {
    if (h.edges[j] < range.lo || h.edges[j + 2] > range.hi) continue;
    if (h.values[j + 1] <= 0.0) continue;
    const double ratio = h.values[j] / h.values[j + 1];
    if (ratio > best) {
      best = ratio;
      f.step_bin = j;
      f.step_edge = h.edges[j + 1];
    }
  }
  return f;
}

void write_spectrum_csv(std::ostream& os, const std::vector<SpectrumResult>& sweep) {
  os << "delta_omega,index,eigenvalue\n";
  for (const auto& r : sweep) {
    for (std::size_t i = 0; i < r.eigenvalues.size(); ++i) {
      os << format_double(r.config.delta_omega) << ',' << i << ',' << format_double(r.eigenvalues[i]) << '\n';
    }
  }
}

void write_dos_csv(std::ostream& os, const SpectrumResult& r) {
  os << "bin_center,quantum_density,classical_density\n";
  const double total = static_cast<double>(r.eigenvalues.size());
  for (std::size_t b = 0; b < r.quantum.bins(); ++b) {
    write_csv_row(os, {r.quantum.center(b), r.quantum.values[b] / (total * r.quantum.width(b)),
                       r.classical.values[b]});
  }
}

}  // namespace foucault
