#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "foucault/config.hpp"

namespace foucault {

struct DickeBasis {
  int n_particles = 1;

  double spin() const noexcept { return 0.5 * n_particles; }
  std::size_t dimension() const noexcept { return static_cast<std::size_t>(n_particles) + 1; }
  double m(std::size_t index) const noexcept { return -spin() + static_cast<double>(index); }
  double casimir() const noexcept { return spin() * (spin() + 1.0); }
};

// Delta_omega S1 - 2 Omega S3 + (3/16) omega S3^2 in the Dicke basis, m ascending.
struct TridiagonalHamiltonian {
  DickeBasis basis;
  PendulumConfig config;
  std::vector<double> diag;
  std::vector<double> offdiag;

  std::size_t dimension() const noexcept { return diag.size(); }
  double max_abs_entry() const;
};

TridiagonalHamiltonian build_hamiltonian(int n_particles, const PendulumConfig& c);

// Ascending eigenvalues by implicit-shift QL. Every `verify_stride`-th
// eigenpair (plus the extremes) is checked by inverse iteration against
// |Hv - lambda v| <= 1e-10 |H|; 0 disables the check.
std::vector<double> eigen_spectrum(const TridiagonalHamiltonian& h, std::size_t verify_stride = 16);

// Eigenpair residual |Hv - lambda v| / |v| with v from inverse iteration.
double eigenpair_residual(const TridiagonalHamiltonian& h, double lambda);

struct Histogram {
  std::vector<double> edges;   // ascending, size n+1
  std::vector<double> values;  // size n

  std::size_t bins() const noexcept { return values.size(); }
  double width(std::size_t i) const { return edges[i + 1] - edges[i]; }
  double center(std::size_t i) const { return 0.5 * (edges[i] + edges[i + 1]); }
  std::optional<std::size_t> bin_of(double x) const;
};

struct EnergyRange {
  double lo = 0.0;
  double hi = 0.0;
};

// Exact range of H / s0^2 over the sphere of radius s0.
EnergyRange classical_energy_range(const PendulumConfig& c, double s0);

// That range padded by 5% on each side, split into n_bins equal bins.
std::vector<double> dos_bin_edges(const PendulumConfig& c, double s0, std::size_t n_bins);

// Same, widened when needed so that every value in `extra` (already rescaled)
// falls inside.
std::vector<double> dos_bin_edges(const PendulumConfig& c, double s0, std::size_t n_bins,
                                  const std::vector<double>& extra);

inline constexpr std::size_t kDefaultClassicalBins = 200;
inline constexpr std::size_t kDefaultClassicalSamples = 1'000'000;

// Density of H / s0^2 for points uniform on the sphere, unit integral.
Histogram classical_dos(const PendulumConfig& c, double s0, const std::vector<double>& edges,
                        std::size_t n_samples, std::uint64_t seed, unsigned threads = 1);
Histogram classical_dos(const PendulumConfig& c, double s0, std::size_t n_bins,
                        std::size_t n_samples, std::uint64_t seed, unsigned threads = 1);

// Counts of eigenvalues / (N/2)^2 per bin.
Histogram quantum_dos(const std::vector<double>& eigenvalues, int n_particles,
                      const std::vector<double>& edges);

// Square-root rule: ceil(sqrt(N+1)) bins, at least 4.
std::size_t default_quantum_bins(int n_particles);

enum class LmgCase { symmetric_rotating, asymmetric_static };
std::string_view to_string(LmgCase c);

struct LmgMapping {
  double omega = 0.0;
  double delta_omega = 0.0;
  double omega_rot = 0.0;
  LmgCase lmg_case = LmgCase::symmetric_rotating;

  PendulumConfig apply(PendulumConfig base = {}) const;
};

// H = eps J_z + V (J_x^2 - J_y^2) + W (J_x^2 + J_y^2) for V = 0 or V = -W.
LmgMapping lmg_map(double epsilon, double v, double w);

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

struct SpectrumResult {
  PendulumConfig config;
  int n_particles = 0;
  std::vector<double> eigenvalues;
  Histogram quantum;    // counts
  Histogram classical;  // density
  std::optional<double> separatrix_eps;
  std::optional<double> local_extremum_eps;
  EnergyRange classical_range;
  std::uint64_t seed = 0;
};

struct DosFeatures {
  std::size_t peak_bin = 0;
  // Bin j with the largest ratio values[j] / values[j+1] past the peak, among
  // bins lying entirely inside `range` (the spectrum ends are excluded).
  std::optional<std::size_t> step_bin;
  // Edge between step_bin and the next bin, where the drop is seen. A step
  // inside either neighbouring bin shows up here, so its resolution is one
  // bin width.
  std::optional<double> step_edge;
};

DosFeatures dos_features(const Histogram& h, const EnergyRange& range);

struct SpectrumOptions {
  std::size_t n_bins = 0;  // 0: default_quantum_bins
  std::size_t classical_samples = kDefaultClassicalSamples;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

SpectrumResult compute_spectrum(int n_particles, const PendulumConfig& c, const SpectrumOptions& opt);

// One spectrum per delta_omega value; point i uses derive_seed(opt.seed, i).
std::vector<SpectrumResult> spectrum_sweep(int n_particles, const PendulumConfig& base,
                                           const std::vector<double>& delta_omegas,
                                           const SpectrumOptions& opt);

void write_spectrum_csv(std::ostream& os, const std::vector<SpectrumResult>& sweep);
// bin_center, quantum_density, classical_density; quantum counts are divided
// by (N+1) times the bin width.
void write_dos_csv(std::ostream& os, const SpectrumResult& r);

}  // namespace foucault
