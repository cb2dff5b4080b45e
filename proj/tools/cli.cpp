#include "cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include "foucault/cartesian_reference.hpp"
#include "foucault/error.hpp"
#include "foucault/io.hpp"
#include "foucault/parallel.hpp"
#include "foucault/quantum_lmg.hpp"
#include "foucault/reduced_dynamics.hpp"
#include "foucault/scenarios.hpp"
#include "foucault/stationary.hpp"
#include "params.hpp"

namespace foucault::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;
};

std::string csv_cell(const json& v) {
  if (v.is_null()) return "";
  if (v.is_number_float()) return format_double(v.get<double>());
  if (v.is_number()) return v.dump();
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  return v.get<std::string>();
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

struct Context {
  std::string command;
  fs::path out_dir;
  std::string format;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  Params params;
  json seeds = json::object();
  json outputs = json::array();
  json warnings = json::array();
  std::ostream* out = nullptr;

  void write_file(const std::string& name, const std::string& content) {
    fs::create_directories(out_dir);
    std::ofstream f(out_dir / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (out_dir / name).string());
    f << content;
    outputs.push_back(name);
  }

  void write_json(const std::string& stem, const json& j) { write_file(stem + ".json", j.dump(2) + "\n"); }

  void write_table(const std::string& stem, const Table& t) {
    if (format == "json") {
      json j{{"columns", t.columns}, {"rows", json::array()}};
      for (const auto& r : t.rows) j["rows"].push_back(r);
      write_json(stem, j);
      return;
    }
    std::ostringstream os;
    for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
    os << '\n';
    for (const auto& r : t.rows) {
      for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << csv_cell(r[i]);
      os << '\n';
    }
    write_file(stem + ".csv", os.str());
  }

  void warn(const std::string& w) { warnings.push_back(w); }
};

PendulumConfig pendulum(Params& p) {
  PendulumConfig c;
  c.omega = p.number("pendulum.omega", 1.0);
  c.delta_omega = p.number("pendulum.delta_omega", 0.02);
  c.omega_rot = p.number("pendulum.omega_rot", 0.01);
  c.gamma_x = p.number("pendulum.gamma_x", 0.0);
  c.gamma_y = p.number("pendulum.gamma_y", 0.0);
  c.length = p.number("pendulum.length", 1.0);
  c.mass = p.number("pendulum.mass", 1.0);
  return c;
}

void config_warnings(Context& ctx, const PendulumConfig& c) {
  for (const auto& w : validate(c)) ctx.warn(w);
}

std::vector<double> linspace(double lo, double hi, long long steps, const char* name) {
  if (steps < 1) throw ValidationError(std::string(name) + " must be at least 1");
  std::vector<double> v;
  for (long long i = 0; i < steps; ++i) {
    v.push_back(steps == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(steps - 1));
  }
  return v;
}

std::string brief(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

int cmd_simulate(Context& ctx) {
  auto& p = ctx.params;
  const PendulumConfig c = pendulum(p);
  config_warnings(ctx, c);
  const StokesState init{p.number("simulate.s1", 0.2), p.number("simulate.s2", 0.0),
                         p.number("simulate.s3", 0.0)};
  const double period = kTwoPi / c.omega;
  const double t_end = p.number("simulate.t_end", 100.0 * period);
  const double dt = p.number("simulate.dt", period / 256.0);
  const std::string model = p.text("simulate.model", "reduced");
  json summary{{"initial", {init.s1, init.s2, init.s3}}, {"t_end", t_end}, {"dt", dt}, {"model", model}};

  if (model == "reduced") {
    const FlowKind kind = flow_kind_from_string(p.text("simulate.flow", "combined"));
    const Trajectory tr = integrate(init, c, kind, t_end, dt);
    Table t{{"t", "s1", "s2", "s3", "s0", "H", "H_drift"}, {}};
    for (std::size_t i = 0; i < tr.size(); ++i) {
      const auto& s = tr.states[i];
      t.rows.push_back({tr.times[i], s.s1, s.s2, s.s3, tr.s0_values[i], tr.h_values[i],
                        tr.h_values[i] - tr.h_values[0]});
    }
    ctx.write_table("trajectory", t);
    const double s0 = init.s0();
    summary["steps"] = tr.size() - 1;
    summary["max_s0_drift_rel"] = s0 > 0 ? tr.max_s0_drift() / s0 : 0.0;
    const double hs = std::max(std::abs(tr.h_values.front()), c.omega * s0 * s0);
    summary["max_h_drift_rel"] = hs > 0 ? tr.max_h_drift() / hs : 0.0;
    *ctx.out << "simulate: " << tr.size() - 1 << " steps, relative drift s0 "
             << brief(summary["max_s0_drift_rel"].get<double>()) << ", H "
             << brief(summary["max_h_drift_rel"].get<double>()) << "\n";
  } else if (model == "full") {
    const CartesianTrajectory tr = integrate_full(seed_from_stokes(init, c), c, t_end, dt);
    Table t{{"t", "x", "y", "xdot", "ydot", "energy", "angular_momentum"}, {}};
    for (std::size_t i = 0; i < tr.size(); ++i) {
      t.rows.push_back({tr.t[i], tr.x[i], tr.y[i], tr.xdot[i], tr.ydot[i], tr.energy[i],
                        tr.angular_momentum[i]});
    }
    ctx.write_table("cartesian", t);
    double drift = 0.0;
    for (double e : tr.energy) drift = std::max(drift, std::abs(e - tr.energy.front()));
    summary["steps"] = tr.size() - 1;
    summary["max_energy_drift_rel"] = drift / std::abs(tr.energy.front());
    *ctx.out << "simulate (full model): " << tr.size() - 1 << " steps, relative energy drift "
             << brief(summary["max_energy_drift_rel"].get<double>()) << "\n";
  } else {
    throw ValidationError("simulate.model must be 'reduced' or 'full', got '" + model + "'");
  }
  ctx.write_json("summary", summary);
  return kExitOk;
}

int cmd_stationary(Context& ctx) {
  auto& p = ctx.params;
  const PendulumConfig c = pendulum(p);
  config_warnings(ctx, c);
  const double s0 = p.number("stationary.s0", 1.0);
  const StationarySet set = stationary_points(c, s0);
  json j = to_json(set);
  j["unstable_count"] = set.count(Stability::unstable_saddle);
  ctx.write_json("stationary", j);
  *ctx.out << "stationary: " << set.points.size() << " points, regime " << to_string(set.regime)
           << ", s0_crit " << brief(set.s0_crit) << "\n";
  return kExitOk;
}

int cmd_critical(Context& ctx) {
  auto& p = ctx.params;
  PendulumConfig c = pendulum(p);
  const auto dws = linspace(p.number("critical.delta_omega_min", 0.0),
                            p.number("critical.delta_omega_max", 0.05),
                            p.integer("critical.delta_omega_steps", 21), "critical.delta_omega_steps");
  const auto oms = linspace(p.number("critical.omega_rot_min", 0.0),
                            p.number("critical.omega_rot_max", 0.05),
                            p.integer("critical.omega_rot_steps", 21), "critical.omega_rot_steps");
  Table t{{"delta_omega", "omega_rot", "s0_crit"}, {}};
  for (double dw : dws) {
    for (double om : oms) {
      c.delta_omega = dw;
      c.omega_rot = om;
      t.rows.push_back({dw, om, critical_s0(c)});
    }
  }
  ctx.write_table("critical", t);
  *ctx.out << "critical: " << t.rows.size() << " grid points\n";
  return kExitOk;
}

int cmd_spectrum(Context& ctx) {
  auto& p = ctx.params;
  PendulumConfig c = pendulum(p);
  const long long n = p.integer("quantum.n", 50);
  if (n < 1 || n > 100000) throw ValidationError("quantum.n must lie in [1, 100000]");
  const double u = 3.0 / 16.0 * c.omega * static_cast<double>(n);
  c.omega_rot = p.number("quantum.omega_rot_u", 0.0) * u;
  const auto grid = linspace(p.number("quantum.delta_omega_u_min", 0.0),
                             p.number("quantum.delta_omega_u_max", 2.0),
                             p.integer("quantum.delta_omega_steps", 81), "quantum.delta_omega_steps");
  std::vector<std::vector<double>> eig(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    PendulumConfig ci = c;
    ci.delta_omega = grid[i] * u;
    eig[i] = eigen_spectrum(build_hamiltonian(static_cast<int>(n), ci));
  }, ctx.threads);
  Table t{{"delta_omega", "index", "eigenvalue"}, {}};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t k = 0; k < eig[i].size(); ++k) t.rows.push_back({grid[i] * u, k, eig[i][k]});
  }
  ctx.write_table("spectrum", t);
  *ctx.out << "spectrum: N = " << n << ", " << grid.size() << " values of delta_omega\n";
  return kExitOk;
}

int cmd_dos(Context& ctx) {
  auto& p = ctx.params;
  PendulumConfig c = pendulum(p);
  const long long n = p.integer("quantum.n", 200);
  if (n < 1 || n > 100000) throw ValidationError("quantum.n must lie in [1, 100000]");
  const double u = 3.0 / 16.0 * c.omega * static_cast<double>(n);
  c.delta_omega = p.number("quantum.delta_omega_u", 0.1) * u;
  c.omega_rot = p.number("quantum.omega_rot_u", 0.2) * u;
  SpectrumOptions opt;
  const long long bins = p.integer("quantum.bins", 0);
  const long long samples = p.integer("quantum.samples", static_cast<long long>(kDefaultClassicalSamples));
  if (bins < 0 || samples < 1) throw ValidationError("quantum.bins must be >= 0 and quantum.samples >= 1");
  opt.n_bins = static_cast<std::size_t>(bins);
  opt.classical_samples = static_cast<std::size_t>(samples);
  opt.seed = derive_seed(ctx.seed, 0);
  opt.threads = ctx.threads;
  ctx.seeds["classical_dos"] = opt.seed;
  const SpectrumResult r = compute_spectrum(static_cast<int>(n), c, opt);
  const DosFeatures f = dos_features(r.quantum, r.classical_range);

  std::optional<std::size_t> sep_bin, loc_bin;
  if (r.separatrix_eps) sep_bin = r.quantum.bin_of(*r.separatrix_eps);
  if (r.local_extremum_eps) loc_bin = r.quantum.bin_of(*r.local_extremum_eps);
  Table t{{"bin_lo", "bin_hi", "bin_center", "quantum_count", "quantum_density", "classical_density", "marker"}, {}};
  const double norm = static_cast<double>(n + 1);
  for (std::size_t i = 0; i < r.quantum.bins(); ++i) {
    std::string marker;
    auto mark = [&](const char* m) { marker += marker.empty() ? m : std::string(";") + m; };
    if (sep_bin && *sep_bin == i) mark("separatrix");
    if (loc_bin && *loc_bin == i) mark("local_extremum");
    if (f.peak_bin == i) mark("peak");
    if (f.step_bin && *f.step_bin == i) mark("step");
    t.rows.push_back({r.quantum.edges[i], r.quantum.edges[i + 1], r.quantum.center(i),
                      r.quantum.values[i], r.quantum.values[i] / (norm * r.quantum.width(i)),
                      r.classical.values[i], marker});
  }
  ctx.write_table("dos", t);
  json j{{"n_particles", n},
         {"delta_omega", c.delta_omega},
         {"omega_rot", c.omega_rot},
         {"bins", r.quantum.bins()},
         {"classical_range", {r.classical_range.lo, r.classical_range.hi}},
         {"regime", std::string(to_string(stationary_points(c, 0.5 * static_cast<double>(n)).regime))},
         {"peak_bin", f.peak_bin}};
  j["separatrix_eps"] = r.separatrix_eps ? json(*r.separatrix_eps) : json(nullptr);
  j["separatrix_bin"] = sep_bin ? json(*sep_bin) : json(nullptr);
  j["local_extremum_eps"] = r.local_extremum_eps ? json(*r.local_extremum_eps) : json(nullptr);
  j["local_extremum_bin"] = loc_bin ? json(*loc_bin) : json(nullptr);
  j["step_bin"] = f.step_bin ? json(*f.step_bin) : json(nullptr);
  j["step_edge"] = f.step_edge ? json(*f.step_edge) : json(nullptr);
  ctx.write_json("dos_features", j);
  *ctx.out << "dos: N = " << n << ", " << r.quantum.bins() << " bins, peak bin " << f.peak_bin;
  if (sep_bin) *ctx.out << ", separatrix bin " << *sep_bin;
  *ctx.out << "\n";
  return kExitOk;
}

int cmd_zeno(Context& ctx) {
  auto& p = ctx.params;
  ZenoProtocol proto;
  proto.omega = p.number("pendulum.omega", 1.0);
  proto.omega_rot = p.number("zeno.omega_rot", 0.01);
  proto.gamma_filter = p.number("zeno.gamma_filter", 10.0);
  proto.filter_duration = p.number("zeno.filter_duration", 3.0);
  const auto ns = p.list("zeno.n_filters", {1, 2, 4, 8, 16, 32});
  Table t{{"n_filters", "fraction", "ideal", "relative_error"}, {}};
  for (double nd : ns) {
    if (nd != std::floor(nd)) throw ValidationError("zeno.n_filters entries must be integers");
    proto.n_filters = static_cast<int>(nd);
    const double f = zeno_run(proto);
    const double ideal = zeno_ideal_fraction(proto.n_filters);
    t.rows.push_back({proto.n_filters, f, ideal, ideal > 0 ? finite_or_null(f / ideal - 1.0) : json(nullptr)});
    *ctx.out << "zeno: n = " << proto.n_filters << " fraction " << brief(f) << "\n";
  }
  ctx.write_table("zeno", t);
  return kExitOk;
}

int cmd_squeeze(Context& ctx) {
  auto& p = ctx.params;
  PendulumConfig c;
  c.omega = p.number("pendulum.omega", 1.0);
  EnsembleSpec e;
  const long long members = p.integer("squeeze.members", 10000);
  if (members < 2) throw ValidationError("squeeze.members must be at least 2");
  e.n_members = static_cast<std::size_t>(members);
  e.s0 = p.number("squeeze.s0", 1.0);
  e.spread = p.number("squeeze.spread", 0.01);
  e.seed = derive_seed(ctx.seed, 0);
  ctx.seeds["ensemble"] = e.seed;
  const SqueezeWindow w = squeeze_window(e, c);
  double tau = p.number("squeeze.tau", 0.0);
  if (tau == 0.0) tau = w.mid();
  const SqueezeResult r = squeeze_ensemble(e, c, tau, ctx.threads);
  for (const auto& m : r.warnings) ctx.warn(m);
  const auto flat = derotate_ensemble(r.members, r.alpha);
  const Covariance2 fc = covariance_s23(flat);
  const double k = 3.0 / 8.0 * e.s0 * c.omega * tau;

  auto members_table = [](const std::vector<StokesState>& m) {
    Table t{{"member", "s1", "s2", "s3"}, {}};
    for (std::size_t i = 0; i < m.size(); ++i) t.rows.push_back({i, m[i].s1, m[i].s2, m[i].s3});
    return t;
  };
  ctx.write_table("ensemble", members_table(r.members));
  ctx.write_table("derotated", members_table(flat));
  json j{{"tau", tau},
         {"window", {w.lower, w.upper}},
         {"var_s2", r.var_s2},
         {"var_s3", r.var_s3},
         {"cov_s23", r.cov_s23},
         {"delta_plus", r.delta_plus},
         {"delta_minus", r.delta_minus},
         {"alpha", r.alpha},
         {"predicted_delta_plus", k * e.spread},
         {"predicted_delta_minus", e.spread / k},
         {"predicted_alpha", 1.0 / k},
         {"derotated_std_s2", std::sqrt(fc.var_a)},
         {"derotated_std_s3", std::sqrt(fc.var_b)},
         {"warnings", r.warnings}};
  ctx.write_json("squeeze", j);
  *ctx.out << "squeeze: tau " << brief(tau) << ", delta_plus " << brief(r.delta_plus)
           << ", delta_minus " << brief(r.delta_minus) << "\n";
  return kExitOk;
}

int cmd_validate(Context& ctx) {
  auto& p = ctx.params;
  const double omega = p.number("pendulum.omega", 1.0);
  const auto s0s = p.list("validate.s0", {0.05, 0.1, 0.2, 0.3});
  const auto dws = p.list("validate.delta_omega", {0.0, 0.01, 0.02});
  const auto oms = p.list("validate.omega_rot", {0.0, 0.01, 0.02});
  const double periods = p.number("validate.periods", 50.0);
  const double tol = p.number("validate.tolerance", 0.05);
  struct Cell {
    double s0, dw, om, dev = 0.0;
  };
  std::vector<Cell> cells;
  for (double s0 : s0s) {
    for (double dw : dws) {
      for (double om : oms) cells.push_back({s0, dw, om});
    }
  }
  parallel_for(cells.size(), [&](std::size_t i) {
    PendulumConfig c;
    c.omega = omega;
    c.delta_omega = cells[i].dw;
    c.omega_rot = cells[i].om;
    cells[i].dev = compare_reduced_full({cells[i].s0, 0.0, 0.0}, c, periods * kTwoPi / omega).max_deviation;
  }, ctx.threads);
  Table t{{"s0", "delta_omega", "omega_rot", "max_deviation", "pass"}, {}};
  std::size_t failed = 0;
  for (const auto& cl : cells) {
    const bool ok = cl.dev < tol;
    failed += ok ? 0 : 1;
    t.rows.push_back({cl.s0, cl.dw, cl.om, cl.dev, ok});
    *ctx.out << (ok ? "PASS" : "FAIL") << " s0=" << brief(cl.s0) << " delta_omega="
             << brief(cl.dw) << " omega_rot=" << brief(cl.om) << " deviation "
             << brief(cl.dev) << "\n";
  }
  ctx.write_table("validate", t);
  ctx.write_json("validate_summary", {{"cells", cells.size()}, {"failed", failed}, {"tolerance", tol}, {"pass", failed == 0}});
  *ctx.out << "validate: " << cells.size() - failed << "/" << cells.size() << " cells within " << brief(tol) << "\n";
  return failed == 0 ? kExitOk : kExitAcceptance;
}

int cmd_sweep(Context& ctx) {
  auto& p = ctx.params;
  const PendulumConfig c = pendulum(p);
  config_warnings(ctx, c);
  const double crit = critical_s0(c);
  const auto s0s = linspace(p.number("sweep.s0_min", 0.25 * crit), p.number("sweep.s0_max", 4.0 * crit),
                            p.integer("sweep.steps", 40), "sweep.steps");
  Table t{{"s0", "s0_over_crit", "points", "saddles", "regime", "separatrix_h"}, {}};
  for (double s0 : s0s) {
    const StationarySet set = stationary_points(c, s0);
    t.rows.push_back({s0, s0 / crit, set.points.size(), set.count(Stability::unstable_saddle),
                      std::string(to_string(set.regime)),
                      set.separatrix_h ? json(*set.separatrix_h) : json(nullptr)});
  }
  ctx.write_table("sweep", t);
  *ctx.out << "sweep: " << s0s.size() << " radii, s0_crit " << brief(crit) << "\n";
  return kExitOk;
}

std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << v;
  return os.str();
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Asymmetric Foucault pendulum in Stokes parameters", "foucault"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string config_path, out_dir = "foucault_out", format = "csv";
  std::uint64_t seed = 0;
  std::vector<std::string> sets;
  app.add_option("--config", config_path, "key=value parameter file with [sections]");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "master random seed");
  app.add_option("--format", format, "table format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--set", sets, "override a parameter, section.key=value");

  const std::map<std::string, std::pair<const char*, std::function<int(Context&)>>> commands{
      {"simulate", {"integrate the reduced or the full model", cmd_simulate}},
      {"stationary", {"stationary points and their stability", cmd_stationary}},
      {"critical", {"critical radius over a (delta_omega, Omega) grid", cmd_critical}},
      {"spectrum", {"quantum eigenvalues against delta_omega", cmd_spectrum}},
      {"dos", {"quantum and classical densities of states", cmd_dos}},
      {"zeno", {"filter sequence transmission", cmd_zeno}},
      {"squeeze", {"twisting of a near-linear ensemble", cmd_squeeze}},
      {"validate", {"reduced against full model over a grid", cmd_validate}},
      {"sweep", {"stationary regimes over a range of s0", cmd_sweep}},
  };
  for (const auto& [name, entry] : commands) app.add_subcommand(name, entry.first)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  Context ctx;
  ctx.command = app.get_subcommands().front()->get_name();
  ctx.out_dir = out_dir;
  ctx.format = format;
  ctx.seed = seed;
  ctx.threads = default_thread_count();
  ctx.out = &out;

  const auto start = std::chrono::steady_clock::now();
  int code = kExitOk;
  std::string status = "ok", message;
  try {
    if (!config_path.empty()) ctx.params.load_file(config_path);
    for (const auto& s : sets) ctx.params.set(s);
    code = commands.at(ctx.command).second(ctx);
    for (const auto& k : ctx.params.unused()) ctx.warn("unused parameter " + k);
    if (code == kExitAcceptance) status = "failed";
  } catch (const ValidationError& e) {
    code = kExitValidation;
    status = "invalid";
    message = e.what();
  } catch (const DomainError& e) {
    code = kExitValidation;
    status = "invalid";
    message = e.what();
  } catch (const std::exception& e) {
    code = kExitInternal;
    status = "error";
    message = e.what();
  }
  for (const auto& w : ctx.warnings) err << "warning: " << w.get<std::string>() << "\n";
  if (!message.empty()) err << "error: " << message << "\n";

  const double duration =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json inputs{{"command", ctx.command}, {"params", ctx.params.used()}, {"seed", seed}, {"format", format}};
  ctx.seeds["master"] = seed;
  json manifest{{"command", ctx.command},
                {"version", kVersion},
                {"params", ctx.params.used()},
                {"seeds", ctx.seeds},
                {"format", format},
                {"outputs", ctx.outputs},
                {"warnings", ctx.warnings},
                {"status", status},
                {"exit_code", code},
                {"threads", ctx.threads},
                {"duration_s", duration},
                {"input_hash", hex(fnv1a(inputs.dump()))}};
  if (!message.empty()) manifest["error"] = message;
  try {
    fs::create_directories(ctx.out_dir);
    std::ofstream(ctx.out_dir / "manifest.json") << manifest.dump(2) << "\n";
  } catch (const std::exception& e) {
    err << "error: cannot write manifest: " << e.what() << "\n";
    if (code == kExitOk) code = kExitInternal;
  }
  return code;
}

}  // namespace foucault::cli
