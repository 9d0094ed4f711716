// Batch front end over the C interface. Every run writes CSV tables and a
// JSON summary carrying the full flag set, so results can be regenerated.
#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "teardrop/teardrop.h"

namespace {

using json = nlohmann::json;

constexpr int kExitUsage = 2;
constexpr int kExitModule = 3;
constexpr int kExitIo = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ModuleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(td_status status, const std::string& what) {
  if (status != TD_OK) throw ModuleError(what + " failed (" + td_status_name(status) + "): " + td_last_error());
}

template <class T, void (*Free)(T*)>
struct Releaser {
  void operator()(T* p) const noexcept { Free(p); }
};
using Trajectory = std::unique_ptr<td_trajectory, Releaser<td_trajectory, td_trajectory_free>>;
using Transcription = std::unique_ptr<td_transcription, Releaser<td_transcription, td_transcription_free>>;
using Spectrum = std::unique_ptr<td_spectrum, Releaser<td_spectrum, td_spectrum_free>>;
using Grid = std::unique_ptr<td_grid, Releaser<td_grid, td_grid_free>>;
using Series = std::unique_ptr<td_series, Releaser<td_series, td_series_free>>;

struct Table {
  std::string name;
  std::vector<std::string> columns;
  json rows = json::array();
};

struct Output {
  json result = json::object();
  std::vector<Table> tables;  // the first table is the primary data file
};

std::string csv_cell(const json& v) {
  char buf[64];
  switch (v.type()) {
    case json::value_t::number_float:
      std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
      return buf;
    case json::value_t::number_integer:
      return std::to_string(v.get<long long>());
    case json::value_t::number_unsigned:
      return std::to_string(v.get<unsigned long long>());
    case json::value_t::boolean:
      return v.get<bool>() ? "1" : "0";
    case json::value_t::string:
      return v.get<std::string>();
    case json::value_t::null:
      return "nan";
    default:
      return v.dump();
  }
}

void write_csv(std::ostream& out, const Table& t) {
  for (std::size_t c = 0; c < t.columns.size(); ++c) out << (c ? "," : "") << t.columns[c];
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << csv_cell(row[c]);
    out << '\n';
  }
}

void write_file(const std::string& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path + " for writing");
  body(f);
  f.close();
  if (!f) throw IoError("failed while writing " + path);
}

void emit(const std::string& prefix, const std::string& format, const json& summary, const Output& out) {
  if (format == "json") {
    json doc = summary;
    for (const auto& t : out.tables) doc["tables"][t.name] = {{"columns", t.columns}, {"rows", t.rows}};
    if (prefix == "-") {
      std::cout << doc.dump(2) << '\n';
      if (!std::cout) throw IoError("failed writing to standard output");
      return;
    }
    write_file(prefix + ".json", [&](std::ostream& o) { o << doc.dump(2) << '\n'; });
    return;
  }
  if (prefix == "-") {
    if (!out.tables.empty()) write_csv(std::cout, out.tables.front());
    if (!std::cout) throw IoError("failed writing to standard output");
    return;
  }
  for (std::size_t i = 0; i < out.tables.size(); ++i) {
    const auto& t = out.tables[i];
    write_file(i == 0 ? prefix + ".csv" : prefix + "_" + t.name + ".csv", [&](std::ostream& o) { write_csv(o, t); });
  }
  write_file(prefix + ".json", [&](std::ostream& o) { o << summary.dump(2) << '\n'; });
}

td_params params_from(double u_min, double u_max) {
  if (!std::isfinite(u_min) || !std::isfinite(u_max) || !(u_min < 0.0) || !(u_max > 0.0)) {
    throw UsageError("control bounds must satisfy --u-min < 0 < --u-max");
  }
  return {u_min, u_max};
}

json nan_as_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json switches_of(const td_trajectory* t) {
  size_t count = 0;
  check(td_trajectory_switches(t, nullptr, 0, &count), "switch query");
  std::vector<double> s(count);
  if (count) check(td_trajectory_switches(t, s.data(), count, &count), "switch query");
  return s;
}

Table trajectory_table(const td_trajectory* t, bool with_costate) {
  Table tab{"trajectory", {"t", "x", "y", "u"}};
  if (with_costate) tab.columns.insert(tab.columns.end(), {"px", "py", "phi"});
  for (size_t i = 0; i < td_trajectory_size(t); ++i) {
    td_sample s;
    check(td_trajectory_sample(t, i, &s), "trajectory sample");
    json row = {s.t, s.x, s.y, s.u};
    if (with_costate) row.insert(row.end(), {s.px, s.py, s.phi});
    tab.rows.push_back(std::move(row));
  }
  return tab;
}

struct Bounds {
  double u_min = 0.0;
  double u_max = 0.0;
  void add(CLI::App* sub) {
    sub->add_option("--u-min", u_min, "Lower control bound (< 0), rad^2/s^2")->required();
    sub->add_option("--u-max", u_max, "Upper control bound (> 0), rad^2/s^2")->required();
  }
  td_params params() const { return params_from(u_min, u_max); }
};

// ---- subcommands ------------------------------------------------------------

struct SolveCmd {
  Bounds b;
  std::optional<double> horizon, t1;
  size_t samples = 512;
  void setup(CLI::App* sub) {
    b.add(sub);
    auto* h = sub->add_option("--horizon", horizon, "Period T")->check(CLI::PositiveNumber);
    auto* s = sub->add_option("--t1", t1, "Switch time t1 (alternative to --horizon)")->check(CLI::PositiveNumber);
    h->excludes(s);
    s->excludes(h);
    sub->add_option("--samples", samples, "Uniform samples over [0, T]")->check(CLI::Range(3, 1000000));
  }
  Output run() const {
    if (!horizon && !t1) throw UsageError("exactly one of --horizon or --t1 is required");
    const auto p = b.params();
    double period = horizon.value_or(0.0);
    if (t1) check(td_period_from_switch(p, *t1, &period), "period_from_switch");
    td_trajectory* raw = nullptr;
    check(td_solve(p, period, samples, &raw), "solve");
    Trajectory t(raw);
    td_trajectory_info info;
    check(td_trajectory_info_get(t.get(), &info), "trajectory info");
    td_sample first;
    check(td_trajectory_sample(t.get(), 0, &first), "trajectory sample");
    Output out;
    out.result = {{"t1", info.switch_time},   {"T", info.period},
                  {"lambda", info.lambda},    {"cost", info.cost},
                  {"hyperbole_constant", info.hyperbole_constant},
                  {"hamiltonian", first.hamiltonian},
                  {"switch_times", switches_of(t.get())},
                  {"rows", td_trajectory_size(t.get())}};
    out.tables.push_back(trajectory_table(t.get(), true));
    return out;
  }
};

struct ShootCmd {
  Bounds b;
  double horizon = 0.0;
  size_t samples = 512;
  void setup(CLI::App* sub) {
    b.add(sub);
    sub->add_option("--horizon", horizon, "Period T")->required()->check(CLI::PositiveNumber);
    sub->add_option("--samples", samples, "Uniform samples over [0, T]")->check(CLI::Range(3, 1000000));
  }
  Output run() const {
    const auto p = b.params();
    td_trajectory* raw = nullptr;
    check(td_shoot(p, horizon, samples, &raw), "shooting");
    Trajectory t(raw);
    td_trajectory_info info;
    check(td_trajectory_info_get(t.get(), &info), "trajectory info");
    double analytic = 0.0;
    check(td_switch_from_period(p, horizon, &analytic), "switch_from_period");
    Output out;
    out.result = {{"lambda", info.lambda},
                  {"T", horizon},
                  {"switch_times", switches_of(t.get())},
                  {"residual_x", info.residual_x},
                  {"residual_y", info.residual_y},
                  {"cost", info.cost},
                  {"analytic_t1", analytic},
                  {"t1_error", std::abs(info.switch_time - analytic)}};
    out.tables.push_back(trajectory_table(t.get(), true));
    return out;
  }
};

struct ButterflyCmd {
  Bounds b;
  double horizon = 0.0;
  size_t samples = 512;
  void setup(CLI::App* sub) {
    b.add(sub);
    sub->add_option("--horizon", horizon, "Period T (>= 2 pi / omega_max)")->required()->check(CLI::PositiveNumber);
    sub->add_option("--samples", samples, "Uniform samples over [0, T]")->check(CLI::Range(3, 1000000));
  }
  Output run() const {
    const auto p = b.params();
    td_trajectory* raw = nullptr;
    check(td_butterfly(p, horizon, samples, &raw), "butterfly search");
    Trajectory t(raw);
    td_trajectory_info info;
    check(td_trajectory_info_get(t.get(), &info), "trajectory info");
    double t1 = 0.0, teardrop_cost = 0.0;
    check(td_switch_from_period(p, horizon, &t1), "switch_from_period");
    check(td_optimal_cost(p, t1, &teardrop_cost), "optimal_cost");
    Output out;
    out.result = {{"lambda", info.lambda},           {"T", horizon},
                  {"switch_times", switches_of(t.get())},
                  {"cost", info.cost},               {"teardrop_cost", teardrop_cost},
                  {"cost_gap", info.cost - teardrop_cost},
                  {"residual_x", info.residual_x},   {"residual_y", info.residual_y}};
    out.tables.push_back(trajectory_table(t.get(), false));
    return out;
  }
};

struct OracleCmd {
  Bounds b;
  double horizon = 0.0;
  std::string method = "both";
  size_t n_grid = 2000, max_switches = 2, intervals = 128, restarts = 1;
  double tolerance = 0.0;
  bool crossing = false;
  std::string init = "random";
  uint64_t* seed = nullptr;
  void setup(CLI::App* sub, uint64_t* seed_ref) {
    seed = seed_ref;
    b.add(sub);
    sub->add_option("--horizon", horizon, "Period T")->required()->check(CLI::PositiveNumber);
    sub->add_option("--method", method, "enumerate | transcribe | both")
        ->check(CLI::IsMember({"enumerate", "transcribe", "both"}));
    sub->add_option("--n-grid", n_grid, "Enumeration grid cells")->check(CLI::Range(2, 4096));
    sub->add_option("--max-switches", max_switches, "Enumeration switch budget")->check(CLI::Range(0, 4));
    sub->add_option("--tolerance", tolerance, "Periodicity tolerance (0 = default)")->check(CLI::NonNegativeNumber);
    sub->add_flag("--crossing", crossing, "Keep only schedules crossing x = 0");
    sub->add_option("--intervals", intervals, "Transcription intervals")->check(CLI::Range(16, 512));
    sub->add_option("--restarts", restarts, "Independent descents from consecutive seeds")->check(CLI::Range(1, 256));
    sub->add_option("--init", init, "random (seeded perturbation of u = 0) | zero")
        ->check(CLI::IsMember({"random", "zero"}));
  }
  Output run() const {
    const auto p = b.params();
    Output out;
    double t1 = 0.0, analytic = 0.0;
    check(td_switch_from_period(p, horizon, &t1), "switch_from_period");
    check(td_optimal_cost(p, t1, &analytic), "optimal_cost");
    out.result["analytic"] = {{"t1", t1}, {"cost", analytic}};

    if (method != "enumerate") {
      std::vector<double> zeros(intervals, 0.0);
      td_transcription* raw = nullptr;
      check(td_transcribe(p, horizon, intervals, *seed, init == "zero" ? zeros.data() : nullptr, restarts, &raw),
            "transcription");
      Transcription tr(raw);
      td_transcription_info info;
      check(td_transcription_info_get(tr.get(), &info), "transcription info");
      std::vector<double> u(info.n_intervals);
      check(td_transcription_controls(tr.get(), u.data(), u.size()), "transcription controls");
      size_t count = 0;
      check(td_transcription_switches(tr.get(), nullptr, 0, &count), "transcription switches");
      std::vector<double> sw(count);
      if (count) check(td_transcription_switches(tr.get(), sw.data(), count, &count), "transcription switches");
      out.result["transcription"] = {{"n_intervals", info.n_intervals},
                                     {"penalty_weight", info.penalty_weight},
                                     {"objective", info.objective},
                                     {"cost", info.cost},
                                     {"defect", info.defect},
                                     {"iterations", info.iterations},
                                     {"converged", info.converged != 0},
                                     {"transition_cells", info.transition_cells},
                                     {"switch_times", sw},
                                     {"relative_cost_error", std::abs(info.cost - analytic) / std::abs(analytic)},
                                     {"diagnostics", td_transcription_diagnostics(tr.get())}};
      Table tab{"controls", {"i", "t", "u"}};
      const double dt = horizon / static_cast<double>(u.size());
      for (std::size_t i = 0; i < u.size(); ++i) tab.rows.push_back({i, static_cast<double>(i) * dt, u[i]});
      out.tables.push_back(std::move(tab));
    }
    if (method != "transcribe") {
      td_enumeration e;
      check(td_enumerate(p, horizon, n_grid, max_switches, tolerance, crossing ? 1 : 0, &e), "enumeration");
      std::vector<double> sw(e.switch_times, e.switch_times + e.switch_count);
      out.result["enumeration"] = {{"found", e.found != 0},
                                   {"best_cost", nan_as_null(e.best_cost)},
                                   {"best_defect", e.best_defect},
                                   {"initial_level", nan_as_null(e.initial_level)},
                                   {"switch_times", sw},
                                   {"periodicity_tolerance", e.tolerance},
                                   {"slack", e.slack},
                                   {"admissible", e.admissible},
                                   {"candidates", e.candidates},
                                   {"lower_bound_holds", !e.found || e.best_cost >= analytic - e.slack}};
      Table tab{"schedule", {"start", "duration", "level"}};
      if (e.found) {
        const double other = e.initial_level == b.u_max ? b.u_min : b.u_max;
        double start = 0.0, level = e.initial_level;
        for (std::size_t i = 0; i <= sw.size(); ++i) {
          const double end = i < sw.size() ? sw[i] : horizon;
          tab.rows.push_back({start, end - start, level});
          start = end;
          level = level == e.initial_level ? other : e.initial_level;
        }
      }
      out.tables.push_back(std::move(tab));
    }
    return out;
  }
};

struct SpectrumCmd {
  double m = 0.0, t1 = 0.0;
  std::optional<double> period;
  size_t samples = 2001;
  bool antiperiodic = false;
  void setup(CLI::App* sub) {
    sub->add_option("--M", m, "Well height M")->required()->check(CLI::PositiveNumber);
    sub->add_option("--t1", t1, "Well half-width t1")->required()->check(CLI::PositiveNumber);
    sub->add_option("--period", period, "Cell period T (omit for the line)")->check(CLI::PositiveNumber);
    sub->add_option("--samples", samples, "Eigenfunction samples")->check(CLI::Range(3, 1000000));
    sub->add_flag("--antiperiodic", antiperiodic, "Trace = -2 spectrum instead of periodic");
  }
  Output run() const {
    if (antiperiodic && !period) throw UsageError("--antiperiodic needs --period");
    if (period && !(*period > 2.0 * t1)) throw UsageError("--period must exceed 2 * --t1");
    td_spectrum* raw = nullptr;
    if (period) {
      check(td_spectrum_periodic(t1, m, *period, samples, antiperiodic ? 1 : 0, &raw), "periodic spectrum");
    } else {
      check(td_spectrum_line(t1, m, samples, &raw), "line spectrum");
    }
    Spectrum s(raw);
    const size_t n = td_spectrum_count(s.get());
    Output out;
    Table levels{"levels", {"n", "E", "parity"}};
    json energies = json::array();
    for (size_t i = 0; i < n; ++i) {
      const double e = td_spectrum_eigenvalue(s.get(), i);
      levels.rows.push_back({i, e, td_spectrum_parity(s.get(), i) == 0 ? "even" : "odd"});
      energies.push_back(e);
    }
    std::vector<double> grid(td_spectrum_grid_size(s.get()));
    if (!grid.empty()) check(td_spectrum_grid(s.get(), grid.data(), grid.size()), "spectrum grid");
    std::vector<std::vector<double>> psi(n, std::vector<double>(grid.size()));
    Table funcs{"eigenfunctions", {"t"}};
    for (size_t i = 0; i < n; ++i) {
      check(td_spectrum_eigenfunction(s.get(), i, psi[i].data(), grid.size()), "eigenfunction");
      funcs.columns.push_back("psi" + std::to_string(i));
    }
    for (std::size_t k = 0; k < grid.size(); ++k) {
      json row = {grid[k]};
      for (size_t i = 0; i < n; ++i) row.push_back(psi[i][k]);
      funcs.rows.push_back(std::move(row));
    }
    out.result = {{"domain", period ? (antiperiodic ? "antiperiodic" : "periodic") : "line"},
                  {"M", m},
                  {"t1", t1},
                  {"T", period ? json(*period) : json(nullptr)},
                  {"count", n},
                  {"eigenvalues", energies}};
    out.tables.push_back(std::move(levels));
    out.tables.push_back(std::move(funcs));
    return out;
  }
};

struct StabilityCmd {
  Bounds b;
  double t1_min = 0.0, t1_max = 0.0, T_min = 0.0, T_max = 0.0;
  size_t res = 256;
  std::optional<size_t> res_t1, res_T;
  void setup(CLI::App* sub) {
    b.add(sub);
    sub->add_option("--t1-min", t1_min, "Lower t1 edge")->check(CLI::NonNegativeNumber);
    sub->add_option("--t1-max", t1_max, "Upper t1 edge")->required()->check(CLI::PositiveNumber);
    sub->add_option("--T-min", T_min, "Lower T edge")->check(CLI::NonNegativeNumber);
    sub->add_option("--T-max", T_max, "Upper T edge")->required()->check(CLI::PositiveNumber);
    sub->add_option("--res", res, "Cells per axis")->check(CLI::Range(1, 2048));
    sub->add_option("--res-t1", res_t1, "Cells along t1 (overrides --res)")->check(CLI::Range(1, 2048));
    sub->add_option("--res-T", res_T, "Cells along T (overrides --res)")->check(CLI::Range(1, 2048));
  }
  Output run() const {
    const auto p = b.params();
    if (!(t1_max > t1_min) || !(T_max > T_min)) throw UsageError("axis ranges must be increasing");
    td_grid* raw = nullptr;
    check(td_stability_map(p, t1_min, t1_max, T_min, T_max, res_t1.value_or(res), res_T.value_or(res), &raw),
          "stability map");
    Grid g(raw);
    Output out;
    Table tab{"grid", {"t1", "T", "trace", "stable"}};
    size_t stable = 0, boundary = 0, saturated = 0;
    const size_t nt1 = td_grid_t1_count(g.get());
    const size_t nT = td_grid_T_count(g.get());
    for (size_t j = 0; j < nT; ++j) {
      for (size_t i = 0; i < nt1; ++i) {
        double t1 = 0.0, T = 0.0, trace = 0.0;
        unsigned flags = 0;
        check(td_grid_cell(g.get(), i, j, &t1, &T, &trace, &flags), "grid cell");
        stable += flags & 1u;
        boundary += (flags & 6u) ? 1 : 0;
        saturated += (flags & 8u) ? 1 : 0;
        tab.rows.push_back({t1, T, trace, (flags & 1u) ? 1 : 0});
      }
    }
    out.result = {{"cells", nt1 * nT},     {"t1_cells", nt1},       {"T_cells", nT},
                  {"stable_cells", stable}, {"boundary_cells", boundary}, {"saturated_cells", saturated}};
    out.tables.push_back(std::move(tab));
    return out;
  }
};

struct CompassCmd {
  td_compass cp{0.3, 6.4e4, 47e-6, 4496e-6, -0.2};
  double t1 = 0.0, period = 0.0;
  size_t periods = 10, bins = 256;
  double theta0 = std::numbers::pi + 0.05, theta_dot0 = 0.0;
  std::optional<double> step;
  bool linearized = false;
  void setup(CLI::App* sub) {
    sub->add_option("--xi", cp.damping_ratio, "Damping ratio")->check(CLI::NonNegativeNumber);
    sub->add_option("--mu-over-i", cp.moment_ratio, "Moment ratio mu/I")->check(CLI::PositiveNumber);
    sub->add_option("--bt", cp.earth_field, "Ambient field B_T (T)");
    sub->add_option("--gain", cp.coil_gain, "Coil gain A (T/A)");
    sub->add_option("--ihigh", cp.current_high, "Coil current in the high phase (A)");
    sub->add_option("--t1", t1, "Half-duration of the high phase")->required()->check(CLI::NonNegativeNumber);
    sub->add_option("--period", period, "Square-wave period T")->required()->check(CLI::PositiveNumber);
    sub->add_option("--periods", periods, "Simulated periods")->check(CLI::Range(3, 100000));
    sub->add_option("--theta0", theta0, "Initial angle (rad)");
    sub->add_option("--theta-dot0", theta_dot0, "Initial angular rate (rad/s)");
    sub->add_option("--step", step, "Integrator step (default T/2048)")->check(CLI::PositiveNumber);
    sub->add_option("--bins", bins, "Phase bins of the variance profile")->check(CLI::Range(2, 65536));
    sub->add_flag("--linearized", linearized, "Integrate the linearization about theta = pi");
  }
  Output run() const {
    if (2.0 * t1 > period) throw UsageError("--t1 must not exceed --period / 2");
    double u_high = 0.0, u_low = 0.0;
    check(td_compass_levels(cp, &u_high, &u_low), "compass levels");
    const double total = static_cast<double>(periods) * period;
    const double h = step.value_or(period / 2048.0);
    td_series* raw = nullptr;
    if (linearized) {
      check(td_simulate_linearized(u_high, u_low, cp.damping_ratio, t1, period, theta0 - std::numbers::pi, theta_dot0,
                                   total, h, &raw),
            "linearized simulation");
    } else {
      check(td_simulate_compass(cp, t1, period, theta0, theta_dot0, total, h, &raw), "compass simulation");
    }
    Series s(raw);
    std::vector<double> phases(bins), var(bins), msq(bins);
    size_t folded = 0;
    check(td_series_variance(s.get(), period, std::numbers::pi, bins, phases.data(), var.data(), msq.data(), &folded),
          "variance profile");

    // Reference shape x(t)^2 of the closed-form optimum, when the levels admit one.
    const bool has_reference = u_low < 0.0 && u_high > 0.0;
    std::vector<double> ref(bins, std::nan(""));
    if (has_reference) {
      for (size_t k = 0; k < bins; ++k) {
        double x = 0.0, y = 0.0;
        check(td_optimal_state({u_low, u_high}, period, phases[k], &x, &y), "optimal state");
        ref[k] = x * x;
      }
    }
    Output out;
    Table prof{"variance", {"phase", "variance", "mean_square", "x_opt_sq"}};
    for (size_t k = 0; k < bins; ++k) prof.rows.push_back({phases[k], var[k], msq[k], nan_as_null(ref[k])});
    Table series{"series", {"t", "theta", "theta_dot"}};
    double max_dev = 0.0;
    for (size_t i = 0; i < td_series_size(s.get()); ++i) {
      double t = 0.0, th = 0.0, om = 0.0;
      check(td_series_sample(s.get(), i, &t, &th, &om), "series sample");
      max_dev = std::max(max_dev, std::abs(th - std::numbers::pi));
      series.rows.push_back({t, th, om});
    }
    json corr = nullptr;
    if (has_reference) {
      double mv = 0.0, mr = 0.0;
      for (size_t k = 0; k < bins; ++k) {
        mv += var[k] / bins;
        mr += ref[k] / bins;
      }
      double svr = 0.0, svv = 0.0, srr = 0.0;
      for (size_t k = 0; k < bins; ++k) {
        svr += (var[k] - mv) * (ref[k] - mr);
        svv += (var[k] - mv) * (var[k] - mv);
        srr += (ref[k] - mr) * (ref[k] - mr);
      }
      if (svv > 0.0 && srr > 0.0) corr = svr / std::sqrt(svv * srr);
    }
    out.result = {{"u_high", u_high},       {"u_low", u_low},
                  {"model", linearized ? "linearized" : "nonlinear"},
                  {"periods_folded", folded}, {"samples", td_series_size(s.get())},
                  {"max_abs_deviation_from_pi", max_dev},
                  {"variance_vs_optimal_x_squared_correlation", corr}};
    out.tables.push_back(std::move(prof));
    out.tables.push_back(std::move(series));
    return out;
  }
};

struct TurnpikeCmd {
  Bounds b;
  std::optional<double> T_min, T_max;
  size_t count = 40;
  void setup(CLI::App* sub) {
    b.add(sub);
    sub->add_option("--T-min", T_min, "Shortest period (default 1/omega_min)")->check(CLI::PositiveNumber);
    sub->add_option("--T-max", T_max, "Longest period (default 20/omega_min)")->check(CLI::PositiveNumber);
    sub->add_option("--count", count, "Number of periods, geometrically spaced")->check(CLI::Range(2, 100000));
  }
  Output run() const {
    const auto p = b.params();
    const double w_min = std::sqrt(-p.u_min);
    const double lo = T_min.value_or(1.0 / w_min);
    const double hi = T_max.value_or(20.0 / w_min);
    if (!(hi > lo)) throw UsageError("--T-max must exceed --T-min");
    td_turnpike lim;
    check(td_turnpike_limits(p, &lim), "turnpike limits");
    Output out;
    Table tab{"sweep", {"T", "t1", "x_mid", "x_mid_scaled", "cost", "cost_per_time"}};
    double last_rel = 0.0;
    for (size_t k = 0; k < count; ++k) {
      const double T = lo * std::pow(hi / lo, static_cast<double>(k) / static_cast<double>(count - 1));
      double t1 = 0.0, cost = 0.0, x = 0.0, y = 0.0;
      check(td_switch_from_period(p, T, &t1), "switch_from_period");
      check(td_optimal_cost(p, t1, &cost), "optimal_cost");
      check(td_optimal_state(p, T, 0.5 * T, &x, &y), "optimal_state");
      const double scaled = x * std::exp(0.5 * w_min * T);
      last_rel = std::abs(scaled / lim.midpoint_prefactor - 1.0);
      tab.rows.push_back({T, t1, x, scaled, cost, cost / T});
    }
    out.result = {{"t1_infinity", lim.t1_infinity},
                  {"corner", {lim.corner_x, lim.corner_y}},
                  {"midpoint_prefactor", lim.midpoint_prefactor},
                  {"relative_prefactor_error_at_T_max", last_rel}};
    out.tables.push_back(std::move(tab));
    return out;
  }
};

json flag_record(const CLI::App* sub) {
  json flags = json::object();
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string name = opt->get_name();
    if (name == "--help" || name.empty()) continue;
    if (opt->count() > 0) {
      const auto& r = opt->results();
      flags[name] = r.size() == 1 ? json(r.front()) : json(r);
    } else {
      const std::string d = opt->get_default_str();
      flags[name] = d.empty() ? json(nullptr) : json(d);
    }
  }
  return flags;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Periodic optimal control of x' = y, y' = -u x: closed form, extremals, oracles, spectra, stability"};
  app.set_version_flag("--version", std::string(td_version()));
  app.require_subcommand(1);

  std::string out_prefix;
  std::string format = "csv";
  uint64_t seed = 0;
  const auto common = [&](CLI::App* sub) {
    sub->add_option("--out", out_prefix, "Output path prefix (default: command name; '-' for stdout)");
    sub->add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    sub->add_option("--seed", seed, "Random seed")->capture_default_str();
  };

  SolveCmd solve;
  ShootCmd shoot;
  OracleCmd oracle;
  SpectrumCmd spectrum;
  StabilityCmd stability;
  CompassCmd compass;
  TurnpikeCmd turnpike;
  ButterflyCmd butterfly;

  std::vector<std::pair<CLI::App*, std::function<Output()>>> commands;
  const auto add = [&](const char* name, const char* help, auto& cmd, auto&& setup) {
    CLI::App* sub = app.add_subcommand(name, help);
    setup(sub);
    common(sub);
    for (CLI::Option* opt : sub->get_options()) opt->capture_default_str();
    commands.emplace_back(sub, [&cmd] { return cmd.run(); });
  };
  add("solve", "Closed-form optimum and its extremal lift", solve, [&](CLI::App* s) { solve.setup(s); });
  add("shoot", "Shooting on the switching parameter", shoot, [&](CLI::App* s) { shoot.setup(s); });
  add("oracle", "Enumeration and direct-transcription cross-checks", oracle,
      [&](CLI::App* s) { oracle.setup(s, &seed); });
  add("spectrum", "Bound states of the finite square well", spectrum, [&](CLI::App* s) { spectrum.setup(s); });
  add("stability", "Floquet trace map over (t1, T)", stability, [&](CLI::App* s) { stability.setup(s); });
  add("compass", "Square-wave driven compass and its variance profile", compass,
      [&](CLI::App* s) { compass.setup(s); });
  add("turnpike", "Long-period sweep toward the limiting teardrop", turnpike, [&](CLI::App* s) { turnpike.setup(s); });
  add("butterfly", "Single-loop butterfly extremal", butterfly, [&](CLI::App* s) { butterfly.setup(s); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  for (auto& [sub, run] : commands) {
    if (!sub->parsed()) continue;
    try {
      Output out = run();
      json summary = {{"schema_version", "1"},
                      {"command", sub->get_name()},
                      {"reproducibility", {{"flags", flag_record(sub)}, {"seed", seed}, {"version", td_version()}}},
                      {"result", out.result}};
      emit(out_prefix.empty() ? sub->get_name() : out_prefix, format, summary, out);
      return 0;
    } catch (const UsageError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kExitUsage;
    } catch (const IoError& e) {
      std::cerr << "I/O error: " << e.what() << '\n';
      return kExitIo;
    } catch (const ModuleError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kExitModule;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kExitModule;
    }
  }
  return kExitUsage;
}
