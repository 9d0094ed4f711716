// Exception-to-status translation layer over the C++ core.
#include "teardrop/teardrop.h"

#include <cmath>
#include <cstring>
#include <limits>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "teardrop/analytic.hpp"
#include "teardrop/extremal.hpp"
#include "teardrop/floquet.hpp"
#include "teardrop/oracle.hpp"
#include "teardrop/schrodinger.hpp"

namespace td = teardrop;

struct td_trajectory {
  std::vector<td_sample> rows;
  td_trajectory_info info{};
  std::vector<double> switches;
};

struct td_transcription {
  td::TranscriptionProblem problem;
  td::BangBangSummary summary;
};

struct td_spectrum {
  td::SpectrumResult result;
};

struct td_grid {
  td::StabilityGrid grid;
};

struct td_series {
  td::AngleSeries series;
};

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
thread_local std::string last_error;

template <class F>
td_status guarded(F&& body) noexcept {
  try {
    body();
    return TD_OK;
  } catch (const td::Error& e) {
    last_error = e.what();
    switch (e.kind()) {
      case td::ErrorKind::InvalidArgument: return TD_ERR_INVALID_ARGUMENT;
      case td::ErrorKind::Domain: return TD_ERR_DOMAIN;
      case td::ErrorKind::NoSolution: return TD_ERR_NO_SOLUTION;
      case td::ErrorKind::Divergence: return TD_ERR_DIVERGENCE;
    }
    return TD_ERR_INTERNAL;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return TD_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return TD_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown failure";
    return TD_ERR_INTERNAL;
  }
}

template <class T>
void require(const T* p, const char* what) {
  if (p == nullptr) td::fail(td::ErrorKind::InvalidArgument, std::string(what) + " must not be NULL");
}

td::ProblemParams to_params(td_params p) { return td::ProblemParams(p.u_min, p.u_max); }

double sample_step(double period, size_t samples) {
  if (samples < 3) td::fail(td::ErrorKind::InvalidArgument, "need at least 3 samples");
  return period / static_cast<double>(samples - 1);
}

td_trajectory* from_lift(const td::ExtremalLift& lift) {
  auto out = std::make_unique<td_trajectory>();
  const auto& tr = lift.trajectory;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    out->rows.push_back({tr.times[i], tr.states[i].x, tr.states[i].y, tr.controls[i], lift.costate_x[i],
                         lift.costate_y[i], lift.switching[i], lift.hamiltonian[i]});
  }
  out->info.has_lift = 1;
  out->info.lambda = lift.lambda;
  out->info.cost = tr.cost;
  return out.release();
}

td_trajectory* from_plain(const td::Trajectory& tr) {
  auto out = std::make_unique<td_trajectory>();
  for (std::size_t i = 0; i < tr.size(); ++i) {
    out->rows.push_back({tr.times[i], tr.states[i].x, tr.states[i].y, tr.controls[i], kNaN, kNaN, kNaN, kNaN});
  }
  out->info.has_lift = 0;
  out->info.lambda = kNaN;
  out->info.cost = tr.cost;
  return out.release();
}

void finish_info(td_trajectory* t, double period, std::vector<double> switches) {
  t->switches = std::move(switches);
  t->info.period = period;
  t->info.switch_count = t->switches.size();
  t->info.switch_time = t->switches.empty() ? kNaN : t->switches.front();
  if (!t->rows.empty()) {
    t->info.residual_x = t->rows.back().x - t->rows.front().x;
    t->info.residual_y = t->rows.back().y;
  }
}

}  // namespace

extern "C" {

const char* td_version(void) { return TEARDROP_VERSION; }
const char* td_last_error(void) { return last_error.c_str(); }

const char* td_status_name(td_status status) {
  switch (status) {
    case TD_OK: return "ok";
    case TD_ERR_INVALID_ARGUMENT: return "invalid argument";
    case TD_ERR_DOMAIN: return "domain error";
    case TD_ERR_NO_SOLUTION: return "no solution";
    case TD_ERR_DIVERGENCE: return "divergence";
    case TD_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

td_status td_switch_time_limit(td_params params, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = td::switch_time_limit(to_params(params));
  });
}

td_status td_period_from_switch(td_params params, double t1, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = td::period_from_switch(t1, to_params(params));
  });
}

td_status td_switch_from_period(td_params params, double period, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = td::switch_from_period(period, to_params(params));
  });
}

td_status td_optimal_cost(td_params params, double t1, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = td::optimal_cost(t1, to_params(params));
  });
}

td_status td_optimal_state(td_params params, double period, double t, double* x, double* y) {
  return guarded([&] {
    require(x, "x");
    require(y, "y");
    const auto s = td::optimal_state(td::solve_optimal(period, to_params(params)), t);
    *x = s.x;
    *y = s.y;
  });
}

td_status td_turnpike_limits(td_params params, td_turnpike* out) {
  return guarded([&] {
    require(out, "out");
    const auto l = td::turnpike_limits(to_params(params));
    *out = {l.t1_infinity, l.corner_x, l.corner_y, l.midpoint_asymptote_prefactor};
  });
}

td_status td_solve(td_params params, double period, size_t samples, td_trajectory** out) {
  return guarded([&] {
    require(out, "out");
    if (samples < 3) td::fail(td::ErrorKind::InvalidArgument, "need at least 3 samples");
    const auto sol = td::solve_optimal(period, to_params(params));
    auto* t = from_lift(td::lift_optimal(sol, samples));
    t->info.hyperbole_constant = sol.hyperbole_constant;
    finish_info(t, period, {sol.switch_time, period - sol.switch_time});
    *out = t;
  });
}

td_status td_shoot(td_params params, double period, size_t samples, td_trajectory** out) {
  return guarded([&] {
    require(out, "out");
    if (samples < 3) td::fail(td::ErrorKind::InvalidArgument, "need at least 3 samples");
    auto sol = td::solve_shooting(period, to_params(params), samples);
    auto* t = from_lift(sol.lift);
    t->info.hyperbole_constant = kNaN;
    finish_info(t, period, sol.shot.switch_times);
    t->info.residual_x = sol.shot.residual_x;
    t->info.residual_y = sol.shot.residual_y;
    *out = t;
  });
}

td_status td_butterfly(td_params params, double period, size_t samples, td_trajectory** out) {
  return guarded([&] {
    require(out, "out");
    if (samples < 3) td::fail(td::ErrorKind::InvalidArgument, "need at least 3 samples");
    auto sol = td::find_butterfly(period, to_params(params), samples);
    auto* t = from_plain(sol.trajectory);
    t->info.lambda = sol.shot.lambda;
    t->info.hyperbole_constant = kNaN;
    finish_info(t, period, sol.shot.switch_times);
    t->info.residual_x = sol.shot.residual_x;
    t->info.residual_y = sol.shot.residual_y;
    *out = t;
  });
}

td_status td_negative_loop(td_params params, double duration, double beta, size_t samples, td_trajectory** out) {
  return guarded([&] {
    require(out, "out");
    const auto sched = td::negative_loop(to_params(params), duration, beta);
    auto* t = from_plain(td::simulate(sched, {beta, 0.0}, sample_step(duration, samples)));
    t->info.hyperbole_constant = kNaN;
    finish_info(t, duration, sched.switch_times());
    *out = t;
  });
}

size_t td_trajectory_size(const td_trajectory* traj) { return traj ? traj->rows.size() : 0; }

td_status td_trajectory_sample(const td_trajectory* traj, size_t index, td_sample* out) {
  return guarded([&] {
    require(traj, "trajectory");
    require(out, "out");
    if (index >= traj->rows.size()) td::fail(td::ErrorKind::InvalidArgument, "sample index out of range");
    *out = traj->rows[index];
  });
}

td_status td_trajectory_info_get(const td_trajectory* traj, td_trajectory_info* out) {
  return guarded([&] {
    require(traj, "trajectory");
    require(out, "out");
    *out = traj->info;
  });
}

td_status td_trajectory_switches(const td_trajectory* traj, double* times, size_t capacity, size_t* count) {
  return guarded([&] {
    require(traj, "trajectory");
    require(count, "count");
    if (capacity > 0) require(times, "times");
    *count = traj->switches.size();
    for (std::size_t i = 0; i < traj->switches.size() && i < capacity; ++i) times[i] = traj->switches[i];
  });
}

void td_trajectory_free(td_trajectory* traj) { delete traj; }

td_status td_enumerate(td_params params, double period, size_t n_grid, size_t max_switches, double tolerance,
                       int require_crossing, td_enumeration* out) {
  return guarded([&] {
    require(out, "out");
    const auto p = to_params(params);
    td::EnumerationOptions opts;
    opts.n_grid = n_grid;
    opts.max_switches = max_switches;
    if (tolerance > 0.0) opts.periodicity_tolerance = tolerance;
    opts.require_crossing = require_crossing != 0;
    const auto r = td::enumerate_bangbang(p, period, opts);
    td_enumeration e{};
    e.found = r.best_schedule.has_value();
    e.best_cost = r.best_cost;
    e.best_defect = r.best_defect;
    e.tolerance = r.periodicity_tolerance;
    e.slack = td::enumeration_slack(p, period, n_grid);
    e.initial_level = r.best_schedule ? r.best_schedule->segments().front().level : kNaN;
    e.switch_count = r.best_switch_times.size();
    for (std::size_t i = 0; i < r.best_switch_times.size() && i < 4; ++i) e.switch_times[i] = r.best_switch_times[i];
    e.admissible = r.admissible_count;
    e.candidates = r.candidates;
    *out = e;
  });
}

td_status td_transcribe(td_params params, double period, size_t n_intervals, uint64_t seed, const double* initial,
                        size_t restarts, td_transcription** out) {
  return guarded([&] {
    require(out, "out");
    const auto p = to_params(params);
    td::TranscriptionOptions opts;
    if (initial != nullptr) opts.initial_controls = std::vector<double>(initial, initial + n_intervals);
    auto tr = std::make_unique<td_transcription>();
    tr->problem = restarts > 1 ? td::transcription_restarts(p, period, n_intervals, seed, restarts, opts)
                               : td::transcription_descent(p, period, n_intervals, seed, opts);
    tr->summary = td::analyze_bang_bang(tr->problem.control_vector, p, period);
    *out = tr.release();
  });
}

td_status td_transcription_info_get(const td_transcription* tr, td_transcription_info* out) {
  return guarded([&] {
    require(tr, "transcription");
    require(out, "out");
    const auto& p = tr->problem;
    *out = {p.n_intervals, p.penalty_weight, p.objective, p.cost, p.defect, p.iterations, p.converged ? 1 : 0,
            tr->summary.transition_cells, tr->summary.switch_times.size()};
  });
}

td_status td_transcription_controls(const td_transcription* tr, double* out, size_t capacity) {
  return guarded([&] {
    require(tr, "transcription");
    require(out, "out");
    const auto& u = tr->problem.control_vector;
    if (capacity < u.size()) td::fail(td::ErrorKind::InvalidArgument, "control buffer too small");
    std::memcpy(out, u.data(), u.size() * sizeof(double));
  });
}

td_status td_transcription_switches(const td_transcription* tr, double* times, size_t capacity, size_t* count) {
  return guarded([&] {
    require(tr, "transcription");
    require(count, "count");
    if (capacity > 0) require(times, "times");
    const auto& s = tr->summary.switch_times;
    *count = s.size();
    for (std::size_t i = 0; i < s.size() && i < capacity; ++i) times[i] = s[i];
  });
}

const char* td_transcription_diagnostics(const td_transcription* tr) {
  return tr ? tr->problem.diagnostics.c_str() : "";
}

void td_transcription_free(td_transcription* tr) { delete tr; }

td_status td_transcription_gradient(td_params params, double period, size_t n_intervals, double penalty_weight,
                                    const double* controls, double* gradient, double* value) {
  return guarded([&] {
    require(controls, "controls");
    require(gradient, "gradient");
    require(value, "value");
    const td::TranscriptionObjective obj(to_params(params), period, n_intervals, penalty_weight);
    *value = obj.value_and_gradient({controls, n_intervals}, {gradient, n_intervals});
  });
}

td_status td_spectrum_line(double t1, double height, size_t samples, td_spectrum** out) {
  return guarded([&] {
    require(out, "out");
    auto s = std::make_unique<td_spectrum>();
    s->result = td::bound_states_line(td::PotentialWell(t1, height), samples);
    *out = s.release();
  });
}

td_status td_spectrum_periodic(double t1, double height, double period, size_t samples, int antiperiodic,
                               td_spectrum** out) {
  return guarded([&] {
    require(out, "out");
    auto s = std::make_unique<td_spectrum>();
    s->result = td::periodic_spectrum(td::PotentialWell(t1, height, period), samples,
                                      antiperiodic ? td::Boundary::Antiperiodic : td::Boundary::Periodic);
    *out = s.release();
  });
}

size_t td_spectrum_count(const td_spectrum* s) { return s ? s->result.eigenvalues.size() : 0; }

double td_spectrum_eigenvalue(const td_spectrum* s, size_t n) {
  return (s && n < s->result.eigenvalues.size()) ? s->result.eigenvalues[n] : kNaN;
}

int td_spectrum_parity(const td_spectrum* s, size_t n) {
  if (!s || n >= s->result.parities.size()) return -1;
  return s->result.parities[n] == td::Parity::Even ? 0 : 1;
}

size_t td_spectrum_grid_size(const td_spectrum* s) { return s ? s->result.grid.size() : 0; }

td_status td_spectrum_grid(const td_spectrum* s, double* out, size_t capacity) {
  return guarded([&] {
    require(s, "spectrum");
    require(out, "out");
    const auto& g = s->result.grid;
    if (capacity < g.size()) td::fail(td::ErrorKind::InvalidArgument, "grid buffer too small");
    std::memcpy(out, g.data(), g.size() * sizeof(double));
  });
}

td_status td_spectrum_eigenfunction(const td_spectrum* s, size_t n, double* out, size_t capacity) {
  return guarded([&] {
    require(s, "spectrum");
    require(out, "out");
    if (n >= s->result.eigenfunctions.size()) td::fail(td::ErrorKind::InvalidArgument, "state index out of range");
    const auto& f = s->result.eigenfunctions[n];
    if (capacity < f.size()) td::fail(td::ErrorKind::InvalidArgument, "eigenfunction buffer too small");
    std::memcpy(out, f.data(), f.size() * sizeof(double));
  });
}

void td_spectrum_free(td_spectrum* s) { delete s; }

td_status td_ground_state(td_params params, double period, td_ground_state_report* out) {
  return guarded([&] {
    require(out, "out");
    const auto r = td::ground_state_correspondence(to_params(params), period);
    *out = {r.switch_time,   r.well_height,     r.ground_energy,   r.energy_error,
            r.correlation,   r.max_discrepancy, r.eigenvalue_count};
  });
}

td_status td_stability_trace(td_params params, double t1, double period, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = td::stability_trace(t1, period, to_params(params));
  });
}

td_status td_stability_map(td_params params, double t1_lo, double t1_hi, double T_lo, double T_hi, size_t n_t1,
                           size_t n_T, td_grid** out) {
  return guarded([&] {
    require(out, "out");
    auto g = std::make_unique<td_grid>();
    g->grid = td::stability_map(to_params(params), {t1_lo, t1_hi}, {T_lo, T_hi}, n_t1, n_T);
    *out = g.release();
  });
}

size_t td_grid_t1_count(const td_grid* g) { return g ? g->grid.t1_axis.size() : 0; }
size_t td_grid_T_count(const td_grid* g) { return g ? g->grid.T_axis.size() : 0; }

td_status td_grid_cell(const td_grid* g, size_t i, size_t j, double* t1, double* period, double* trace,
                       unsigned* flags) {
  return guarded([&] {
    require(g, "grid");
    const auto& grid = g->grid;
    if (i >= grid.t1_axis.size() || j >= grid.T_axis.size()) {
      td::fail(td::ErrorKind::InvalidArgument, "cell index out of range");
    }
    const std::size_t k = grid.index(i, j);
    if (t1) *t1 = grid.t1_axis[i];
    if (period) *period = grid.T_axis[j];
    if (trace) *trace = grid.trace[k];
    if (flags) {
      *flags = (grid.stable[k] ? 1u : 0u) | (grid.boundary_periodic[k] ? 2u : 0u) |
               (grid.boundary_antiperiodic[k] ? 4u : 0u) | (grid.saturated[k] ? 8u : 0u);
    }
  });
}

void td_grid_free(td_grid* g) { delete g; }

td_status td_compass_levels(td_compass cp, double* u_high, double* u_low) {
  return guarded([&] {
    require(u_high, "u_high");
    require(u_low, "u_low");
    const auto [hi, lo] =
        td::compass_levels({cp.damping_ratio, cp.moment_ratio, cp.earth_field, cp.coil_gain, cp.current_high});
    *u_high = hi;
    *u_low = lo;
  });
}

td_status td_simulate_compass(td_compass cp, double t1, double period, double theta0, double theta_dot0,
                              double total_time, double step, td_series** out) {
  return guarded([&] {
    require(out, "out");
    auto s = std::make_unique<td_series>();
    s->series = td::simulate_compass({cp.damping_ratio, cp.moment_ratio, cp.earth_field, cp.coil_gain, cp.current_high},
                                     t1, period, theta0, theta_dot0, total_time, step);
    *out = s.release();
  });
}

td_status td_simulate_linearized(double u_high, double u_low, double damping_ratio, double t1, double period,
                                 double phi0, double phi_dot0, double total_time, double step, td_series** out) {
  return guarded([&] {
    require(out, "out");
    auto s = std::make_unique<td_series>();
    s->series = td::simulate_linearized(u_high, u_low, damping_ratio, t1, period, phi0, phi_dot0, total_time, step);
    *out = s.release();
  });
}

size_t td_series_size(const td_series* s) { return s ? s->series.times.size() : 0; }

td_status td_series_sample(const td_series* s, size_t index, double* t, double* theta, double* theta_dot) {
  return guarded([&] {
    require(s, "series");
    if (index >= s->series.times.size()) td::fail(td::ErrorKind::InvalidArgument, "sample index out of range");
    if (t) *t = s->series.times[index];
    if (theta) *theta = s->series.theta[index];
    if (theta_dot) *theta_dot = s->series.theta_dot[index];
  });
}

td_status td_series_variance(const td_series* s, double period, double center, size_t bins, double* phases,
                             double* variance, double* mean_square, size_t* periods) {
  return guarded([&] {
    require(s, "series");
    require(phases, "phases");
    require(variance, "variance");
    const auto vp = td::variance_profile(s->series, period, center, bins);
    for (std::size_t b = 0; b < bins; ++b) {
      phases[b] = vp.phases[b];
      variance[b] = vp.variance[b];
      if (mean_square) mean_square[b] = vp.mean_square[b];
    }
    if (periods) *periods = vp.periods;
  });
}

void td_series_free(td_series* s) { delete s; }

td_status td_compass_variance_study(double u_high, double u_low, double damping_ratio, double t1, double period,
                                    size_t periods, double phi0, td_variance_study* out) {
  return guarded([&] {
    require(out, "out");
    const auto st = td::compass_variance_study(u_high, u_low, damping_ratio, t1, period, periods, phi0);
    *out = {st.bounded ? 1 : 0, st.max_deviation, st.first_period_peak, st.last_period_peak, st.correlation};
  });
}

}  // extern "C"
