#include "teardrop/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "teardrop/analytic.hpp"
#include "teardrop/parallel.hpp"

namespace teardrop {

namespace {

void require_period(double period) {
  if (!std::isfinite(period) || !(period > 0.0)) fail(ErrorKind::Domain, "period must be > 0");
}

struct Candidate {
  double cost = std::numeric_limits<double>::infinity();
  double defect = 0.0;
  double initial_level = 0.0;
  std::vector<std::size_t> switches;
  std::size_t admissible = 0;
  std::size_t visited = 0;
};

class Enumerator {
 public:
  Enumerator(const ProblemParams& params, double period, std::size_t n, std::size_t max_switches, double tol,
             bool require_crossing)
      : params_(params), n_(n), max_switches_(max_switches), tol_(tol), crossing_(require_crossing),
        h_(period / static_cast<double>(n)) {
    high_.reserve(n + 1);
    low_.reserve(n + 1);
    for (std::size_t j = 0; j <= n; ++j) {
      high_.push_back(segment_propagator(params.u_max(), static_cast<double>(j) * h_));
      low_.push_back(segment_propagator(params.u_min(), static_cast<double>(j) * h_));
    }
  }

  /// All schedules whose first segment has the given level and ends at first_end.
  Candidate run(bool start_high, std::size_t first_end) const {
    Candidate best;
    best.initial_level = level(start_high);
    std::vector<std::size_t> path;
    const State start{1.0, 0.0};
    const State s = flow(start_high, first_end).apply(start);
    const bool crossed = crossing_ && crosses(start, start_high, first_end);
    const double units = static_cast<double>(first_end) * level(start_high);
    if (first_end == n_) {
      consider(s, units, crossed, path, best);
    } else if (max_switches_ > 0) {
      path.push_back(first_end);
      descend(s, first_end, !start_high, units, crossed, path, best);
    }
    return best;
  }

  double step() const noexcept { return h_; }

 private:
  double level(bool high) const noexcept { return high ? params_.u_max() : params_.u_min(); }
  const PropagatorMatrix& flow(bool high, std::size_t cells) const { return high ? high_[cells] : low_[cells]; }
  bool crosses(const State& s, bool high, std::size_t cells) const {
    return first_x_zero(s, level(high), static_cast<double>(cells) * h_).has_value();
  }

  void descend(const State& s, std::size_t pos, bool high, double units, bool crossed,
               std::vector<std::size_t>& path, Candidate& best) const {
    // Run to the end on the current level...
    const std::size_t rest = n_ - pos;
    consider(flow(high, rest).apply(s), units + static_cast<double>(rest) * level(high),
             crossed || (crossing_ && crosses(s, high, rest)), path, best);
    // ...or switch again at an interior grid point.
    if (path.size() >= max_switches_) return;
    for (std::size_t next = pos + 1; next < n_; ++next) {
      const std::size_t cells = next - pos;
      path.push_back(next);
      descend(flow(high, cells).apply(s), next, !high, units + static_cast<double>(cells) * level(high),
              crossed || (crossing_ && crosses(s, high, cells)), path, best);
      path.pop_back();
    }
  }

  void consider(const State& end, double units, bool crossed, const std::vector<std::size_t>& path,
                Candidate& best) const {
    ++best.visited;
    if (crossing_ && !crossed) return;
    const double defect = std::abs(end.x - 1.0) + std::abs(end.y);
    if (!(defect < tol_)) return;
    ++best.admissible;
    const double cost = units * h_;
    if (cost < best.cost) {
      best.cost = cost;
      best.defect = defect;
      best.switches = path;
    }
  }

  ProblemParams params_;
  std::size_t n_;
  std::size_t max_switches_;
  double tol_;
  bool crossing_;
  double h_;
  std::vector<PropagatorMatrix> high_;
  std::vector<PropagatorMatrix> low_;
};

/// dP/du for the flow [[C, S], [-u S, C]], with C = cos(sqrt(u) t), S = sin(sqrt(u) t)/sqrt(u).
PropagatorMatrix propagator_level_derivative(double level, double tau) {
  const auto p = segment_propagator(level, tau);
  const double c = p.a11;
  const double s = p.a12;
  double ds = 0.0;
  if (std::abs(level) * tau * tau < 1e-2) {
    // dS/du = sum_{k>=1} (-1)^k k u^{k-1} tau^{2k+1} / (2k+1)!
    double term = tau * tau * tau / 6.0;  // tau^3 / 3!
    double upow = 1.0;
    for (int k = 1; k <= 10; ++k) {
      ds += ((k % 2) ? -1.0 : 1.0) * k * upow * term;
      upow *= level;
      term *= tau * tau / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
    }
  } else {
    ds = (tau * c - s) / (2.0 * level);
  }
  const double dc = -0.5 * tau * s;
  return {dc, ds, -0.5 * (s + tau * c), dc};
}

}  // namespace

double enumeration_slack(const ProblemParams& params, double period, std::size_t n_grid) {
  return params.spread() * period / static_cast<double>(n_grid);
}

EnumerationReport enumerate_bangbang(const ProblemParams& params, double period, const EnumerationOptions& options) {
  require_period(period);
  if (options.n_grid < 2 || options.n_grid > 4096) fail(ErrorKind::InvalidArgument, "n_grid must lie in [2, 4096]");
  if (options.max_switches > 4) fail(ErrorKind::InvalidArgument, "max_switches must be <= 4");
  const double tol = options.periodicity_tolerance.value_or(1e-3 * 2000.0 / static_cast<double>(options.n_grid));
  if (!(tol > 0.0)) fail(ErrorKind::InvalidArgument, "periodicity tolerance must be > 0");

  const Enumerator enumerator(params, period, options.n_grid, options.max_switches, tol, options.require_crossing);
  const std::size_t n = options.n_grid;
  // Work item i: start level (high for i < n) and end of the first segment.
  std::vector<Candidate> results(2 * n);
  parallel_for(2 * n, [&](std::size_t i) {
    results[i] = enumerator.run(i < n, i % n + 1);
  });

  EnumerationReport report;
  report.grid_size = n;
  report.max_switches = options.max_switches;
  report.periodicity_tolerance = tol;
  report.best_cost = std::numeric_limits<double>::infinity();
  const Candidate* best = nullptr;
  for (const auto& r : results) {
    report.admissible_count += r.admissible;
    report.candidates += r.visited;
    if (r.admissible > 0 && (best == nullptr || r.cost < best->cost)) best = &r;
  }
  if (best == nullptr) return report;

  const double h = enumerator.step();
  std::vector<Segment> segments;
  std::size_t pos = 0;
  double lvl = best->initial_level;
  const double other = lvl == params.u_max() ? params.u_min() : params.u_max();
  for (std::size_t sw : best->switches) {
    segments.push_back({static_cast<double>(sw - pos) * h, lvl});
    report.best_switch_times.push_back(static_cast<double>(sw) * h);
    lvl = lvl == best->initial_level ? other : best->initial_level;
    pos = sw;
  }
  segments.push_back({static_cast<double>(n - pos) * h, lvl});
  report.best_schedule.emplace(std::move(segments));
  report.best_cost = best->cost;
  report.best_defect = best->defect;
  return report;
}

TranscriptionObjective::TranscriptionObjective(const ProblemParams& params, double period, std::size_t n_intervals,
                                               double penalty_weight)
    : params_(params), n_(n_intervals), dt_(period / static_cast<double>(n_intervals)), weight_(penalty_weight) {
  require_period(period);
  if (n_intervals < 4) fail(ErrorKind::InvalidArgument, "transcription needs at least 4 intervals");
}

State TranscriptionObjective::terminal_state(std::span<const double> controls) const {
  if (controls.size() != n_) fail(ErrorKind::InvalidArgument, "control vector has the wrong length");
  State s{1.0, 0.0};
  for (double u : controls) s = segment_propagator(u, dt_).apply(s);
  return s;
}

double TranscriptionObjective::value(std::span<const double> controls) const {
  const State end = terminal_state(controls);
  double cost = 0.0;
  for (double u : controls) cost += u * dt_;
  const double dx = end.x - 1.0;
  return cost + weight_ * (dx * dx + end.y * end.y);
}

double TranscriptionObjective::value_and_gradient(std::span<const double> controls, std::span<double> gradient) const {
  if (controls.size() != n_ || gradient.size() != n_) fail(ErrorKind::InvalidArgument, "size mismatch");
  std::vector<State> states(n_ + 1);
  std::vector<PropagatorMatrix> flows(n_);
  states[0] = {1.0, 0.0};
  double cost = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    flows[i] = segment_propagator(controls[i], dt_);
    states[i + 1] = flows[i].apply(states[i]);
    cost += controls[i] * dt_;
  }
  const double dx = states[n_].x - 1.0;
  const double dy = states[n_].y;
  // Costate of the terminal penalty, pulled back through each flow transpose.
  double lx = 2.0 * weight_ * dx;
  double ly = 2.0 * weight_ * dy;
  for (std::size_t i = n_; i-- > 0;) {
    const auto d = propagator_level_derivative(controls[i], dt_);
    const State& s = states[i];
    gradient[i] = dt_ + lx * (d.a11 * s.x + d.a12 * s.y) + ly * (d.a21 * s.x + d.a22 * s.y);
    const auto& p = flows[i];
    const double nx = p.a11 * lx + p.a21 * ly;
    const double ny = p.a12 * lx + p.a22 * ly;
    lx = nx;
    ly = ny;
  }
  return cost + weight_ * (dx * dx + dy * dy);
}

TranscriptionProblem transcription_descent(const ProblemParams& params, double period, std::size_t n_intervals,
                                           std::uint64_t seed, const TranscriptionOptions& options) {
  if (n_intervals < 16 || n_intervals > 512) fail(ErrorKind::InvalidArgument, "n_intervals must lie in [16, 512]");
  const double lo = params.u_min();
  const double hi = params.u_max();
  TranscriptionObjective objective(params, period, n_intervals, options.penalty_weight.value_or(1e3 * params.spread()));

  std::vector<double> u(n_intervals, 0.0);
  if (options.initial_controls) {
    if (options.initial_controls->size() != n_intervals) fail(ErrorKind::InvalidArgument, "initial controls size");
    u = *options.initial_controls;
  } else {
    const double amp = options.initial_amplitude < 0.0 ? 0.05 * params.spread() : options.initial_amplitude;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> noise(-amp, amp);
    for (auto& v : u) v = noise(rng);
  }
  for (auto& v : u) v = std::clamp(v, lo, hi);

  TranscriptionProblem result;
  result.n_intervals = n_intervals;
  std::vector<double> grad(n_intervals), trial(n_intervals), trial_grad(n_intervals);
  std::size_t total_iterations = 0;
  bool converged = false;

  for (int stage = 0; stage < 2; ++stage) {
    double f = objective.value_and_gradient(u, grad);
    double step = 1e-3;
    converged = false;
    for (std::size_t it = 0; it < options.max_iterations; ++it, ++total_iterations) {
      // Projected step with backtracking from the spectral (Barzilai-Borwein) length.
      double f_trial = 0.0;
      double decrease = 0.0;
      double s = step;
      bool accepted = false;
      for (int bt = 0; bt < 60; ++bt) {
        decrease = 0.0;
        for (std::size_t i = 0; i < n_intervals; ++i) {
          trial[i] = std::clamp(u[i] - s * grad[i], lo, hi);
          decrease += grad[i] * (u[i] - trial[i]);
        }
        f_trial = objective.value(trial);
        if (f_trial <= f - 1e-4 * decrease) {
          accepted = true;
          break;
        }
        s *= 0.5;
      }
      if (!accepted || decrease <= 1e-15 * (1.0 + std::abs(f))) {
        converged = true;
        break;
      }
      const double f_new = objective.value_and_gradient(trial, trial_grad);
      double ss = 0.0, sy = 0.0;
      for (std::size_t i = 0; i < n_intervals; ++i) {
        const double di = trial[i] - u[i];
        ss += di * di;
        sy += di * (trial_grad[i] - grad[i]);
      }
      step = sy > 0.0 ? std::clamp(ss / sy, 1e-12, 1e6) : std::min(1e6, 2.0 * s);
      const double previous = f;
      u.swap(trial);
      grad.swap(trial_grad);
      f = f_new;
      if (std::abs(previous - f) <= 1e-15 * (1.0 + std::abs(f)) && ss < 1e-24) {
        converged = true;
        break;
      }
    }
    const State end = objective.terminal_state(u);
    const double defect = std::abs(end.x - 1.0) + std::abs(end.y);
    if (stage == 0 && defect > options.defect_target) {
      objective.set_penalty_weight(2.0 * objective.penalty_weight());
      continue;
    }
    break;
  }

  const State end = objective.terminal_state(u);
  result.control_vector = u;
  result.penalty_weight = objective.penalty_weight();
  result.objective = objective.value(u);
  result.cost = 0.0;
  for (double v : u) result.cost += v * objective.step();
  result.defect = std::abs(end.x - 1.0) + std::abs(end.y);
  result.iterations = total_iterations;
  result.converged = converged;
  std::ostringstream diag;
  diag << "iterations=" << total_iterations << " objective=" << result.objective << " defect=" << result.defect
       << " penalty=" << result.penalty_weight << (converged ? "" : " (iteration limit reached)");
  result.diagnostics = diag.str();
  return result;
}

TranscriptionProblem transcription_restarts(const ProblemParams& params, double period, std::size_t n_intervals,
                                            std::uint64_t first_seed, std::size_t restarts,
                                            const TranscriptionOptions& options) {
  if (restarts == 0) fail(ErrorKind::InvalidArgument, "need at least one restart");
  std::vector<std::optional<TranscriptionProblem>> runs(restarts);
  parallel_for(restarts, [&](std::size_t i) {
    runs[i] = transcription_descent(params, period, n_intervals, first_seed + i, options);
  });
  std::size_t best = 0;
  for (std::size_t i = 1; i < restarts; ++i) {
    if (runs[i]->objective < runs[best]->objective) best = i;
  }
  return std::move(*runs[best]);
}

BangBangSummary analyze_bang_bang(std::span<const double> controls, const ProblemParams& params, double period,
                                  double tolerance) {
  BangBangSummary summary;
  const double lo = params.u_min();
  const double hi = params.u_max();
  const double dt = period / static_cast<double>(controls.size());
  const auto bound_of = [&](double v) -> std::optional<double> {
    if (std::abs(v - hi) <= tolerance) return hi;
    if (std::abs(v - lo) <= tolerance) return lo;
    return std::nullopt;
  };

  std::optional<double> previous;  // last bound seen
  std::optional<std::size_t> pending;
  for (std::size_t i = 0; i < controls.size(); ++i) {
    const auto b = bound_of(controls[i]);
    if (!b) {
      ++summary.transition_cells;
      if (!pending) pending = i;
      continue;
    }
    if (previous && *b != *previous) {
      double t = static_cast<double>(i) * dt;
      std::size_t cell = i;
      if (pending) {
        // Fraction f of the transition cell at the previous level: f prev + (1-f) next = v.
        const std::size_t c = *pending;
        const double f = std::clamp((controls[c] - *b) / (*previous - *b), 0.0, 1.0);
        t = (static_cast<double>(c) + f) * dt;
        cell = c;
      }
      summary.switch_times.push_back(t);
      summary.switch_cells.push_back(cell);
    }
    previous = b;
    pending.reset();
  }
  return summary;
}

Schedule negative_loop(const ProblemParams& params, double duration, double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) fail(ErrorKind::Domain, "loop scale beta must be > 0");
  // Homothety leaves the control unchanged; start the returned schedule at (beta, 0).
  return optimal_schedule(solve_optimal(duration, params));
}

}  // namespace teardrop
