#include "teardrop/extremal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>

namespace teardrop {

namespace {

double sample_step(double period, std::size_t n_samples) {
  return period / static_cast<double>(std::max<std::size_t>(n_samples, 3) - 1);
}

/// Offsets in (0, 1) used to scan a shooting branch: a uniform 64-point grid
/// plus geometric refinement toward both ends, where the period of the
/// feedback orbit runs off to 0 or infinity.
std::vector<double> branch_offsets() {
  std::vector<double> v;
  for (int i = 1; i < 64; ++i) v.push_back(i / 64.0);
  for (int j = 1; j <= 200; ++j) {
    const double g = std::exp2(-j / 4.0);
    v.push_back(g);
    v.push_back(1.0 - g);
  }
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return !(x > 0.0 && x < 1.0); }), v.end());
  return v;
}

struct Probe {
  double lambda;
  double x_end;
  double y_end;
  std::size_t switches;
};

std::optional<Probe> probe(double lambda, const ProblemParams& params, double period) {
  try {
    const auto shot = shoot(lambda, params, period);
    return Probe{lambda, shot.residual_x + 1.0, shot.residual_y, shot.switch_times.size()};
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Divergence) return std::nullopt;
    throw;
  }
}

/// Probes the given lambda values, then repeatedly subdivides every gap across
/// which the switch count changes. Orbits with a given number of switches can
/// occupy a lambda window much narrower than the base grid spacing.
std::vector<Probe> scan_branch(const std::vector<double>& lambdas, const ProblemParams& params, double period) {
  std::vector<Probe> probes;
  for (double l : lambdas) {
    if (auto p = probe(l, params, period)) probes.push_back(*p);
  }
  constexpr int kLevels = 4;
  constexpr int kSplit = 8;
  constexpr std::size_t kSingleLoopSwitches = 4;
  for (int level = 0; level < kLevels; ++level) {
    std::vector<Probe> refined;
    refined.reserve(probes.size());
    bool changed = false;
    for (std::size_t i = 0; i < probes.size(); ++i) {
      refined.push_back(probes[i]);
      if (i + 1 == probes.size() || probes[i].switches == probes[i + 1].switches) continue;
      // Single-loop orbits (teardrop or butterfly) have at most four switches.
      if (std::min(probes[i].switches, probes[i + 1].switches) > kSingleLoopSwitches) continue;
      const double a = probes[i].lambda;
      const double b = probes[i + 1].lambda;
      for (int k = 1; k < kSplit; ++k) {
        if (auto p = probe(a + (b - a) * k / kSplit, params, period)) {
          refined.push_back(*p);
          changed = true;
        }
      }
    }
    probes = std::move(refined);
    if (!changed) break;
  }
  return probes;
}

/// Bisects lambda between lo and hi (sign of y(T) differs) to full precision.
ShootingResult refine(double lo, double hi, const ProblemParams& params, double period) {
  const double y_lo = shoot(lo, params, period).residual_y;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double y_mid = shoot(mid, params, period).residual_y;
    if ((y_mid > 0.0) == (y_lo > 0.0)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  auto a = shoot(lo, params, period);
  auto b = shoot(hi, params, period);
  return std::hypot(a.residual_x, a.residual_y) <= std::hypot(b.residual_x, b.residual_y) ? a : b;
}

std::string describe_scan(const std::vector<Probe>& probes) {
  std::ostringstream out;
  out << "scanned " << probes.size() << " lambda values";
  if (!probes.empty()) out << " in [" << probes.front().lambda << ", " << probes.back().lambda << "]";
  return out.str();
}

}  // namespace

ExtremalLift lift_trajectory(const Trajectory& trajectory, double lambda, const ProblemParams& params) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) fail(ErrorKind::Domain, "lambda must be > 0");
  ExtremalLift lift;
  lift.trajectory = trajectory;
  lift.lambda = lambda;
  const double py0 = -1.0 / lambda;
  const std::size_t n = trajectory.size();
  lift.costate_x.resize(n);
  lift.costate_y.resize(n);
  lift.switching.resize(n);
  lift.hamiltonian.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto [x, y] = trajectory.states[i];
    const double px = -py0 * y;
    const double py = py0 * x;
    const double phi = -py * x + lift.multiplier;
    lift.costate_x[i] = px;
    lift.costate_y[i] = py;
    lift.switching[i] = phi;
    lift.hamiltonian[i] = px * y + std::max(params.u_min() * phi, params.u_max() * phi);
  }
  return lift;
}

ExtremalLift lift_optimal(const OptimalSolution& solution, std::size_t n_samples) {
  const auto [sol, traj] = optimal_trajectory(solution.period, solution.params, n_samples);
  const double c = std::cos(derive_frequencies(sol.params).omega_max * sol.switch_time);
  return lift_trajectory(traj, c * c, sol.params);
}

SwitchingReport switching_sign_consistency(const ExtremalLift& lift, const ProblemParams& params,
                                           double tolerance) {
  SwitchingReport report;
  const auto& controls = lift.trajectory.controls;
  for (std::size_t i = 0; i < lift.switching.size(); ++i) {
    const double phi = lift.switching[i];
    const bool at_switch = i > 0 && controls[i] != controls[i - 1];
    if (at_switch) {
      report.max_phi_at_switch = std::max(report.max_phi_at_switch, std::abs(phi));
      continue;
    }
    if (std::abs(phi) <= tolerance) ++report.spurious_zeros;
    const bool high = controls[i] == params.u_max();
    const double violation = high ? std::max(0.0, -phi) : std::max(0.0, phi);
    report.max_violation = std::max(report.max_violation, violation);
    if (violation > tolerance) ++report.violations;
  }
  return report;
}

HamiltonianStats hamiltonian_constancy(const ExtremalLift& lift) {
  HamiltonianStats stats;
  if (lift.hamiltonian.empty()) return stats;
  double sum = 0.0;
  for (double h : lift.hamiltonian) sum += h;
  stats.mean = sum / static_cast<double>(lift.hamiltonian.size());
  for (double h : lift.hamiltonian) stats.max_deviation = std::max(stats.max_deviation, std::abs(h - stats.mean));
  return stats;
}

ShootingResult shoot(double lambda, const ProblemParams& params, double period, const ShootingOptions& options) {
  if (!(lambda > 0.0 && lambda < 1.0)) fail(ErrorKind::Domain, "shooting parameter must lie in (0, 1)");
  if (!std::isfinite(period) || !(period > 0.0)) fail(ErrorKind::Domain, "period must be > 0");

  std::vector<Segment> segments;
  std::vector<double> switches;
  State s{1.0, 0.0};
  double t = 0.0;
  bool high = true;  // x(0)^2 = 1 > lambda

  while (t < period) {
    const double level = high ? params.u_max() : params.u_min();
    const double remaining = period - t;
    const double h = std::min(remaining, 0.05 / std::sqrt(std::abs(level)));
    const auto g = [&](double tau) {
      const State z = segment_propagator(level, tau).apply(s);
      return z.x * z.x - lambda;
    };
    const auto left_region = [&](double gv) { return high ? gv <= 0.0 : gv >= 0.0; };

    double inside = 0.0;
    std::optional<double> outside;
    for (double tau = h;; tau += h) {
      const double probe_at = std::min(tau, remaining);
      if (left_region(g(probe_at))) {
        outside = probe_at;
        break;
      }
      inside = probe_at;
      if (probe_at >= remaining) break;
    }
    double hi = remaining;
    if (outside) {
      double lo = inside;
      hi = *outside;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (left_region(g(mid)) ? hi : lo) = mid;
      }
    }
    if (hi >= remaining) {
      segments.push_back({remaining, level});
      s = segment_propagator(level, remaining).apply(s);
      t = period;
      break;
    }
    segments.push_back({hi, level});
    s = segment_propagator(level, hi).apply(s);
    t += hi;
    switches.push_back(t);
    high = !high;
    if (switches.size() > options.max_switches) {
      fail(ErrorKind::Divergence, "shooting exceeded " + std::to_string(options.max_switches) + " switches");
    }
  }

  const double rx = s.x - 1.0;
  const double ry = s.y;
  const bool converged = std::abs(rx) < options.tolerance && std::abs(ry) < options.tolerance;
  return {lambda, rx, ry, std::move(switches), converged, Schedule(std::move(segments))};
}

ShootingSolution solve_shooting(double period, const ProblemParams& params, std::size_t n_samples) {
  if (!std::isfinite(period) || !(period > 0.0)) fail(ErrorKind::Domain, "period must be > 0");
  const double lambda_inf = params.u_max() / params.spread();

  std::vector<double> lambdas;
  for (double v : branch_offsets()) {
    const double lambda = lambda_inf + (1.0 - lambda_inf) * v;
    if (lambda < 1.0) lambdas.push_back(lambda);  // rounding can land on 1 when lambda_inf is close to 1
  }
  const auto probes = scan_branch(lambdas, params, period);
  // The single-loop orbit has the longest period, hence the smallest lambda:
  // take the first crossing of y(T) from + to - near the return point (1, 0).
  for (std::size_t i = 0; i + 1 < probes.size(); ++i) {
    const auto& a = probes[i];
    const auto& b = probes[i + 1];
    if (a.y_end > 0.0 && b.y_end <= 0.0 && a.x_end > std::sqrt(a.lambda) && b.x_end > std::sqrt(b.lambda)) {
      auto shot = refine(a.lambda, b.lambda, params, period);
      auto traj = simulate(shot.schedule, {1.0, 0.0}, sample_step(period, n_samples));
      auto lift = lift_trajectory(traj, shot.lambda, params);
      return {std::move(shot), std::move(lift)};
    }
  }
  fail(ErrorKind::NoSolution, "no shooting bracket found: " + describe_scan(probes));
}

ButterflySolution find_butterfly(double period, const ProblemParams& params, std::size_t n_samples) {
  if (!std::isfinite(period) || !(period > 0.0)) fail(ErrorKind::Domain, "period must be > 0");
  const double w_max = derive_frequencies(params).omega_max;
  const double threshold = 2.0 * std::numbers::pi / w_max;
  if (period < threshold * (1.0 - 1e-12)) {
    fail(ErrorKind::Domain, "no butterfly solution below T = 2 pi / omega_max");
  }
  const double step = sample_step(period, n_samples);
  if (period <= threshold * (1.0 + 1e-12)) {
    Schedule ellipse({{period, params.u_max()}});
    ShootingResult shot{0.0, std::cos(w_max * period) - 1.0, -w_max * std::sin(w_max * period), {}, true, ellipse};
    return {std::move(shot), simulate(ellipse, {1.0, 0.0}, step)};
  }

  const double lambda_inf = params.u_max() / params.spread();
  std::vector<double> lambdas;
  for (double v : branch_offsets()) lambdas.push_back(lambda_inf * v);
  const auto probes = scan_branch(lambdas, params, period);
  // Along this branch the orbit period grows with lambda; the single-loop
  // butterfly is the last crossing of y(T) from - to + near (1, 0).
  for (std::size_t i = probes.size(); i-- > 1;) {
    const auto& a = probes[i - 1];
    const auto& b = probes[i];
    if (a.y_end < 0.0 && b.y_end >= 0.0 && a.x_end > std::sqrt(a.lambda) && b.x_end > std::sqrt(b.lambda)) {
      auto shot = refine(a.lambda, b.lambda, params, period);
      auto traj = simulate(shot.schedule, {1.0, 0.0}, step);
      return {std::move(shot), std::move(traj)};
    }
  }
  fail(ErrorKind::NoSolution, "no butterfly bracket found: " + describe_scan(probes));
}

}  // namespace teardrop
