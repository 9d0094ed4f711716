#include "teardrop/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace teardrop {

double switch_time_limit(const ProblemParams& params) {
  const auto [w_min, w_max] = derive_frequencies(params);
  return std::atan(w_min / w_max) / w_max;
}

double period_from_switch(double t1, const ProblemParams& params) {
  const auto [w_min, w_max] = derive_frequencies(params);
  if (!std::isfinite(t1) || !(t1 > 0.0)) fail(ErrorKind::Domain, "switch time must be > 0");
  const double r = (w_max / w_min) * std::tan(w_max * t1);
  if (!(t1 < switch_time_limit(params)) || !(r < 1.0)) {
    fail(ErrorKind::Domain, "switch time must be below (1/omega_max) atan(omega_min/omega_max)");
  }
  // ln((1+r)/(1-r)) = 2 atanh(r)
  return 2.0 * std::atanh(r) / w_min + 2.0 * t1;
}

double switch_from_period(double period, const ProblemParams& params) {
  if (!std::isfinite(period) || !(period > 0.0)) fail(ErrorKind::Domain, "period must be > 0");
  const auto [w_min, w_max] = derive_frequencies(params);
  const double rho = w_min / w_max;

  // Rewriting T(t1) = T as tan(w_max t1) = rho tanh(w_min (T - 2 t1) / 2) gives a
  // residual that is increasing in t1 and never overflows for large T.
  const auto residual = [&](double t1) {
    return w_max * t1 - std::atan(rho * std::tanh(0.5 * w_min * (period - 2.0 * t1)));
  };
  const auto slope = [&](double t1) {
    const double a = 0.5 * w_min * (period - 2.0 * t1);
    const double z = rho * std::tanh(a);
    const double sech = 1.0 / std::cosh(a);
    return w_max + rho * w_min * sech * sech / (1.0 + z * z);
  };

  double lo = 0.0;
  double hi = switch_time_limit(params) * (1.0 - 1e-15);
  if (residual(hi) < 0.0) return hi;
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (residual(mid) < 0.0 ? lo : hi) = mid;
  }
  double t1 = 0.5 * (lo + hi);
  for (int it = 0; it < 2; ++it) {
    const double step = residual(t1) / slope(t1);
    const double candidate = t1 - step;
    if (!(candidate > 0.0) || std::abs(residual(candidate)) > std::abs(residual(t1))) break;
    t1 = candidate;
  }
  return t1;
}

double hyperbole_constant(double t1, const ProblemParams& params) {
  const auto [w_min, w_max] = derive_frequencies(params);
  const double c = std::cos(w_max * t1);
  const double ratio = (w_max / w_min) * std::tan(w_max * t1);
  return c * c * (1.0 - ratio * ratio);
}

double optimal_cost(double t1, const ProblemParams& params) {
  const double period = period_from_switch(t1, params);
  return 2.0 * t1 * params.u_max() + (period - 2.0 * t1) * params.u_min();
}

OptimalSolution solve_optimal(double period, const ProblemParams& params) {
  const double t1 = switch_from_period(period, params);
  return {params, t1, period, hyperbole_constant(t1, params),
          2.0 * t1 * params.u_max() + (period - 2.0 * t1) * params.u_min()};
}

State optimal_state(const OptimalSolution& sol, double t) {
  const auto [w_min, w_max] = derive_frequencies(sol.params);
  const double t1 = sol.switch_time;
  const double period = sol.period;
  t = std::clamp(t, 0.0, period);
  if (t <= t1) return {std::cos(w_max * t), -w_max * std::sin(w_max * t)};
  if (t >= period - t1) return {std::cos(w_max * (period - t)), w_max * std::sin(w_max * (period - t))};
  // Hyperbolic arc B (e^{w(t-T+t1)} + e^{-w(t-t1)}); the growing coefficient of the
  // textbook form equals B e^{-w(T-2 t1)}, which avoids cancellation for large T.
  const double b = 0.5 * (std::cos(w_max * t1) + (w_max / w_min) * std::sin(w_max * t1));
  const double grow = std::exp(w_min * (t - period + t1));
  const double decay = std::exp(-w_min * (t - t1));
  return {b * (grow + decay), w_min * b * (grow - decay)};
}

Schedule optimal_schedule(const OptimalSolution& sol) {
  const auto& p = sol.params;
  return Schedule({{sol.switch_time, p.u_max()},
                   {sol.period - 2.0 * sol.switch_time, p.u_min()},
                   {sol.switch_time, p.u_max()}});
}

std::pair<OptimalSolution, Trajectory> optimal_trajectory(double period, const ProblemParams& params,
                                                          std::size_t n_samples) {
  if (n_samples < 3) fail(ErrorKind::InvalidArgument, "optimal trajectory needs at least 3 samples");
  auto sol = solve_optimal(period, params);
  const double t1 = sol.switch_time;

  std::vector<double> times;
  times.reserve(n_samples + 2);
  for (std::size_t k = 0; k < n_samples; ++k) {
    times.push_back(period * static_cast<double>(k) / static_cast<double>(n_samples - 1));
  }
  times.back() = period;
  times.push_back(t1);
  times.push_back(period - t1);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  Trajectory traj;
  traj.times = std::move(times);
  for (double t : traj.times) {
    traj.states.push_back(optimal_state(sol, t));
    traj.controls.push_back((t < t1 || t >= period - t1) ? params.u_max() : params.u_min());
  }
  traj.cost = sol.cost;
  return {sol, std::move(traj)};
}

TurnpikeLimits turnpike_limits(const ProblemParams& params) {
  const auto [w_min, w_max] = derive_frequencies(params);
  const double spread = params.spread();
  const double hyp = std::hypot(w_min, w_max);
  return {
      switch_time_limit(params),
      std::sqrt(params.u_max() / spread),
      -std::sqrt(-params.u_min() * params.u_max() / spread),
      (2.0 * w_max / hyp) * std::exp((w_min / w_max) * std::atan(w_min / w_max)),
  };
}

}  // namespace teardrop
