// Closed-form periodic optimum: u = u_max on [0, t1) and (T - t1, T],
// u = u_min in between, starting and ending at (1, 0).
#pragma once

#include <cstddef>
#include <utility>

#include "teardrop/core.hpp"

namespace teardrop {

struct OptimalSolution {
  ProblemParams params;
  double switch_time;         // t1
  double period;              // T
  double hyperbole_constant;  // c(t1): x^2 - y^2/omega_min^2 on the u_min arc
  double cost;                // integral of u over [0, T]
};

struct TurnpikeLimits {
  double t1_infinity;
  double corner_x;
  double corner_y;
  /// Coefficient k in x(T/2) ~ k exp(-omega_min T / 2) for large T.
  double midpoint_asymptote_prefactor;
};

/// Supremum of admissible switch times, (1/omega_max) atan(omega_min/omega_max).
double switch_time_limit(const ProblemParams& params);

/// T(t1) = (1/omega_min) ln((1+r)/(1-r)) + 2 t1,  r = (omega_max/omega_min) tan(omega_max t1).
/// Throws ErrorKind::Domain unless 0 < t1 < switch_time_limit(params).
double period_from_switch(double t1, const ProblemParams& params);

/// Inverse of period_from_switch for any T > 0.
double switch_from_period(double period, const ProblemParams& params);

double hyperbole_constant(double t1, const ProblemParams& params);

/// 2 t1 u_max + (T - 2 t1) u_min with T = period_from_switch(t1).
double optimal_cost(double t1, const ProblemParams& params);

OptimalSolution solve_optimal(double period, const ProblemParams& params);

/// Closed-form optimal state at time t in [0, T].
State optimal_state(const OptimalSolution& solution, double t);

/// The three-arc bang-bang schedule of the solution.
Schedule optimal_schedule(const OptimalSolution& solution);

/// n_samples uniform samples on [0, T] plus the two switching instants.
std::pair<OptimalSolution, Trajectory> optimal_trajectory(double period, const ProblemParams& params,
                                                          std::size_t n_samples);

TurnpikeLimits turnpike_limits(const ProblemParams& params);

}  // namespace teardrop
