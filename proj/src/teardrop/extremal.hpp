// Pontryagin extremal lifts, the one-parameter shooting method and the
// butterfly branch of periodic extremals.
#pragma once

#include <cstddef>
#include <vector>

#include "teardrop/analytic.hpp"
#include "teardrop/core.hpp"

namespace teardrop {

/// Trajectory together with its costate, with the multiplier normalized to -1.
struct ExtremalLift {
  Trajectory trajectory;
  std::vector<double> costate_x;
  std::vector<double> costate_y;
  std::vector<double> switching;    // phi = -p_y x + p0
  std::vector<double> hamiltonian;  // H1 = p_x y + max(u_min phi, u_max phi)
  double multiplier = -1.0;
  double lambda = 0.0;  // -1 / p_y(0)
};

/// Lifts a trajectory with costate (p_x, p_y) = -(1/lambda) (-y, x).
ExtremalLift lift_trajectory(const Trajectory& trajectory, double lambda, const ProblemParams& params);

/// Lift of the closed-form optimum; lambda = cos^2(omega_max t1).
ExtremalLift lift_optimal(const OptimalSolution& solution, std::size_t n_samples = 513);

struct SwitchingReport {
  double max_violation = 0.0;     // largest |phi| with the wrong sign for the active level
  std::size_t violations = 0;     // samples whose violation exceeds the tolerance
  double max_phi_at_switch = 0.0; // largest |phi| at a switching sample
  std::size_t spurious_zeros = 0; // non-switching samples with |phi| <= tolerance
};

/// Checks phi > 0 <=> u = u_max along the lift.
SwitchingReport switching_sign_consistency(const ExtremalLift& lift, const ProblemParams& params,
                                           double tolerance = 1e-10);

struct HamiltonianStats {
  double mean = 0.0;
  double max_deviation = 0.0;
};

HamiltonianStats hamiltonian_constancy(const ExtremalLift& lift);

struct ShootingOptions {
  std::size_t max_switches = 64;
  double tolerance = 1e-9;
};

struct ShootingResult {
  double lambda;
  double residual_x;  // x(T) - 1
  double residual_y;  // y(T)
  std::vector<double> switch_times;
  bool converged;
  Schedule schedule;
};

/// Integrates from (1, 0) under the feedback u = u_max if x^2 > lambda, u_min if
/// x^2 < lambda, locating each crossing of x^2 = lambda on the exact flow.
/// Throws ErrorKind::Divergence past options.max_switches switches.
ShootingResult shoot(double lambda, const ProblemParams& params, double period, const ShootingOptions& options = {});

struct ShootingSolution {
  ShootingResult shot;
  ExtremalLift lift;
};

/// Root-finds the shooting parameter on the teardrop branch lambda in (u_max/(u_max-u_min), 1).
ShootingSolution solve_shooting(double period, const ProblemParams& params, std::size_t n_samples = 513);

struct ButterflySolution {
  ShootingResult shot;
  Trajectory trajectory;
};

/// Periodic extremal through (1, 0) crossing x = 0, for T >= 2 pi / omega_max.
ButterflySolution find_butterfly(double period, const ProblemParams& params, std::size_t n_samples = 513);

}  // namespace teardrop
