// Domain types and exact flows of the linear system
//   x' = y,  y' = -u x
// under piecewise-constant controls u.
#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "teardrop/errors.hpp"

namespace teardrop {

/// Control bounds u_min < 0 < u_max (units of rad^2/s^2).
class ProblemParams {
 public:
  ProblemParams(double u_min, double u_max);

  double u_min() const noexcept { return u_min_; }
  double u_max() const noexcept { return u_max_; }
  /// Well depth M = u_max - u_min of the associated Schrodinger potential.
  double spread() const noexcept { return u_max_ - u_min_; }

 private:
  double u_min_;
  double u_max_;
};

struct Frequencies {
  double omega_min;  // sqrt(-u_min)
  double omega_max;  // sqrt(u_max)
};

Frequencies derive_frequencies(const ProblemParams& params);

struct State {
  double x = 0.0;
  double y = 0.0;
};

struct Segment {
  double duration = 0.0;
  double level = 0.0;
};

/// Ordered list of constant-control segments with positive total duration.
class Schedule {
 public:
  explicit Schedule(std::vector<Segment> segments);

  std::span<const Segment> segments() const noexcept { return segments_; }
  double total_duration() const noexcept { return total_; }
  /// Integral of u over the schedule, summed per segment.
  double cost() const noexcept;
  /// Times at which the level changes (interior boundaries only).
  std::vector<double> switch_times() const;
  /// Level active at time t (right-continuous; the last level at t = total).
  double level_at(double t) const;
  bool within(const ProblemParams& params) const noexcept;

 private:
  std::vector<Segment> segments_;
  double total_ = 0.0;
};

/// 2x2 real flow matrix acting on column vectors (x, y).
struct PropagatorMatrix {
  double a11 = 1.0, a12 = 0.0;
  double a21 = 0.0, a22 = 1.0;

  static PropagatorMatrix identity() noexcept { return {}; }

  State apply(const State& s) const noexcept { return {a11 * s.x + a12 * s.y, a21 * s.x + a22 * s.y}; }
  double det() const noexcept { return a11 * a22 - a12 * a21; }
  double trace() const noexcept { return a11 + a22; }
};

/// Matrix product lhs * rhs: the flow of rhs followed by the flow of lhs.
PropagatorMatrix operator*(const PropagatorMatrix& lhs, const PropagatorMatrix& rhs) noexcept;

/// Exact flow over duration tau at constant level: rotation (level > 0),
/// hyperbolic boost (level < 0) or shear (|level| < 1e-12).
PropagatorMatrix segment_propagator(double level, double tau);

struct Propagation {
  State state;
  PropagatorMatrix flow;
};

Propagation propagate_constant(const State& s, double level, double tau);

/// Product of segment propagators in time order.
PropagatorMatrix monodromy(const Schedule& schedule);

/// First time in (0, tau] where x vanishes along the constant-level flow, if any.
std::optional<double> first_x_zero(const State& s, double level, double tau);

struct Trajectory {
  std::vector<double> times;
  std::vector<State> states;
  std::vector<double> controls;  // level active on [times[i], times[i+1])
  double cost = 0.0;

  std::size_t size() const noexcept { return times.size(); }
};

/// Samples the exact solution on a uniform grid of spacing sample_step,
/// always including every switching instant and the final time.
Trajectory simulate(const Schedule& schedule, const State& s0, double sample_step);

/// Exact state at time t (clamped to [0, total]).
State state_at(const Schedule& schedule, const State& s0, double t);

}  // namespace teardrop
