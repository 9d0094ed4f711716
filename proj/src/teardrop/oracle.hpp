// Brute-force cross-checks of the closed-form optimum: exhaustive enumeration
// of grid bang-bang schedules and projected-gradient descent on a direct
// transcription with adjoint gradients.
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "teardrop/core.hpp"

namespace teardrop {

struct EnumerationOptions {
  std::size_t n_grid = 2000;
  std::size_t max_switches = 2;
  /// Default: 1e-3 at 2000 grid cells, scaled linearly with the grid spacing.
  std::optional<double> periodicity_tolerance;
  /// Keep only schedules whose trajectory crosses x = 0.
  bool require_crossing = false;
};

struct EnumerationReport {
  std::size_t grid_size = 0;
  std::size_t max_switches = 0;
  std::optional<Schedule> best_schedule;
  double best_cost = 0.0;  // +inf when nothing is admissible
  double best_defect = 0.0;
  std::vector<double> best_switch_times;
  double periodicity_tolerance = 0.0;
  std::size_t admissible_count = 0;
  std::size_t candidates = 0;
};

/// Scans every bang-bang schedule from (1, 0) whose switches lie on the grid
/// k T / n_grid, keeping those with |x(T) - 1| + |y(T)| below tolerance.
EnumerationReport enumerate_bangbang(const ProblemParams& params, double period, const EnumerationOptions& options);

/// Grid-induced cost slack (u_max - u_min) T / n_grid.
double enumeration_slack(const ProblemParams& params, double period, std::size_t n_grid);

/// J(u) = sum_i u_i dt + w (|x(T) - 1|^2 + |y(T)|^2) for the piecewise-constant
/// control u on n equal intervals, starting from (1, 0).
class TranscriptionObjective {
 public:
  TranscriptionObjective(const ProblemParams& params, double period, std::size_t n_intervals, double penalty_weight);

  double value(std::span<const double> controls) const;
  /// Exact gradient of value() via the discrete adjoint recursion.
  double value_and_gradient(std::span<const double> controls, std::span<double> gradient) const;
  State terminal_state(std::span<const double> controls) const;

  std::size_t size() const noexcept { return n_; }
  double step() const noexcept { return dt_; }
  double penalty_weight() const noexcept { return weight_; }
  void set_penalty_weight(double w) noexcept { weight_ = w; }

 private:
  ProblemParams params_;
  std::size_t n_;
  double dt_;
  double weight_;
};

struct TranscriptionOptions {
  std::optional<double> penalty_weight;     // default 1e3 (u_max - u_min)
  std::optional<std::vector<double>> initial_controls;
  double initial_amplitude = -1.0;          // < 0: 5% of (u_max - u_min)
  std::size_t max_iterations = 20000;
  double defect_target = 1e-4;
};

struct TranscriptionProblem {
  std::size_t n_intervals = 0;
  std::vector<double> control_vector;
  double penalty_weight = 0.0;
  double objective = 0.0;
  double cost = 0.0;    // sum u_i dt
  double defect = 0.0;  // |x(T) - 1| + |y(T)|
  std::size_t iterations = 0;
  bool converged = false;
  std::string diagnostics;
};

TranscriptionProblem transcription_descent(const ProblemParams& params, double period, std::size_t n_intervals,
                                           std::uint64_t seed, const TranscriptionOptions& options = {});

/// Independent descents from consecutive seeds; returns the lowest objective.
TranscriptionProblem transcription_restarts(const ProblemParams& params, double period, std::size_t n_intervals,
                                            std::uint64_t first_seed, std::size_t restarts,
                                            const TranscriptionOptions& options = {});

struct BangBangSummary {
  std::size_t transition_cells = 0;       // cells not within tolerance of a bound
  std::vector<double> switch_times;       // interpolated inside transition cells
  std::vector<std::size_t> switch_cells;  // cell index containing each switch time
};

BangBangSummary analyze_bang_bang(std::span<const double> controls, const ProblemParams& params, double period,
                                  double tolerance = 1e-3);

/// Closed loop of the given duration through (beta, 0) with negative cost;
/// the control does not depend on beta.
Schedule negative_loop(const ProblemParams& params, double duration, double beta);

}  // namespace teardrop
