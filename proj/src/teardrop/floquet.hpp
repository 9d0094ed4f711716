// Floquet stability of x'' + u(t) x = 0 under a square-wave u, and the
// compass (magnetic pendulum) driven by a square-wave coil current.
#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "teardrop/core.hpp"

namespace teardrop {

/// One period of the square wave: u_max on [0, t1) and [T - t1, T), u_min in between.
Schedule square_wave(double t1, double period, double high, double low);

/// Monodromy trace over one period; stable iff |trace| <= 2. Requires 0 <= 2 t1 <= T.
double stability_trace(double t1, double period, const ProblemParams& params);

struct AxisRange {
  double lo = 0.0;
  double hi = 0.0;
};

struct StabilityGrid {
  std::vector<double> t1_axis;  // cell centers
  std::vector<double> T_axis;
  // Row-major with T as the slow index: cell (i, j) is at j * t1_axis.size() + i.
  std::vector<double> trace;
  std::vector<unsigned char> stable;
  std::vector<unsigned char> boundary_periodic;      // trace - 2 changes sign toward a neighbour
  std::vector<unsigned char> boundary_antiperiodic;  // trace + 2 changes sign toward a neighbour
  std::vector<unsigned char> saturated;              // 2 t1 > T: evaluated with u = u_max throughout

  std::size_t index(std::size_t i_t1, std::size_t j_T) const noexcept { return j_T * t1_axis.size() + i_t1; }
  bool boundary(std::size_t k) const noexcept { return boundary_periodic[k] || boundary_antiperiodic[k]; }
};

StabilityGrid stability_map(const ProblemParams& params, AxisRange t1_range, AxisRange T_range, std::size_t n_t1,
                            std::size_t n_T);

struct CompassParams {
  double damping_ratio = 0.3;    // xi
  double moment_ratio = 6.4e4;   // mu / I
  double earth_field = 47e-6;    // B_T
  double coil_gain = 4496e-6;    // A
  double current_high = -0.2;    // coil current during the high phase
};

/// Field B(i) = -(B_T + A i).
double compass_field(const CompassParams& cp, double current);

/// (u_high, u_low) = (B(i_high) mu/I, B(0) mu/I).
std::pair<double, double> compass_levels(const CompassParams& cp);

struct AngleSeries {
  std::vector<double> times;
  std::vector<double> theta;
  std::vector<double> theta_dot;
};

/// theta'' + 2 xi sqrt(|B| mu/I) theta' - (B mu/I) sin theta = 0, integrated with
/// fixed-step RK4 whose steps never straddle a switching instant.
AngleSeries simulate_compass(const CompassParams& cp, double t1, double period, double theta0, double theta_dot0,
                             double total_time, double step);

/// Linearization about theta = pi: phi'' + 2 xi sqrt(|u|) phi' + u(t) phi = 0.
/// The returned angles are pi + phi.
AngleSeries simulate_linearized(double u_high, double u_low, double damping_ratio, double t1, double period,
                                double phi0, double phi_dot0, double total_time, double step);

struct VarianceProfile {
  std::vector<double> phases;
  std::vector<double> variance;     // unbiased, across periods
  std::vector<double> mean_square;  // mean of (theta - center)^2
  std::size_t periods = 0;
};

VarianceProfile variance_profile(const AngleSeries& series, double period, double center, std::size_t bins = 256);

double pearson_correlation(std::span<const double> a, std::span<const double> b);

struct CompassVarianceStudy {
  bool bounded = false;            // no net growth: last-period peak <= first-period peak
  double max_deviation = 0.0;      // max |theta - pi| over the run
  double first_period_peak = 0.0;
  double last_period_peak = 0.0;
  double correlation = 0.0;    // variance profile vs squared optimal x
  VarianceProfile profile;
};

/// Damped linearized response over the given number of periods from phi(0) = phi0,
/// compared with x(t)^2 of the closed-form optimum at the same period.
CompassVarianceStudy compass_variance_study(double u_high, double u_low, double damping_ratio, double t1,
                                            double period, std::size_t periods, double phi0 = 0.1);

}  // namespace teardrop
