#include "teardrop/floquet.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "teardrop/analytic.hpp"
#include "teardrop/parallel.hpp"

namespace teardrop {

namespace {

void require_square_wave(double t1, double period) {
  if (!std::isfinite(period) || !(period > 0.0)) fail(ErrorKind::Domain, "period must be > 0");
  if (!std::isfinite(t1) || t1 < 0.0) fail(ErrorKind::Domain, "t1 must be >= 0");
  if (2.0 * t1 > period) fail(ErrorKind::Domain, "square wave requires 2 t1 <= T");
}

/// Sign of v with zero grouped with the positive side.
bool nonneg(double v) { return v >= 0.0; }

using Vec2 = std::array<double, 2>;

/// Fixed-step RK4 over repeated square-wave periods; `accel(high, theta, omega)`
/// returns theta''. Each phase is split into equal steps no longer than `step`.
template <class Accel>
AngleSeries integrate_square_wave(double t1, double period, Vec2 start, double total_time, double step,
                                  Accel&& accel) {
  if (!std::isfinite(step) || !(step > 0.0)) fail(ErrorKind::InvalidArgument, "step must be > 0");
  if (!std::isfinite(total_time) || !(total_time >= period)) fail(ErrorKind::InvalidArgument, "total_time must be >= T");
  const std::array<std::pair<double, bool>, 3> phases{{{t1, true}, {period - 2.0 * t1, false}, {t1, true}}};

  AngleSeries out;
  out.times.push_back(0.0);
  out.theta.push_back(start[0]);
  out.theta_dot.push_back(start[1]);
  Vec2 s = start;
  const auto f = [&](bool high, const Vec2& v) { return Vec2{v[1], accel(high, v[0], v[1])}; };

  for (std::size_t k = 0;; ++k) {
    const double period_start = static_cast<double>(k) * period;
    if (period_start >= total_time * (1.0 - 1e-14)) break;
    double offset = 0.0;
    for (const auto& [duration, high] : phases) {
      const double begin = period_start + offset;
      offset += duration;
      const double length = std::min(duration, total_time - begin);
      if (!(length > 0.0)) continue;
      const auto m = static_cast<std::size_t>(std::max(1.0, std::ceil(length / step - 1e-9)));
      const double h = length / static_cast<double>(m);
      for (std::size_t j = 1; j <= m; ++j) {
        const Vec2 k1 = f(high, s);
        const Vec2 k2 = f(high, {s[0] + 0.5 * h * k1[0], s[1] + 0.5 * h * k1[1]});
        const Vec2 k3 = f(high, {s[0] + 0.5 * h * k2[0], s[1] + 0.5 * h * k2[1]});
        const Vec2 k4 = f(high, {s[0] + h * k3[0], s[1] + h * k3[1]});
        s[0] += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
        s[1] += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
        const double t = begin + static_cast<double>(j) * h;
        if (!std::isfinite(s[0]) || !std::isfinite(s[1])) {
          std::ostringstream msg;
          msg << "integration produced a non-finite state at t = " << t;
          fail(ErrorKind::Divergence, msg.str());
        }
        out.times.push_back(t);
        out.theta.push_back(s[0]);
        out.theta_dot.push_back(s[1]);
      }
    }
  }
  return out;
}

double interpolate(const AngleSeries& s, double t) {
  const auto it = std::lower_bound(s.times.begin(), s.times.end(), t);
  if (it == s.times.begin()) return s.theta.front();
  if (it == s.times.end()) return s.theta.back();
  const auto i = static_cast<std::size_t>(it - s.times.begin());
  const double t0 = s.times[i - 1];
  const double t1 = s.times[i];
  const double w = (t - t0) / (t1 - t0);
  return (1.0 - w) * s.theta[i - 1] + w * s.theta[i];
}

}  // namespace

Schedule square_wave(double t1, double period, double high, double low) {
  require_square_wave(t1, period);
  std::vector<Segment> segs;
  if (t1 > 0.0) segs.push_back({t1, high});
  if (period - 2.0 * t1 > 0.0) segs.push_back({period - 2.0 * t1, low});
  if (t1 > 0.0) segs.push_back({t1, high});
  return Schedule(std::move(segs));
}

double stability_trace(double t1, double period, const ProblemParams& params) {
  return monodromy(square_wave(t1, period, params.u_max(), params.u_min())).trace();
}

StabilityGrid stability_map(const ProblemParams& params, AxisRange t1_range, AxisRange T_range, std::size_t n_t1,
                            std::size_t n_T) {
  if (n_t1 == 0 || n_T == 0 || n_t1 > 2048 || n_T > 2048) {
    fail(ErrorKind::InvalidArgument, "grid resolution must lie in [1, 2048] per axis");
  }
  if (!(t1_range.lo >= 0.0) || !(t1_range.hi > t1_range.lo) || !(T_range.lo >= 0.0) || !(T_range.hi > T_range.lo) ||
      !std::isfinite(t1_range.hi) || !std::isfinite(T_range.hi)) {
    fail(ErrorKind::InvalidArgument, "ranges must be non-negative and increasing");
  }
  StabilityGrid g;
  for (std::size_t i = 0; i < n_t1; ++i) {
    g.t1_axis.push_back(t1_range.lo + (static_cast<double>(i) + 0.5) * (t1_range.hi - t1_range.lo) / n_t1);
  }
  for (std::size_t j = 0; j < n_T; ++j) {
    g.T_axis.push_back(T_range.lo + (static_cast<double>(j) + 0.5) * (T_range.hi - T_range.lo) / n_T);
  }
  const std::size_t cells = n_t1 * n_T;
  g.trace.assign(cells, 0.0);
  g.stable.assign(cells, 0);
  g.saturated.assign(cells, 0);
  g.boundary_periodic.assign(cells, 0);
  g.boundary_antiperiodic.assign(cells, 0);

  parallel_for(n_T, [&](std::size_t j) {
    const double period = g.T_axis[j];
    for (std::size_t i = 0; i < n_t1; ++i) {
      const std::size_t k = g.index(i, j);
      const bool sat = 2.0 * g.t1_axis[i] > period;
      g.saturated[k] = sat;
      g.trace[k] = stability_trace(sat ? 0.5 * period : g.t1_axis[i], period, params);
      g.stable[k] = std::abs(g.trace[k]) <= 2.0;
    }
  });

  const auto mark = [&](std::size_t a, std::size_t b) {
    if (nonneg(g.trace[a] - 2.0) != nonneg(g.trace[b] - 2.0)) g.boundary_periodic[a] = g.boundary_periodic[b] = 1;
    if (nonneg(g.trace[a] + 2.0) != nonneg(g.trace[b] + 2.0)) {
      g.boundary_antiperiodic[a] = g.boundary_antiperiodic[b] = 1;
    }
  };
  for (std::size_t j = 0; j < n_T; ++j) {
    for (std::size_t i = 0; i < n_t1; ++i) {
      if (i + 1 < n_t1) mark(g.index(i, j), g.index(i + 1, j));
      if (j + 1 < n_T) mark(g.index(i, j), g.index(i, j + 1));
    }
  }
  return g;
}

double compass_field(const CompassParams& cp, double current) { return -(cp.earth_field + cp.coil_gain * current); }

std::pair<double, double> compass_levels(const CompassParams& cp) {
  return {compass_field(cp, cp.current_high) * cp.moment_ratio, compass_field(cp, 0.0) * cp.moment_ratio};
}

AngleSeries simulate_compass(const CompassParams& cp, double t1, double period, double theta0, double theta_dot0,
                             double total_time, double step) {
  require_square_wave(t1, period);
  if (!(cp.damping_ratio >= 0.0) || !(cp.moment_ratio > 0.0)) {
    fail(ErrorKind::InvalidArgument, "compass needs xi >= 0 and mu/I > 0");
  }
  const auto [u_high, u_low] = compass_levels(cp);
  const double damp_high = 2.0 * cp.damping_ratio * std::sqrt(std::abs(u_high));
  const double damp_low = 2.0 * cp.damping_ratio * std::sqrt(std::abs(u_low));
  return integrate_square_wave(t1, period, {theta0, theta_dot0}, total_time, step,
                               [&](bool high, double theta, double omega) {
                                 const double u = high ? u_high : u_low;
                                 return -(high ? damp_high : damp_low) * omega + u * std::sin(theta);
                               });
}

AngleSeries simulate_linearized(double u_high, double u_low, double damping_ratio, double t1, double period,
                                double phi0, double phi_dot0, double total_time, double step) {
  require_square_wave(t1, period);
  if (!(damping_ratio >= 0.0)) fail(ErrorKind::InvalidArgument, "damping ratio must be >= 0");
  const double damp_high = 2.0 * damping_ratio * std::sqrt(std::abs(u_high));
  const double damp_low = 2.0 * damping_ratio * std::sqrt(std::abs(u_low));
  auto series = integrate_square_wave(t1, period, {phi0, phi_dot0}, total_time, step,
                                      [&](bool high, double phi, double omega) {
                                        return -(high ? damp_high : damp_low) * omega - (high ? u_high : u_low) * phi;
                                      });
  for (auto& th : series.theta) th += std::numbers::pi;
  return series;
}

VarianceProfile variance_profile(const AngleSeries& series, double period, double center, std::size_t bins) {
  if (!(period > 0.0) || bins == 0) fail(ErrorKind::InvalidArgument, "period and bin count must be positive");
  if (series.times.size() < 2) fail(ErrorKind::InvalidArgument, "series too short");
  const double t0 = series.times.front();
  const double span = series.times.back() - t0;
  const auto periods = static_cast<std::size_t>(std::floor(span / period + 1e-9));
  if (periods < 3) fail(ErrorKind::InvalidArgument, "variance profile needs a series spanning at least 3 periods");

  VarianceProfile vp;
  vp.periods = periods;
  const double kp = static_cast<double>(periods);
  for (std::size_t b = 0; b < bins; ++b) {
    const double phase = period * static_cast<double>(b) / static_cast<double>(bins);
    double sum = 0.0, sum_sq = 0.0;
    std::vector<double> vals(periods);
    for (std::size_t k = 0; k < periods; ++k) {
      vals[k] = interpolate(series, t0 + static_cast<double>(k) * period + phase) - center;
      sum += vals[k];
      sum_sq += vals[k] * vals[k];
    }
    const double mean = sum / kp;
    double ss = 0.0;
    for (double v : vals) ss += (v - mean) * (v - mean);
    vp.phases.push_back(phase);
    vp.variance.push_back(ss / (kp - 1.0));
    vp.mean_square.push_back(sum_sq / kp);
  }
  return vp;
}

double pearson_correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) fail(ErrorKind::InvalidArgument, "correlation needs equal-length samples");
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

CompassVarianceStudy compass_variance_study(double u_high, double u_low, double damping_ratio, double t1,
                                            double period, std::size_t periods, double phi0) {
  if (periods < 3) fail(ErrorKind::InvalidArgument, "variance study needs at least 3 periods");
  const ProblemParams params(u_low, u_high);
  const auto series = simulate_linearized(u_high, u_low, damping_ratio, t1, period, phi0, 0.0,
                                          static_cast<double>(periods) * period, period / 2048.0);
  CompassVarianceStudy study;
  const double last_start = static_cast<double>(periods - 1) * period;
  for (std::size_t i = 0; i < series.times.size(); ++i) {
    const double dev = std::abs(series.theta[i] - std::numbers::pi);
    study.max_deviation = std::max(study.max_deviation, dev);
    if (series.times[i] <= period) study.first_period_peak = std::max(study.first_period_peak, dev);
    if (series.times[i] >= last_start) study.last_period_peak = std::max(study.last_period_peak, dev);
  }
  study.bounded = std::isfinite(study.max_deviation) && study.last_period_peak <= study.first_period_peak;
  study.profile = variance_profile(series, period, std::numbers::pi);

  const auto sol = solve_optimal(period, params);
  std::vector<double> reference;
  for (double ph : study.profile.phases) {
    const double x = optimal_state(sol, ph).x;
    reference.push_back(x * x);
  }
  study.correlation = pearson_correlation(study.profile.variance, reference);
  return study;
}

}  // namespace teardrop
