#include "teardrop/core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace teardrop {

namespace {

constexpr double kShearThreshold = 1e-12;

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) fail(ErrorKind::InvalidArgument, std::string(what) + " must be finite");
}

}  // namespace

ProblemParams::ProblemParams(double u_min, double u_max) : u_min_(u_min), u_max_(u_max) {
  require_finite(u_min, "u_min");
  require_finite(u_max, "u_max");
  if (!(u_min < 0.0)) fail(ErrorKind::Domain, "u_min must be strictly negative");
  if (!(u_max > 0.0)) fail(ErrorKind::Domain, "u_max must be strictly positive");
}

Frequencies derive_frequencies(const ProblemParams& params) {
  return {std::sqrt(-params.u_min()), std::sqrt(params.u_max())};
}

Schedule::Schedule(std::vector<Segment> segments) : segments_(std::move(segments)) {
  if (segments_.empty()) fail(ErrorKind::InvalidArgument, "schedule has no segments");
  for (const auto& seg : segments_) {
    require_finite(seg.duration, "segment duration");
    require_finite(seg.level, "segment level");
    if (seg.duration < 0.0) fail(ErrorKind::InvalidArgument, "segment duration must be >= 0");
    total_ += seg.duration;
  }
  if (!(total_ > 0.0)) fail(ErrorKind::InvalidArgument, "schedule total duration must be > 0");
}

double Schedule::cost() const noexcept {
  double c = 0.0;
  for (const auto& seg : segments_) c += seg.duration * seg.level;
  return c;
}

std::vector<double> Schedule::switch_times() const {
  std::vector<double> out;
  double t = 0.0;
  std::optional<double> previous;
  for (const auto& seg : segments_) {
    if (seg.duration == 0.0) continue;
    if (previous && *previous != seg.level) out.push_back(t);
    previous = seg.level;
    t += seg.duration;
  }
  return out;
}

double Schedule::level_at(double t) const {
  double start = 0.0;
  const Segment* last = nullptr;
  for (const auto& seg : segments_) {
    if (seg.duration == 0.0) continue;
    last = &seg;
    if (t < start + seg.duration) return seg.level;
    start += seg.duration;
  }
  return last->level;
}

bool Schedule::within(const ProblemParams& params) const noexcept {
  return std::all_of(segments_.begin(), segments_.end(), [&](const Segment& s) {
    return s.level >= params.u_min() && s.level <= params.u_max();
  });
}

PropagatorMatrix operator*(const PropagatorMatrix& l, const PropagatorMatrix& r) noexcept {
  return {l.a11 * r.a11 + l.a12 * r.a21, l.a11 * r.a12 + l.a12 * r.a22,
          l.a21 * r.a11 + l.a22 * r.a21, l.a21 * r.a12 + l.a22 * r.a22};
}

PropagatorMatrix segment_propagator(double level, double tau) {
  if (std::abs(level) < kShearThreshold) return {1.0, tau, 0.0, 1.0};
  if (level > 0.0) {
    const double w = std::sqrt(level);
    const double c = std::cos(w * tau);
    const double s = std::sin(w * tau);
    return {c, s / w, -w * s, c};
  }
  const double w = std::sqrt(-level);
  const double c = std::cosh(w * tau);
  const double s = std::sinh(w * tau);
  return {c, s / w, w * s, c};
}

Propagation propagate_constant(const State& s, double level, double tau) {
  if (tau < 0.0) fail(ErrorKind::InvalidArgument, "propagation duration must be >= 0");
  const auto flow = segment_propagator(level, tau);
  return {flow.apply(s), flow};
}

PropagatorMatrix monodromy(const Schedule& schedule) {
  PropagatorMatrix m;
  for (const auto& seg : schedule.segments()) m = segment_propagator(seg.level, seg.duration) * m;
  return m;
}

std::optional<double> first_x_zero(const State& s, double level, double tau) {
  if (tau <= 0.0) return std::nullopt;
  if (std::abs(level) < kShearThreshold) {
    if (s.y == 0.0) return std::nullopt;
    const double t = -s.x / s.y;
    if (t > 0.0 && t <= tau) return t;
    return std::nullopt;
  }
  if (level > 0.0) {
    // x(t) = R cos(w t - phase); zeros where w t - phase = pi/2 mod pi.
    const double w = std::sqrt(level);
    const double phase = std::atan2(s.y / w, s.x);
    double angle = std::fmod(phase + std::numbers::pi / 2, std::numbers::pi);
    if (angle <= 0.0) angle += std::numbers::pi;
    const double t = angle / w;
    if (t <= tau) return t;
    return std::nullopt;
  }
  // x(t) = x0 cosh(w t) + (y0/w) sinh(w t) vanishes iff tanh(w t) = -w x0 / y0.
  const double w = std::sqrt(-level);
  if (s.y == 0.0) return std::nullopt;
  const double target = -w * s.x / s.y;
  if (!(target > 0.0 && target < 1.0)) return std::nullopt;
  const double t = std::atanh(target) / w;
  if (t <= tau) return t;
  return std::nullopt;
}

Trajectory simulate(const Schedule& schedule, const State& s0, double sample_step) {
  require_finite(s0.x, "initial x");
  require_finite(s0.y, "initial y");
  require_finite(sample_step, "sample step");
  if (!(sample_step > 0.0)) fail(ErrorKind::InvalidArgument, "sample step must be > 0");

  struct Piece {
    double start;
    double duration;
    double level;
    State entry;
  };
  std::vector<Piece> pieces;
  double t = 0.0;
  State s = s0;
  for (const auto& seg : schedule.segments()) {
    if (seg.duration == 0.0) continue;
    pieces.push_back({t, seg.duration, seg.level, s});
    s = segment_propagator(seg.level, seg.duration).apply(s);
    t += seg.duration;
  }
  const double total = t;
  const double merge_tol = 1e-12 * std::max(1.0, total);

  std::vector<double> times;
  const auto n_grid = static_cast<std::size_t>(std::floor(total / sample_step));
  times.reserve(n_grid + pieces.size() + 2);
  for (std::size_t k = 0; k <= n_grid; ++k) times.push_back(static_cast<double>(k) * sample_step);
  for (const auto& p : pieces) times.push_back(p.start);
  times.push_back(total);
  std::sort(times.begin(), times.end());

  // Boundaries win over nearby grid points so corners are sampled exactly.
  std::vector<double> boundaries;
  for (const auto& p : pieces) boundaries.push_back(p.start);
  boundaries.push_back(total);
  std::vector<double> merged;
  merged.reserve(times.size());
  for (double tv : times) {
    if (tv > total) continue;
    auto near = std::lower_bound(boundaries.begin(), boundaries.end(), tv - merge_tol);
    if (near != boundaries.end() && std::abs(*near - tv) <= merge_tol) tv = *near;
    if (merged.empty() || tv - merged.back() > merge_tol) merged.push_back(tv);
  }

  Trajectory traj;
  traj.times = std::move(merged);
  traj.states.reserve(traj.times.size());
  traj.controls.reserve(traj.times.size());
  std::size_t idx = 0;
  for (double tv : traj.times) {
    while (idx + 1 < pieces.size() && tv >= pieces[idx + 1].start) ++idx;
    const auto& p = pieces[idx];
    const double offset = std::min(tv - p.start, p.duration);
    traj.states.push_back(segment_propagator(p.level, offset).apply(p.entry));
    traj.controls.push_back(p.level);
  }
  // The last sample is the final state exactly.
  traj.states.back() = s;
  traj.cost = schedule.cost();
  return traj;
}

State state_at(const Schedule& schedule, const State& s0, double t) {
  State s = s0;
  double start = 0.0;
  for (const auto& seg : schedule.segments()) {
    if (t <= start + seg.duration) return segment_propagator(seg.level, std::max(0.0, t - start)).apply(s);
    s = segment_propagator(seg.level, seg.duration).apply(s);
    start += seg.duration;
  }
  return s;
}

}  // namespace teardrop
