#include <gtest/gtest.h>

#include <array>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "teardrop/analytic.hpp"
#include "teardrop/core.hpp"
#include "teardrop/parallel.hpp"

using namespace teardrop;

namespace {

using OdeState = std::array<double, 2>;

// Independent reference: adaptive Dormand-Prince integration of x' = y, y' = -u x.
State integrate_reference(State s, double level, double tau) {
  namespace ode = boost::numeric::odeint;
  OdeState z{s.x, s.y};
  auto rhs = [level](const OdeState& q, OdeState& dq, double) {
    dq[0] = q[1];
    dq[1] = -level * q[0];
  };
  ode::integrate_adaptive(ode::make_controlled(1e-13, 1e-13, ode::runge_kutta_dopri5<OdeState>()), rhs, z, 0.0, tau,
                          tau / 200.0);
  return {z[0], z[1]};
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected a teardrop::Error";
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST(Frequencies, GoldenParameterSets) {
  auto f = derive_frequencies(ProblemParams(-3, 1));
  EXPECT_NEAR(f.omega_min, 1.7320508, 1e-7);
  EXPECT_DOUBLE_EQ(f.omega_max, 1.0);

  f = derive_frequencies(ProblemParams(-1, 1));
  EXPECT_DOUBLE_EQ(f.omega_min, 1.0);
  EXPECT_DOUBLE_EQ(f.omega_max, 1.0);

  f = derive_frequencies(ProblemParams(-3, 54.5));
  EXPECT_NEAR(f.omega_min, 1.7320508, 1e-7);
  EXPECT_NEAR(f.omega_max, 7.38241, 1e-5);
}

TEST(ProblemParams, RejectsBoundsOnTheWrongSide) {
  EXPECT_EQ(kind_of([] { ProblemParams(0.0, 1.0); }), ErrorKind::Domain);
  EXPECT_EQ(kind_of([] { ProblemParams(-1.0, 0.0); }), ErrorKind::Domain);
  EXPECT_EQ(kind_of([] { ProblemParams(1.0, 2.0); }), ErrorKind::Domain);
  EXPECT_EQ(kind_of([] { ProblemParams(std::nan(""), 1.0); }), ErrorKind::InvalidArgument);
  EXPECT_DOUBLE_EQ(ProblemParams(-3, 1).spread(), 4.0);
}

TEST(Propagate, QuarterRotation) {
  auto r = propagate_constant({1, 0}, 1.0, std::numbers::pi / 2);
  EXPECT_NEAR(r.state.x, 0.0, 1e-15);
  EXPECT_NEAR(r.state.y, -1.0, 1e-15);
}

TEST(Propagate, ShearWithZeroVelocityIsStationary) {
  auto r = propagate_constant({1, 0}, 0.0, 2.0);
  EXPECT_DOUBLE_EQ(r.state.x, 1.0);
  EXPECT_DOUBLE_EQ(r.state.y, 0.0);
  EXPECT_DOUBLE_EQ(r.flow.a12, 2.0);
}

TEST(Propagate, HyperbolicSegmentMatchesClosedFormAndIntegrator) {
  const double w = std::sqrt(3.0);
  auto r = propagate_constant({1, 0}, -3.0, 1.0);
  EXPECT_NEAR(r.state.x, std::cosh(w), 1e-14);
  EXPECT_NEAR(r.state.y, w * std::sinh(w), 1e-14);
  EXPECT_NEAR(r.state.x, 2.9145, 1e-4);
  EXPECT_NEAR(r.state.y, 4.74176, 1e-5);

  auto ref = integrate_reference({1, 0}, -3.0, 1.0);
  EXPECT_NEAR(r.state.x / ref.x, 1.0, 1e-10);
  EXPECT_NEAR(r.state.y / ref.y, 1.0, 1e-10);
}

TEST(Propagate, NegativeDurationRejected) {
  EXPECT_EQ(kind_of([] { propagate_constant({1, 0}, 1.0, -0.1); }), ErrorKind::InvalidArgument);
}

TEST(Propagate, AgreesWithAdaptiveIntegratorOnRandomSegments) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> level(-4.0, 4.0), tau(0.05, 2.0), coord(-2.0, 2.0);
  for (int k = 0; k < 200; ++k) {
    const State s{coord(rng), coord(rng)};
    const double u = level(rng), d = tau(rng);
    const auto exact = propagate_constant(s, u, d).state;
    const auto ref = integrate_reference(s, u, d);
    const double scale = std::max({1.0, std::abs(ref.x), std::abs(ref.y)});
    EXPECT_LT(std::abs(exact.x - ref.x) / scale, 1e-8) << "u=" << u << " tau=" << d;
    EXPECT_LT(std::abs(exact.y - ref.y) / scale, 1e-8) << "u=" << u << " tau=" << d;
  }
}

TEST(Propagate, DeterminantIsOneUnderRandomDraws) {
  std::mt19937_64 rng(7);
  // Entries stay below ~30 so the cancellation in a11 a22 - a12 a21 is far below 1e-10.
  std::uniform_real_distribution<double> level(-4.0, 4.0), tau(0.0, 2.0);
  double worst = 0.0;
  PropagatorMatrix composed;
  for (int k = 0; k < 10000; ++k) {
    const auto m = segment_propagator(level(rng), tau(rng));
    worst = std::max(worst, std::abs(m.det() - 1.0));
    if (k < 20) composed = m * composed;
  }
  EXPECT_LT(worst, 1e-10);
  EXPECT_LT(std::abs(composed.det() - 1.0) / std::max(1.0, std::abs(composed.a11 * composed.a22)), 1e-10);
}

TEST(Propagate, GroupProperty) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> level(-3.0, 3.0), tau(0.0, 1.0);
  for (int k = 0; k < 500; ++k) {
    const double u = level(rng), a = tau(rng), b = tau(rng);
    const auto whole = segment_propagator(u, a + b);
    const auto split = segment_propagator(u, b) * segment_propagator(u, a);
    EXPECT_NEAR(whole.a11, split.a11, 1e-12);
    EXPECT_NEAR(whole.a12, split.a12, 1e-12);
    EXPECT_NEAR(whole.a21, split.a21, 1e-12);
    EXPECT_NEAR(whole.a22, split.a22, 1e-12);
  }
}

TEST(Propagate, FlowIsContinuousAcrossTheShearThreshold) {
  for (double u : {2e-12, -2e-12, 1e-9, -1e-9}) {
    const auto near = segment_propagator(u, 1.5);
    const auto shear = segment_propagator(0.0, 1.5);
    EXPECT_NEAR(near.a11, shear.a11, 1e-8);
    EXPECT_NEAR(near.a12, shear.a12, 1e-8);
    EXPECT_NEAR(near.a21, shear.a21, 1e-8);
    EXPECT_NEAR(near.a22, shear.a22, 1e-8);
  }
}

TEST(Monodromy, TrivialTraces) {
  const double T = 1.3;
  EXPECT_NEAR(monodromy(Schedule({{T, 1.0}})).trace(), 2 * std::cos(T), 1e-14);
  EXPECT_NEAR(monodromy(Schedule({{T, -3.0}})).trace(), 2 * std::cosh(std::sqrt(3.0) * T), 1e-12);
}

TEST(Monodromy, OptimalScheduleHasTraceTwo) {
  const ProblemParams p(-3, 1);
  const auto sol = solve_optimal(period_from_switch(0.6, p), p);
  const auto m = monodromy(optimal_schedule(sol));
  EXPECT_NEAR(m.trace(), 2.0, 1e-9);
  EXPECT_NEAR(m.det(), 1.0, 1e-12);
}

TEST(Monodromy, ComposesInTimeOrder) {
  const Schedule s({{0.3, 1.0}, {0.7, -2.0}});
  const auto expected = segment_propagator(-2.0, 0.7) * segment_propagator(1.0, 0.3);
  const auto m = monodromy(s);
  EXPECT_DOUBLE_EQ(m.a11, expected.a11);
  EXPECT_DOUBLE_EQ(m.a12, expected.a12);
  EXPECT_DOUBLE_EQ(m.a21, expected.a21);
  EXPECT_DOUBLE_EQ(m.a22, expected.a22);
}

TEST(Schedule, ValidationAndQueries) {
  EXPECT_EQ(kind_of([] { Schedule({}); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { Schedule({{-1.0, 1.0}}); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { Schedule({{0.0, 1.0}}); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { Schedule({{1.0, std::nan("")}}); }), ErrorKind::InvalidArgument);

  const Schedule s({{0.5, 1.0}, {0.0, 7.0}, {1.0, -3.0}, {0.5, 1.0}});
  EXPECT_DOUBLE_EQ(s.total_duration(), 2.0);
  EXPECT_DOUBLE_EQ(s.cost(), 0.5 - 3.0 + 0.5);
  ASSERT_EQ(s.switch_times().size(), 2u);
  EXPECT_DOUBLE_EQ(s.switch_times()[0], 0.5);
  EXPECT_DOUBLE_EQ(s.switch_times()[1], 1.5);
  EXPECT_DOUBLE_EQ(s.level_at(0.49), 1.0);
  EXPECT_DOUBLE_EQ(s.level_at(0.5), -3.0);
  EXPECT_DOUBLE_EQ(s.level_at(2.0), 1.0);
  EXPECT_FALSE(s.within(ProblemParams(-3, 1)));  // the zero-length 7.0 segment is still out of range
  EXPECT_TRUE(Schedule({{1.0, -3.0}, {1.0, 1.0}}).within(ProblemParams(-3, 1)));
}

TEST(Simulate, OptimalScheduleReturnsToStart) {
  const ProblemParams p(-3, 1);
  const auto sol = solve_optimal(period_from_switch(0.6, p), p);
  const auto traj = simulate(optimal_schedule(sol), {1, 0}, 0.01);
  EXPECT_NEAR(traj.states.back().x, 1.0, 1e-9);
  EXPECT_NEAR(traj.states.back().y, 0.0, 1e-9);
  EXPECT_NEAR(traj.cost, -0.2470, 5e-4);
  EXPECT_DOUBLE_EQ(traj.cost, 2 * 0.6 * 1.0 + (sol.period - 1.2) * -3.0);
}

TEST(Simulate, IncludesSwitchInstantsAndIsStrictlyIncreasing) {
  const Schedule s({{0.123, 1.0}, {0.5, -3.0}, {0.377, 1.0}});
  const auto traj = simulate(s, {1, 0}, 0.1);
  auto has = [&](double t) {
    for (double v : traj.times)
      if (v == t) return true;
    return false;
  };
  EXPECT_TRUE(has(0.0));
  EXPECT_TRUE(has(0.123));
  EXPECT_TRUE(has(0.623));
  EXPECT_DOUBLE_EQ(traj.times.back(), s.total_duration());
  for (std::size_t i = 1; i < traj.size(); ++i) EXPECT_LT(traj.times[i - 1], traj.times[i]);
  ASSERT_EQ(traj.states.size(), traj.size());
  ASSERT_EQ(traj.controls.size(), traj.size());
  // Samples satisfy the exact segment flow.
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto ref = state_at(s, {1, 0}, traj.times[i]);
    EXPECT_NEAR(traj.states[i].x, ref.x, 1e-13);
    EXPECT_NEAR(traj.states[i].y, ref.y, 1e-13);
  }
}

TEST(Simulate, ZeroLengthSegmentsIgnoredAndInputsValidated) {
  const Schedule with_empty({{1.0, 1.0}, {0.0, -3.0}});
  const Schedule plain({{1.0, 1.0}});
  const auto a = simulate(with_empty, {1, 0}, 0.25);
  const auto b = simulate(plain, {1, 0}, 0.25);
  EXPECT_EQ(a.times, b.times);
  EXPECT_DOUBLE_EQ(a.states.back().x, b.states.back().x);
  EXPECT_EQ(kind_of([&] { simulate(plain, {1, 0}, 0.0); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([&] { simulate(plain, {std::nan(""), 0}, 0.1); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([&] { simulate(plain, {1, 0}, std::numeric_limits<double>::infinity()); }),
            ErrorKind::InvalidArgument);
}

TEST(FirstXZero, AllThreeRegimes) {
  auto t = first_x_zero({1, 0}, 1.0, 10.0);
  ASSERT_TRUE(t);
  EXPECT_NEAR(*t, std::numbers::pi / 2, 1e-14);
  EXPECT_FALSE(first_x_zero({1, 0}, 1.0, 1.0));

  t = first_x_zero({1, -1}, 0.0, 5.0);
  ASSERT_TRUE(t);
  EXPECT_DOUBLE_EQ(*t, 1.0);
  EXPECT_FALSE(first_x_zero({1, 1}, 0.0, 5.0));

  // Hyperbolic: x = cosh(w t) - (2/w) sinh(w t) vanishes at tanh(w t) = w/2.
  const double w = std::sqrt(3.0);
  t = first_x_zero({1, -2.0}, -3.0, 5.0);
  ASSERT_TRUE(t);
  EXPECT_NEAR(*t, std::atanh(w / 2) / w, 1e-14);
  EXPECT_NEAR(state_at(Schedule({{*t, -3.0}}), {1, -2.0}, *t).x, 0.0, 1e-14);
  EXPECT_FALSE(first_x_zero({1, -1.0}, -3.0, 5.0));  // too slow to overcome the boost
}

TEST(StateAt, ClampsToTheScheduleRange) {
  const Schedule s({{1.0, 1.0}});
  EXPECT_DOUBLE_EQ(state_at(s, {1, 0}, -1.0).x, 1.0);
  EXPECT_NEAR(state_at(s, {1, 0}, 5.0).x, std::cos(1.0), 1e-15);
  EXPECT_NEAR(state_at(s, {1, 0}, 0.5).y, -std::sin(0.5), 1e-15);
}

TEST(Parallel, VisitsEveryIndexOnce) {
  EXPECT_GE(worker_count(), 1u);
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i].fetch_add(1); });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  parallel_for(0, [](std::size_t) { FAIL(); });
}

TEST(Parallel, PropagatesExceptions) {
  EXPECT_THROW(parallel_for(64,
                            [](std::size_t i) {
                              if (i == 17) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
}

TEST(Parallel, HonoursThreadVariable) {
  ::setenv("TEARDROP_THREADS", "3", 1);
  EXPECT_EQ(worker_count(), 3u);
  ::setenv("TEARDROP_THREADS", "0", 1);
  EXPECT_GE(worker_count(), 1u);
  ::unsetenv("TEARDROP_THREADS");
}
