#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "teardrop/analytic.hpp"
#include "teardrop/oracle.hpp"

using namespace teardrop;

namespace {

const ProblemParams kUnit(-3, 1);
constexpr double kGoldenT = 1.6823;

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected a teardrop::Error";
  return ErrorKind::InvalidArgument;
}

Schedule as_schedule(const std::vector<double>& controls, double period) {
  std::vector<Segment> segs;
  for (double u : controls) segs.push_back({period / static_cast<double>(controls.size()), u});
  return Schedule(std::move(segs));
}

double central_difference(const TranscriptionObjective& obj, std::vector<double> u, std::size_t i, double h) {
  const double saved = u[i];
  u[i] = saved + h;
  const double fp = obj.value(u);
  u[i] = saved - h;
  const double fm = obj.value(u);
  return (fp - fm) / (2 * h);
}

// Maximum over components of |adjoint - fd| / (max |fd| component), i.e. relative to the gradient scale.
double gradient_error(const TranscriptionObjective& obj, const std::vector<double>& u, double h) {
  std::vector<double> g(u.size());
  obj.value_and_gradient(u, g);
  double scale = 0.0, worst = 0.0;
  std::vector<double> fd(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    fd[i] = central_difference(obj, u, i, h);
    scale = std::max(scale, std::abs(fd[i]));
  }
  for (std::size_t i = 0; i < u.size(); ++i) worst = std::max(worst, std::abs(g[i] - fd[i]));
  return worst / scale;
}

// Both optima through (1, 0): u_max first with switches {t1, T - t1}, or u_min
// first with switches {T/2 - t1, T/2 + t1} (the same loop entered at its far side).
bool matches_an_optimum(const BangBangSummary& bb, double period, double cell) {
  if (bb.switch_times.size() != 2) return false;
  const double t1 = switch_from_period(period, kUnit);
  const auto near = [&](double a, double b) { return std::abs(a - b) <= cell; };
  return (near(bb.switch_times[0], t1) && near(bb.switch_times[1], period - t1)) ||
         (near(bb.switch_times[0], period / 2 - t1) && near(bb.switch_times[1], period / 2 + t1));
}

}  // namespace

TEST(Enumeration, GoldenPeriodBoundAndSwitchCells) {
  EnumerationOptions opts;  // n_grid 2000, two switches
  const auto r = enumerate_bangbang(kUnit, kGoldenT, opts);
  const auto sol = solve_optimal(kGoldenT, kUnit);
  const double cell = kGoldenT / 2000.0;
  ASSERT_TRUE(r.best_schedule.has_value());
  EXPECT_GE(r.best_cost, sol.cost - enumeration_slack(kUnit, kGoldenT, 2000));
  EXPECT_NEAR(r.best_cost, r.best_schedule->cost(), 1e-12);
  EXPECT_LT(r.best_defect, r.periodicity_tolerance);
  EXPECT_DOUBLE_EQ(r.periodicity_tolerance, 1e-3);
  ASSERT_EQ(r.best_switch_times.size(), 2u);
  EXPECT_LE(std::abs(r.best_switch_times[0] - sol.switch_time), cell);
  EXPECT_LE(std::abs(r.best_switch_times[1] - (kGoldenT - sol.switch_time)), cell);
  const auto end = state_at(*r.best_schedule, {1, 0}, kGoldenT);
  EXPECT_LT(std::abs(end.x - 1) + std::abs(end.y), r.periodicity_tolerance);
  EXPECT_GT(r.candidates, r.admissible_count);
}

TEST(Enumeration, LowerBoundConsistencyAcrossPeriods) {
  for (double T : {0.8, 1.2, 2.0}) {
    EnumerationOptions opts;
    opts.n_grid = 1000;
    const auto r = enumerate_bangbang(kUnit, T, opts);
    ASSERT_TRUE(r.best_schedule.has_value()) << "T=" << T;
    EXPECT_GE(r.best_cost, solve_optimal(T, kUnit).cost - enumeration_slack(kUnit, T, 1000)) << "T=" << T;
  }
}

TEST(Enumeration, NoSwitchesMeansConstantControl) {
  EnumerationOptions opts;
  opts.max_switches = 0;
  const auto none = enumerate_bangbang(kUnit, kGoldenT, opts);
  EXPECT_FALSE(none.best_schedule.has_value());
  EXPECT_TRUE(std::isinf(none.best_cost));
  EXPECT_EQ(none.admissible_count, 0u);
  EXPECT_EQ(none.candidates, 2u);

  // u = u_max closes the unit ellipse exactly when omega_max T = 2 pi.
  const auto ellipse = enumerate_bangbang(kUnit, 2 * std::numbers::pi, opts);
  ASSERT_TRUE(ellipse.best_schedule.has_value());
  EXPECT_NEAR(ellipse.best_cost, 2 * std::numbers::pi, 1e-12);
  EXPECT_TRUE(ellipse.best_switch_times.empty());
}

TEST(Enumeration, CrossingSchedulesCostMoreThanTeardropAtT10) {
  EnumerationOptions opts;
  opts.n_grid = 200;
  opts.max_switches = 4;
  opts.periodicity_tolerance = 0.02;
  opts.require_crossing = true;
  const auto r = enumerate_bangbang(kUnit, 10.0, opts);
  ASSERT_TRUE(r.best_schedule.has_value());
  EXPECT_GT(r.best_cost, solve_optimal(10.0, kUnit).cost + enumeration_slack(kUnit, 10.0, 200));
  bool crossed = false;
  const auto traj = simulate(*r.best_schedule, {1, 0}, 0.01);
  for (const auto& s : traj.states) crossed |= s.x < 0;
  EXPECT_TRUE(crossed);
}

TEST(Enumeration, RejectsOversizedSearches) {
  EnumerationOptions opts;
  opts.n_grid = 5000;
  EXPECT_EQ(kind_of([&] { enumerate_bangbang(kUnit, 1.0, opts); }), ErrorKind::InvalidArgument);
  opts.n_grid = 100;
  opts.max_switches = 5;
  EXPECT_EQ(kind_of([&] { enumerate_bangbang(kUnit, 1.0, opts); }), ErrorKind::InvalidArgument);
  opts.max_switches = 2;
  opts.periodicity_tolerance = 0.0;
  EXPECT_EQ(kind_of([&] { enumerate_bangbang(kUnit, 1.0, opts); }), ErrorKind::InvalidArgument);
  opts.periodicity_tolerance.reset();
  EXPECT_EQ(kind_of([&] { enumerate_bangbang(kUnit, 0.0, opts); }), ErrorKind::Domain);
}

TEST(Transcription, AdjointGradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> level(kUnit.u_min(), kUnit.u_max());
  for (std::size_t n : {16u, 128u}) {
    const TranscriptionObjective obj(kUnit, kGoldenT, n, 4000.0);
    for (int trial = 0; trial < 3; ++trial) {
      std::vector<double> u(n);
      for (auto& v : u) v = level(rng);
      EXPECT_LT(gradient_error(obj, u, 1e-6), 1e-6) << "n=" << n;
    }
  }
}

TEST(Transcription, SeriesBranchOfLevelDerivative) {
  // Levels with |u| dt^2 below 1e-2 take the series path; others the closed form.
  const TranscriptionObjective obj(kUnit, kGoldenT, 64, 4000.0);
  std::vector<double> u(64);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = (i % 3 == 0) ? 1e-13 : ((i % 3 == 1) ? -0.2 : 0.9);
  EXPECT_LT(gradient_error(obj, u, 1e-7), 1e-6);
  // Continuity across the branch threshold |u| dt^2 = 1e-2.
  const double dt = obj.step();
  const double edge = 1e-2 / (dt * dt);
  std::vector<double> below(64, edge * (1 - 1e-9)), above(64, edge * (1 + 1e-9));
  std::vector<double> gb(64), ga(64);
  const TranscriptionObjective wide(ProblemParams(-100, 100), kGoldenT, 64, 10.0);
  wide.value_and_gradient(below, gb);
  wide.value_and_gradient(above, ga);
  for (std::size_t i = 0; i < 64; ++i) EXPECT_NEAR(gb[i], ga[i], 1e-6 * (1 + std::abs(ga[i])));
}

TEST(Transcription, FromZeroControlReachesTheOptimum) {
  TranscriptionOptions opts;
  opts.initial_controls = std::vector<double>(128, 0.0);
  const auto r = transcription_descent(kUnit, kGoldenT, 128, 0, opts);
  const auto bb = analyze_bang_bang(r.control_vector, kUnit, kGoldenT);
  const double cell = kGoldenT / 128;
  EXPECT_LE(bb.transition_cells, 2u);
  ASSERT_EQ(bb.switch_times.size(), 2u);
  EXPECT_LE(std::abs(bb.switch_times[0] - 0.6), cell);
  EXPECT_LE(std::abs(bb.switch_times[1] - (kGoldenT - 0.6)), cell);
  EXPECT_NEAR(r.cost / -0.2470, 1.0, 0.01);
  EXPECT_LT(r.defect, 1e-3);
  for (double v : r.control_vector) {
    EXPECT_GE(v, kUnit.u_min());
    EXPECT_LE(v, kUnit.u_max());
  }
  EXPECT_FALSE(r.diagnostics.empty());
}

TEST(Transcription, SeededRunsReachOneOfTheHomotheticOptima) {
  const double cell = kGoldenT / 128;
  for (std::uint64_t seed : {0u, 1u, 3u}) {
    const auto r = transcription_descent(kUnit, kGoldenT, 128, seed);
    const auto bb = analyze_bang_bang(r.control_vector, kUnit, kGoldenT);
    EXPECT_TRUE(matches_an_optimum(bb, kGoldenT, cell)) << "seed=" << seed;
    EXPECT_NEAR(r.cost / -0.2470, 1.0, 0.01) << "seed=" << seed;
  }
}

TEST(Transcription, DeterministicAndBeatsZeroCost) {
  const auto a = transcription_restarts(kUnit, kGoldenT, 64, 5, 3);
  const auto b = transcription_restarts(kUnit, kGoldenT, 64, 5, 3);
  EXPECT_EQ(a.control_vector, b.control_vector);
  EXPECT_LT(a.cost, -0.2);
  EXPECT_LT(a.objective, 0.0);  // the stationary u = 0 candidate has objective exactly 0
  const TranscriptionObjective obj(kUnit, kGoldenT, 64, 1e3 * kUnit.spread());
  EXPECT_EQ(obj.value(std::vector<double>(64, 0.0)), 0.0);
}

TEST(Transcription, LimitPointObeysFeedbackLawOfItsOwnLambda) {
  TranscriptionOptions opts;
  opts.initial_controls = std::vector<double>(128, 0.0);
  const auto r = transcription_descent(kUnit, kGoldenT, 128, 0, opts);
  const auto bb = analyze_bang_bang(r.control_vector, kUnit, kGoldenT);
  ASSERT_FALSE(bb.switch_times.empty());
  const auto schedule = as_schedule(r.control_vector, kGoldenT);
  const double x_switch = state_at(schedule, {1, 0}, bb.switch_times[0]).x;
  const double lambda = x_switch * x_switch;
  const double cell = kGoldenT / 128;
  for (std::size_t i = 0; i < r.control_vector.size(); ++i) {
    const double t = (static_cast<double>(i) + 0.5) * cell;
    bool near_switch = false;
    for (double ts : bb.switch_times) near_switch |= std::abs(t - ts) <= cell;
    if (near_switch) continue;
    const double x = state_at(schedule, {1, 0}, t).x;
    const double expected = x * x > lambda ? kUnit.u_max() : kUnit.u_min();
    EXPECT_NEAR(r.control_vector[i], expected, 1e-3) << "cell " << i;
  }
}

TEST(Transcription, RejectsBadSizes) {
  EXPECT_EQ(kind_of([] { transcription_descent(kUnit, 1.0, 8, 0); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { transcription_descent(kUnit, 1.0, 1024, 0); }), ErrorKind::InvalidArgument);
  TranscriptionOptions opts;
  opts.initial_controls = std::vector<double>(10, 0.0);
  EXPECT_EQ(kind_of([&] { transcription_descent(kUnit, 1.0, 16, 0, opts); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { transcription_restarts(kUnit, 1.0, 16, 0, 0); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { TranscriptionObjective(kUnit, 1.0, 3, 1.0); }), ErrorKind::InvalidArgument);
}

TEST(BangBang, SummaryInterpolatesTransitionCells) {
  std::vector<double> u{1, 1, 1, -1, -3, -3, -3, 1, 1};
  const auto bb = analyze_bang_bang(u, kUnit, 9.0);
  EXPECT_EQ(bb.transition_cells, 1u);
  ASSERT_EQ(bb.switch_times.size(), 2u);
  EXPECT_DOUBLE_EQ(bb.switch_times[0], 3.5);  // -1 is halfway between 1 and -3
  EXPECT_EQ(bb.switch_cells[0], 3u);
  EXPECT_DOUBLE_EQ(bb.switch_times[1], 7.0);
}

TEST(NegativeLoop, ClosedNegativeAndScaleFree) {
  const auto loop1 = negative_loop(kUnit, 0.5, 1.0);
  const auto end1 = state_at(loop1, {1, 0}, 0.5);
  EXPECT_LT(std::abs(end1.x - 1) + std::abs(end1.y), 1e-10);
  EXPECT_LT(loop1.cost(), 0.0);

  const auto loop2 = negative_loop(kUnit, 0.5, 2.0);
  ASSERT_EQ(loop1.segments().size(), loop2.segments().size());
  for (std::size_t i = 0; i < loop1.segments().size(); ++i) {
    EXPECT_EQ(loop1.segments()[i].duration, loop2.segments()[i].duration);
    EXPECT_EQ(loop1.segments()[i].level, loop2.segments()[i].level);
  }
  const auto traj = simulate(loop2, {2, 0}, 0.001);
  for (const auto& s : traj.states) EXPECT_LE(s.x, 2.0 + 1e-12);
  EXPECT_LT(std::abs(traj.states.back().x - 2) + std::abs(traj.states.back().y), 1e-10);

  for (double d : {0.05, 0.5, 2.0, 8.0}) EXPECT_LT(negative_loop(kUnit, d, 0.3).cost(), 0.0);
  const double tiny = negative_loop(kUnit, 1e-4, 1.0).cost();
  EXPECT_LT(tiny, 0.0);
  EXPECT_GT(tiny, -1e-8);
  EXPECT_EQ(kind_of([] { negative_loop(kUnit, 1.0, 0.0); }), ErrorKind::Domain);
  EXPECT_EQ(kind_of([] { negative_loop(kUnit, 0.0, 1.0); }), ErrorKind::Domain);
}
