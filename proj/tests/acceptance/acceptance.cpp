// Acceptance runner: one PASS/FAIL line per criterion with its wall time.
// A criterion passes only when both its numerical condition and its time
// budget hold. The process exits non-zero if any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "teardrop/analytic.hpp"
#include "teardrop/extremal.hpp"
#include "teardrop/floquet.hpp"
#include "teardrop/oracle.hpp"
#include "teardrop/schrodinger.hpp"

using namespace teardrop;

namespace {

const ProblemParams kUnit(-3, 1);
const ProblemParams kCompass(-3, 54.5);
constexpr double kGoldenT = 1.6823;

struct Outcome {
  bool ok = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* title;
  double budget_ms;
  std::function<Outcome()> body;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome golden_period() {
  const double T = period_from_switch(0.6, kUnit);
  return {std::abs(T - 1.682) < 1e-3, fmt("T(0.6) = %.10f", T)};
}

Outcome negative_cost() {
  const double lim = switch_time_limit(kUnit);
  double worst = -INFINITY;
  for (int i = 1; i <= 1000; ++i) worst = std::max(worst, optimal_cost(lim * i / 1001.0, kUnit));
  return {worst < 0.0, fmt("max cost over 1000 switch times = %.6e", worst)};
}

Outcome shooting_agreement() {
  double worst = 0.0;
  for (double T : {0.5, kGoldenT, 5.0, 10.0}) {
    const auto sol = solve_shooting(T, kUnit);
    if (sol.shot.switch_times.empty()) return {false, fmt("no switch found at T = %g", T)};
    worst = std::max(worst, std::abs(sol.shot.switch_times.front() - switch_from_period(T, kUnit)));
  }
  return {worst < 1e-8, fmt("max |t1_shoot - t1_analytic| = %.3e", worst)};
}

Outcome oracle_optimality() {
  EnumerationOptions opts;
  opts.n_grid = 2000;
  opts.max_switches = 2;
  const auto rep = enumerate_bangbang(kUnit, kGoldenT, opts);
  const double analytic = optimal_cost(switch_from_period(kGoldenT, kUnit), kUnit);
  const double slack = enumeration_slack(kUnit, kGoldenT, opts.n_grid);
  const bool holds = rep.admissible_count == 0 || rep.best_cost >= analytic - slack;
  return {holds, fmt("admissible %zu of %zu, best %.6f, analytic %.6f, slack %.4f", rep.admissible_count,
                     rep.candidates, rep.best_cost, analytic, slack)};
}

double transcription_gradient_error() {
  const TranscriptionObjective obj(kUnit, kGoldenT, 128, 1e3 * kUnit.spread());
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> level(kUnit.u_min(), kUnit.u_max());
  std::vector<double> u(128), g(128);
  for (auto& v : u) v = level(rng);
  obj.value_and_gradient(u, g);
  const double h = 1e-6;
  double worst = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    auto up = u, dn = u;
    up[i] += h;
    dn[i] -= h;
    const double fd = (obj.value(up) - obj.value(dn)) / (2 * h);
    worst = std::max(worst, std::abs(fd - g[i]));
    scale = std::max(scale, std::abs(fd));
  }
  return worst / scale;
}

Outcome transcription_convergence() {
  TranscriptionOptions opts;
  opts.initial_controls = std::vector<double>(128, 0.0);
  const auto r = transcription_descent(kUnit, kGoldenT, 128, 0, opts);
  const auto bb = analyze_bang_bang(r.control_vector, kUnit, kGoldenT);
  const double dt = kGoldenT / 128;
  const auto has_cell = [&](double t) {
    const auto cell = static_cast<std::size_t>(t / dt);
    for (auto c : bb.switch_cells)
      if (c == cell) return true;
    return false;
  };
  const bool cells = bb.switch_cells.size() == 2 && has_cell(0.6) && has_cell(kGoldenT - 0.6);
  const double rel = std::abs(r.cost / -0.2470 - 1.0);
  const double grad = transcription_gradient_error();
  return {cells && bb.transition_cells <= 2 && rel < 0.01 && grad < 1e-6,
          fmt("switch cells %s, transition cells %zu, cost %.6f (rel %.2e), gradient rel err %.2e",
              cells ? "match" : "mismatch", bb.transition_cells, r.cost, rel, grad)};
}

Outcome spectrum_golden() {
  // 1.6823 is T(0.6) rounded to four decimals; the level sits at u_max exactly
  // only on the optimal curve, so the check runs at the unrounded period.
  const double exact_T = period_from_switch(0.6, kUnit);
  const auto per = periodic_spectrum(PotentialWell(0.6, 4.0, exact_T));
  const auto rounded = periodic_spectrum(PotentialWell(0.6, 4.0, kGoldenT));
  const auto line = bound_states_line(PotentialWell(std::numbers::pi / 3, 4.0));
  const bool ok = per.eigenvalues.size() == 1 && std::abs(per.eigenvalues[0] - 1.0) < 1e-6 &&
                  line.eigenvalues.size() == 2 && std::abs(line.eigenvalues[0] - 1.0) < 1e-9;
  return {ok, fmt("periodic: %zu level(s), |E0-1| = %.2e at T(0.6) (%.2e at T=1.6823); line: %zu levels, "
                  "|E0-1| = %.2e",
                  per.eigenvalues.size(), per.eigenvalues.empty() ? NAN : std::abs(per.eigenvalues[0] - 1.0),
                  rounded.eigenvalues.empty() ? NAN : std::abs(rounded.eigenvalues[0] - 1.0),
                  line.eigenvalues.size(), line.eigenvalues.empty() ? NAN : std::abs(line.eigenvalues[0] - 1.0))};
}

Outcome floquet_boundary() {
  double worst = 0.0;
  for (const auto& p : {kUnit, kCompass}) {
    const double lim = switch_time_limit(p);
    for (int i = 1; i <= 50; ++i) {
      const double t1 = lim * i / 51.0;
      worst = std::max(worst, std::abs(stability_trace(t1, period_from_switch(t1, p), p) - 2.0));
    }
  }
  return {worst < 1e-8, fmt("max |trace - 2| over 100 points = %.3e", worst)};
}

Outcome turnpike() {
  const auto lim = turnpike_limits(kCompass);
  const double w = std::sqrt(3.0);
  const double T = 20.0 / w;
  const auto sol = solve_optimal(T, kCompass);
  const double scaled = optimal_state(sol, T / 2).x * std::exp(w * T / 2);
  const double rel = std::abs(scaled / lim.midpoint_asymptote_prefactor - 1.0);
  return {std::abs(lim.t1_infinity - 0.0312) < 2e-4 && rel < 0.02,
          fmt("t1_inf = %.6f s, scaled midpoint %.5f vs prefactor %.5f (rel %.2e)", lim.t1_infinity, scaled,
              lim.midpoint_asymptote_prefactor, rel)};
}

Outcome pmp_diagnostics() {
  const auto lift = lift_optimal(solve_optimal(kGoldenT, kUnit));
  const auto stats = hamiltonian_constancy(lift);
  const auto& st = lift.trajectory.states;
  const double c0 = lift.costate_x[0] * st[0].x + lift.costate_y[0] * st[0].y;
  double conservation = 0.0;
  for (std::size_t i = 0; i < st.size(); ++i) {
    conservation = std::max(conservation, std::abs(lift.costate_x[i] * st[i].x + lift.costate_y[i] * st[i].y - c0));
  }
  const double periodicity = std::max(std::abs(lift.costate_x.back() - lift.costate_x.front()),
                                      std::abs(lift.costate_y.back() - lift.costate_y.front()));
  return {stats.max_deviation < 1e-9 && conservation < 1e-9 && periodicity < 1e-9,
          fmt("H deviation %.2e, conservation %.2e, adjoint periodicity %.2e", stats.max_deviation, conservation,
              periodicity)};
}

Outcome compass_variance() {
  const auto s = compass_variance_study(54.5, -3.0, 0.3, 0.035, 3.87, 10);
  return {s.bounded && s.correlation > 0.9,
          fmt("bounded %s (first-period peak %.3e, last-period peak %.3e), correlation %.3f",
              s.bounded ? "yes" : "no", s.first_period_peak, s.last_period_peak, s.correlation)};
}

Outcome butterfly() {
  const double T0 = 2 * std::numbers::pi;
  const auto ellipse = find_butterfly(T0, kUnit);
  double dev = 0.0;
  bool pure = ellipse.shot.switch_times.empty();
  for (std::size_t i = 0; i < ellipse.trajectory.size(); ++i) {
    dev = std::max(dev, std::abs(ellipse.trajectory.states[i].x - std::cos(ellipse.trajectory.times[i])));
    pure = pure && ellipse.trajectory.controls[i] == kUnit.u_max();
  }
  const auto bf = find_butterfly(10.0, kUnit);
  const double teardrop_cost = optimal_cost(switch_from_period(10.0, kUnit), kUnit);
  return {pure && dev < 1e-9 && bf.trajectory.cost > teardrop_cost,
          fmt("ellipse %s, max |x - cos t| = %.2e; T=10 butterfly cost %.4f vs teardrop %.4f",
              pure ? "pure" : "switched", dev, bf.trajectory.cost, teardrop_cost)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "golden period", 1.0, golden_period},
      {2, "negative cost everywhere", 10.0, negative_cost},
      {3, "shooting agreement", 1000.0, shooting_agreement},
      {4, "oracle optimality", 60000.0, oracle_optimality},
      {5, "transcription convergence", 30000.0, transcription_convergence},
      {6, "spectrum golden values", 1000.0, spectrum_golden},
      {7, "Floquet boundary", 1000.0, floquet_boundary},
      {8, "turnpike limits", 1000.0, turnpike},
      {9, "PMP diagnostics", 100.0, pmp_diagnostics},
      {10, "compass variance", 10000.0, compass_variance},
      {11, "butterfly", 1000.0, butterfly},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome out;
    const auto start = std::chrono::steady_clock::now();
    try {
      out = c.body();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = ms < c.budget_ms;
    const bool pass = out.ok && in_time;
    failed += !pass;
    std::printf("%s  %2d  %-26s %10.3f ms (budget %.0f ms%s)  %s\n", pass ? "PASS" : "FAIL", c.id, c.title, ms,
                c.budget_ms, in_time ? "" : ", exceeded", out.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
