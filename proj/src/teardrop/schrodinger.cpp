#include "teardrop/schrodinger.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>

#include "teardrop/analytic.hpp"

namespace teardrop {

namespace {

constexpr double kGuard = 1e-9;
constexpr std::size_t kEnergyGrid = 2048;

double bisect(const std::function<double(double)>& f, double lo, double hi) {
  double f_lo = f(lo);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double f_mid = f(mid);
    if (f_mid == 0.0) return mid;
    if ((f_mid > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Roots of f on a sorted list of bracket endpoints.
std::vector<double> roots_between(const std::function<double(double)>& f, const std::vector<double>& nodes) {
  std::vector<double> roots;
  std::vector<double> values(nodes.size());
  std::transform(nodes.begin(), nodes.end(), values.begin(), f);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (values[i] == 0.0) {
      roots.push_back(nodes[i]);
    } else if (i + 1 < nodes.size() && values[i + 1] != 0.0 && (values[i] > 0.0) != (values[i + 1] > 0.0)) {
      roots.push_back(bisect(f, nodes[i], nodes[i + 1]));
    }
  }
  return roots;
}

std::vector<double> uniform(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  v.back() = b;
  return v;
}

void sort_states(std::vector<double>& energies, std::vector<Parity>& parities) {
  std::vector<std::size_t> order(energies.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return energies[a] < energies[b]; });
  std::vector<double> e;
  std::vector<Parity> p;
  for (auto i : order) {
    e.push_back(energies[i]);
    p.push_back(parities[i]);
  }
  energies = std::move(e);
  parities = std::move(p);
}

/// Flow from t = 0 to t = T/2: the inside segment, then the barrier.
Schedule half_cell(const PotentialWell& well, double energy) {
  const double t1 = well.half_width();
  return Schedule({{t1, energy}, {0.5 * *well.period() - t1, energy - well.height()}});
}

double half_cell_norm_squared(const Schedule& half, const State& s0) {
  // Simpson on each smooth piece, where the integrand is analytic.
  constexpr std::size_t panels = 4096;
  double total = 0.0;
  State s = s0;
  for (const auto& seg : half.segments()) {
    const double h = seg.duration / panels;
    std::vector<double> sq(panels + 1);
    for (std::size_t j = 0; j <= panels; ++j) {
      const double x = segment_propagator(seg.level, static_cast<double>(j) * h).apply(s).x;
      sq[j] = x * x;
    }
    total += simpson(sq, h);
    s = segment_propagator(seg.level, seg.duration).apply(s);
  }
  return total;
}

}  // namespace

PotentialWell::PotentialWell(double half_width, double height, std::optional<double> period)
    : t1_(half_width), m_(height), period_(period) {
  if (!std::isfinite(half_width) || !(half_width > 0.0)) fail(ErrorKind::Domain, "well half-width must be > 0");
  if (!std::isfinite(height) || !(height > 0.0)) fail(ErrorKind::Domain, "well height M must be > 0");
  if (period && (!std::isfinite(*period) || !(*period > 2.0 * half_width))) {
    fail(ErrorKind::Domain, "periodic well requires T > 2 t1");
  }
}

double simpson(const std::vector<double>& values, double spacing) {
  const std::size_t n = values.size();
  if (n < 3 || n % 2 == 0) fail(ErrorKind::InvalidArgument, "Simpson's rule needs an odd number (>= 3) of samples");
  double odd = 0.0;
  double even = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) (i % 2 ? odd : even) += values[i];
  return spacing / 3.0 * (values.front() + 4.0 * odd + 2.0 * even + values.back());
}

SpectrumResult bound_states_line(const PotentialWell& well, std::size_t n_samples) {
  if (well.period()) fail(ErrorKind::InvalidArgument, "bound_states_line needs a line-domain well");
  if (n_samples < 3) fail(ErrorKind::InvalidArgument, "need at least 3 samples");
  const double t1 = well.half_width();
  const double m = well.height();

  const auto even = [&](double e) {
    const double k = std::sqrt(e);
    return k * std::sin(k * t1) - std::sqrt(m - e) * std::cos(k * t1);
  };
  const auto odd = [&](double e) {
    const double k = std::sqrt(e);
    return k * std::cos(k * t1) + std::sqrt(m - e) * std::sin(k * t1);
  };

  // Each relation has at most one root between consecutive points k t1 = j pi / 2.
  std::vector<double> nodes{kGuard};
  const double quarter = std::numbers::pi / (2.0 * t1);
  for (int j = 1;; ++j) {
    const double e = (j * quarter) * (j * quarter);
    if (!(e < m - kGuard)) break;
    nodes.push_back(e);
  }
  nodes.push_back(m - kGuard);

  SpectrumResult out;
  for (double e : roots_between(even, nodes)) {
    out.eigenvalues.push_back(e);
    out.parities.push_back(Parity::Even);
  }
  for (double e : roots_between(odd, nodes)) {
    out.eigenvalues.push_back(e);
    out.parities.push_back(Parity::Odd);
  }
  sort_states(out.eigenvalues, out.parities);
  if (out.eigenvalues.empty()) fail(ErrorKind::NoSolution, "no bound state found inside the guard band");

  const double window = t1 + 12.0 / std::sqrt(m - out.eigenvalues.back());
  out.grid = uniform(-window, window, n_samples);
  for (std::size_t n = 0; n < out.eigenvalues.size(); ++n) {
    const double e = out.eigenvalues[n];
    const double k = std::sqrt(e);
    const double kappa = std::sqrt(m - e);
    const bool is_even = out.parities[n] == Parity::Even;
    const double edge = is_even ? std::cos(k * t1) : std::sin(k * t1);
    const double sign = is_even ? 1.0 : -1.0;
    const double norm2 = t1 + sign * std::sin(2.0 * k * t1) / (2.0 * k) + edge * edge / kappa;
    const double scale = 1.0 / std::sqrt(norm2);
    std::vector<double> psi(out.grid.size());
    for (std::size_t i = 0; i < psi.size(); ++i) {
      const double t = out.grid[i];
      const double a = std::abs(t);
      double v = 0.0;
      if (a <= t1) {
        v = is_even ? std::cos(k * t) : std::sin(k * t);
      } else {
        v = edge * std::exp(-kappa * (a - t1)) * (is_even || t > 0.0 ? 1.0 : -1.0);
      }
      psi[i] = scale * v;
    }
    out.eigenfunctions.push_back(std::move(psi));
  }
  return out;
}

PropagatorMatrix well_monodromy(const PotentialWell& well, double energy) {
  if (!well.period()) fail(ErrorKind::InvalidArgument, "monodromy needs a periodic well");
  const double t1 = well.half_width();
  const double outside = 0.5 * *well.period() - t1;
  const double barrier = energy - well.height();
  return monodromy(Schedule({{outside, barrier}, {2.0 * t1, energy}, {outside, barrier}}));
}

SpectrumResult periodic_spectrum(const PotentialWell& well, std::size_t n_samples, Boundary boundary) {
  if (!well.period()) fail(ErrorKind::Domain, "periodic spectrum needs a finite period T > 2 t1");
  if (n_samples < 3) fail(ErrorKind::InvalidArgument, "need at least 3 samples");
  const double m = well.height();
  const double period = *well.period();

  // For the symmetric cell, trace - 2 = 4 h12 h21 and trace + 2 = 4 h11 h22 with
  // h the half-cell flow, so each parity class is the zero set of one entry.
  const auto half = [&](double e) { return monodromy(half_cell(well, e)); };
  const bool periodic = boundary == Boundary::Periodic;
  const auto even = [&](double e) { return periodic ? half(e).a21 : half(e).a11; };
  const auto odd = [&](double e) { return periodic ? half(e).a12 : half(e).a22; };

  const auto nodes = uniform(kGuard, m - kGuard, kEnergyGrid);
  SpectrumResult out;
  for (double e : roots_between(even, nodes)) {
    out.eigenvalues.push_back(e);
    out.parities.push_back(Parity::Even);
  }
  for (double e : roots_between(odd, nodes)) {
    out.eigenvalues.push_back(e);
    out.parities.push_back(Parity::Odd);
  }
  sort_states(out.eigenvalues, out.parities);

  out.grid = uniform(-0.5 * period, 0.5 * period, n_samples);
  for (std::size_t n = 0; n < out.eigenvalues.size(); ++n) {
    const auto cell = half_cell(well, out.eigenvalues[n]);
    const bool is_even = out.parities[n] == Parity::Even;
    const State s0 = is_even ? State{1.0, 0.0} : State{0.0, 1.0};
    const double scale = 1.0 / std::sqrt(2.0 * half_cell_norm_squared(cell, s0));
    std::vector<double> psi(out.grid.size());
    for (std::size_t i = 0; i < psi.size(); ++i) {
      const double t = out.grid[i];
      const double v = state_at(cell, s0, std::abs(t)).x;
      psi[i] = scale * ((is_even || t >= 0.0) ? v : -v);
    }
    out.eigenfunctions.push_back(std::move(psi));
  }
  return out;
}

GroundStateReport ground_state_correspondence(const ProblemParams& params, double period, std::size_t n_samples) {
  const auto sol = solve_optimal(period, params);
  const PotentialWell well(sol.switch_time, params.spread(), period);
  const auto levels = periodic_spectrum(well, n_samples);

  GroundStateReport r;
  r.switch_time = sol.switch_time;
  r.well_height = params.spread();
  r.eigenvalue_count = levels.eigenvalues.size();
  if (levels.eigenvalues.empty()) fail(ErrorKind::NoSolution, "periodic well has no eigenvalue in (0, M)");
  r.ground_energy = levels.eigenvalues.front();
  r.energy_error = std::abs(r.ground_energy - params.u_max());

  // Centering the period at t = 0 turns the optimal x into an even function of t.
  const auto& psi = levels.eigenfunctions.front();
  std::vector<double> x(psi.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = optimal_state(sol, std::abs(levels.grid[i])).x;
  double px = 0.0, pp = 0.0, xx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    px += psi[i] * x[i];
    pp += psi[i] * psi[i];
    xx += x[i] * x[i];
  }
  r.correlation = std::abs(px) / std::sqrt(pp * xx);
  const double scale = px / xx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    r.max_discrepancy = std::max(r.max_discrepancy, std::abs(psi[i] - scale * x[i]));
  }
  return r;
}

LineTailReport line_ground_state_tail(const ProblemParams& params) {
  const auto [w_min, w_max] = derive_frequencies(params);
  const double t1 = switch_time_limit(params);
  const auto levels = bound_states_line(PotentialWell(t1, params.spread()), 4001);

  LineTailReport r;
  r.ground_energy = levels.eigenvalues.front();
  r.energy_error = std::abs(r.ground_energy - params.u_max());
  r.expected_decay = w_min;

  // Least-squares slope of log|psi0| against t over the tail window.
  const double end = t1 + 10.0 / w_min;
  double n = 0.0, st = 0.0, sl = 0.0, stt = 0.0, stl = 0.0;
  const auto& psi = levels.eigenfunctions.front();
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double t = levels.grid[i];
    if (t < t1 || t > end) continue;
    const double l = std::log(std::abs(psi[i]));
    n += 1.0;
    st += t;
    sl += l;
    stt += t * t;
    stl += t * l;
  }
  if (n < 2.0) fail(ErrorKind::NoSolution, "tail window holds fewer than two samples");
  const double slope = (n * stl - st * sl) / (n * stt - st * st);
  r.fitted_decay = -slope;
  r.relative_error = std::abs(r.fitted_decay - w_min) / w_min;
  return r;
}

}  // namespace teardrop
