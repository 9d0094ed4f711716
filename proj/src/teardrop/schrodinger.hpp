// Bound states of -psi'' + V psi = E psi for the finite square well
// V = 0 on |t| <= t1 and V = M outside, on the line or on a periodic cell.
#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "teardrop/core.hpp"

namespace teardrop {

enum class Parity { Even, Odd };

class PotentialWell {
 public:
  /// Line domain when period is empty; otherwise requires period > 2 half_width.
  PotentialWell(double half_width, double height, std::optional<double> period = std::nullopt);

  double half_width() const noexcept { return t1_; }
  double height() const noexcept { return m_; }
  const std::optional<double>& period() const noexcept { return period_; }

 private:
  double t1_;
  double m_;
  std::optional<double> period_;
};

struct SpectrumResult {
  std::vector<double> eigenvalues;  // ascending, inside (0, M)
  std::vector<Parity> parities;
  std::vector<double> grid;         // shared sample instants
  std::vector<std::vector<double>> eigenfunctions;  // unit L2 norm
};

SpectrumResult bound_states_line(const PotentialWell& well, std::size_t n_samples = 2001);

enum class Boundary { Periodic, Antiperiodic };

/// Eigenvalues in (0, M) for which the monodromy over [-T/2, T/2] has trace 2
/// (periodic) or -2 (antiperiodic).
SpectrumResult periodic_spectrum(const PotentialWell& well, std::size_t n_samples = 2001,
                                 Boundary boundary = Boundary::Periodic);

/// Monodromy over one cell [-T/2, T/2] at energy E.
PropagatorMatrix well_monodromy(const PotentialWell& well, double energy);

struct GroundStateReport {
  double switch_time = 0.0;
  double well_height = 0.0;
  double ground_energy = 0.0;
  double energy_error = 0.0;     // |E0 - u_max|
  double correlation = 0.0;      // cosine similarity of samples
  double max_discrepancy = 0.0;  // after least-squares scaling of x
  std::size_t eigenvalue_count = 0;
};

GroundStateReport ground_state_correspondence(const ProblemParams& params, double period,
                                              std::size_t n_samples = 2001);

struct LineTailReport {
  double ground_energy = 0.0;
  double energy_error = 0.0;
  double fitted_decay = 0.0;    // slope of -log|psi0| on the tail window
  double expected_decay = 0.0;  // omega_min
  double relative_error = 0.0;
};

/// Ground state of the line well with t1 = t1_infinity; fits the tail on
/// [t1, t1 + 10/omega_min].
LineTailReport line_ground_state_tail(const ProblemParams& params);

/// Composite Simpson rule on uniform samples (odd count).
double simpson(const std::vector<double>& values, double spacing);

}  // namespace teardrop
