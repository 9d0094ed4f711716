/*
 * teardrop: periodic optimal control of x' = y, y' = -u x with
 * u_min <= u <= u_max, minimizing the integral of u over one period.
 *
 * C interface. Every fallible call returns a td_status; on failure a
 * human-readable message is available from td_last_error() on the same
 * thread until the next call that fails. Objects returned through
 * `td_xxx **out` are owned by the caller and released with td_xxx_free.
 */
#ifndef TEARDROP_TEARDROP_H
#define TEARDROP_TEARDROP_H

#include <stddef.h>
#include <stdint.h>

#if defined(TEARDROP_BUILD_SHARED)
#define TD_API __attribute__((visibility("default")))
#else
#define TD_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum td_status {
  TD_OK = 0,
  TD_ERR_INVALID_ARGUMENT = 1,
  TD_ERR_DOMAIN = 2,
  TD_ERR_NO_SOLUTION = 3,
  TD_ERR_DIVERGENCE = 4,
  TD_ERR_INTERNAL = 5
} td_status;

TD_API const char* td_version(void);
TD_API const char* td_last_error(void);
TD_API const char* td_status_name(td_status status);

typedef struct td_params {
  double u_min;
  double u_max;
} td_params;

/* ---- closed-form optimum ------------------------------------------------ */

typedef struct td_turnpike {
  double t1_infinity;
  double corner_x;
  double corner_y;
  double midpoint_prefactor;
} td_turnpike;

TD_API td_status td_switch_time_limit(td_params params, double* out);
TD_API td_status td_period_from_switch(td_params params, double t1, double* out);
TD_API td_status td_switch_from_period(td_params params, double period, double* out);
TD_API td_status td_optimal_cost(td_params params, double t1, double* out);
TD_API td_status td_optimal_state(td_params params, double period, double t, double* x, double* y);
TD_API td_status td_turnpike_limits(td_params params, td_turnpike* out);

/* ---- sampled trajectories ----------------------------------------------- */

typedef struct td_trajectory td_trajectory;

/* Costate fields are NaN for trajectories without an extremal lift. */
typedef struct td_sample {
  double t, x, y, u;
  double px, py, phi, hamiltonian;
} td_sample;

typedef struct td_trajectory_info {
  double switch_time;  /* first switching instant, NaN if none */
  double period;
  double lambda;       /* shooting parameter, NaN if not applicable */
  double cost;
  double hyperbole_constant; /* NaN unless closed-form */
  double residual_x;   /* x(T) - x(0) */
  double residual_y;   /* y(T) */
  size_t switch_count;
  int has_lift;
} td_trajectory_info;

/* Closed-form optimum lifted to its extremal (p0 = -1). */
TD_API td_status td_solve(td_params params, double period, size_t samples, td_trajectory** out);
/* Shooting on the teardrop branch, lifted. */
TD_API td_status td_shoot(td_params params, double period, size_t samples, td_trajectory** out);
/* Single-loop butterfly extremal; requires T >= 2 pi / omega_max. */
TD_API td_status td_butterfly(td_params params, double period, size_t samples, td_trajectory** out);
/* Negative-cost loop through (beta, 0). */
TD_API td_status td_negative_loop(td_params params, double duration, double beta, size_t samples,
                                  td_trajectory** out);

TD_API size_t td_trajectory_size(const td_trajectory* traj);
TD_API td_status td_trajectory_sample(const td_trajectory* traj, size_t index, td_sample* out);
TD_API td_status td_trajectory_info_get(const td_trajectory* traj, td_trajectory_info* out);
/* Copies up to `capacity` switching instants; returns the total count in *count. */
TD_API td_status td_trajectory_switches(const td_trajectory* traj, double* times, size_t capacity, size_t* count);
TD_API void td_trajectory_free(td_trajectory* traj);

/* ---- oracles ------------------------------------------------------------ */

typedef struct td_enumeration {
  int found;
  double best_cost;
  double best_defect;
  double tolerance;
  double slack;
  double initial_level;
  size_t switch_count;
  double switch_times[4];
  size_t admissible;
  size_t candidates;
} td_enumeration;

/* tolerance <= 0 selects the default; require_crossing keeps only schedules crossing x = 0. */
TD_API td_status td_enumerate(td_params params, double period, size_t n_grid, size_t max_switches, double tolerance,
                              int require_crossing, td_enumeration* out);

typedef struct td_transcription td_transcription;

typedef struct td_transcription_info {
  size_t n_intervals;
  double penalty_weight;
  double objective;
  double cost;
  double defect;
  size_t iterations;
  int converged;
  size_t transition_cells;
  size_t switch_count;
} td_transcription_info;

/* initial may be NULL (seeded perturbation of u = 0); otherwise n_intervals values. */
TD_API td_status td_transcribe(td_params params, double period, size_t n_intervals, uint64_t seed,
                               const double* initial, size_t restarts, td_transcription** out);
TD_API td_status td_transcription_info_get(const td_transcription* tr, td_transcription_info* out);
TD_API td_status td_transcription_controls(const td_transcription* tr, double* out, size_t capacity);
TD_API td_status td_transcription_switches(const td_transcription* tr, double* times, size_t capacity, size_t* count);
TD_API const char* td_transcription_diagnostics(const td_transcription* tr);
TD_API void td_transcription_free(td_transcription* tr);

/* Objective and adjoint gradient of the transcription at `controls`. */
TD_API td_status td_transcription_gradient(td_params params, double period, size_t n_intervals, double penalty_weight,
                                           const double* controls, double* gradient, double* value);

/* ---- finite well spectra ------------------------------------------------ */

typedef struct td_spectrum td_spectrum;

TD_API td_status td_spectrum_line(double t1, double height, size_t samples, td_spectrum** out);
TD_API td_status td_spectrum_periodic(double t1, double height, double period, size_t samples, int antiperiodic,
                                      td_spectrum** out);
TD_API size_t td_spectrum_count(const td_spectrum* s);
TD_API double td_spectrum_eigenvalue(const td_spectrum* s, size_t n);
/* 0 = even, 1 = odd, -1 on bad index. */
TD_API int td_spectrum_parity(const td_spectrum* s, size_t n);
TD_API size_t td_spectrum_grid_size(const td_spectrum* s);
TD_API td_status td_spectrum_grid(const td_spectrum* s, double* out, size_t capacity);
TD_API td_status td_spectrum_eigenfunction(const td_spectrum* s, size_t n, double* out, size_t capacity);
TD_API void td_spectrum_free(td_spectrum* s);

typedef struct td_ground_state_report {
  double switch_time;
  double well_height;
  double ground_energy;
  double energy_error;
  double correlation;
  double max_discrepancy;
  size_t eigenvalue_count;
} td_ground_state_report;

TD_API td_status td_ground_state(td_params params, double period, td_ground_state_report* out);

/* ---- Floquet stability and the compass ---------------------------------- */

TD_API td_status td_stability_trace(td_params params, double t1, double period, double* out);

typedef struct td_grid td_grid;

TD_API td_status td_stability_map(td_params params, double t1_lo, double t1_hi, double T_lo, double T_hi,
                                  size_t n_t1, size_t n_T, td_grid** out);
TD_API size_t td_grid_t1_count(const td_grid* g);
TD_API size_t td_grid_T_count(const td_grid* g);
/* Cell (i, j) for t1 index i and T index j. `flags` bit 0 stable, 1 trace-2 boundary,
 * 2 trace+2 boundary, 3 saturated (2 t1 > T). */
TD_API td_status td_grid_cell(const td_grid* g, size_t i, size_t j, double* t1, double* period, double* trace,
                              unsigned* flags);
TD_API void td_grid_free(td_grid* g);

typedef struct td_compass {
  double damping_ratio;
  double moment_ratio;
  double earth_field;
  double coil_gain;
  double current_high;
} td_compass;

TD_API td_status td_compass_levels(td_compass cp, double* u_high, double* u_low);

typedef struct td_series td_series;

TD_API td_status td_simulate_compass(td_compass cp, double t1, double period, double theta0, double theta_dot0,
                                     double total_time, double step, td_series** out);
TD_API td_status td_simulate_linearized(double u_high, double u_low, double damping_ratio, double t1, double period,
                                        double phi0, double phi_dot0, double total_time, double step,
                                        td_series** out);
TD_API size_t td_series_size(const td_series* s);
TD_API td_status td_series_sample(const td_series* s, size_t index, double* t, double* theta, double* theta_dot);
/* Arrays of length `bins`; mean_square may be NULL. */
TD_API td_status td_series_variance(const td_series* s, double period, double center, size_t bins, double* phases,
                                    double* variance, double* mean_square, size_t* periods);
TD_API void td_series_free(td_series* s);

typedef struct td_variance_study {
  int bounded;
  double max_deviation;
  double first_period_peak;
  double last_period_peak;
  double correlation;
} td_variance_study;

TD_API td_status td_compass_variance_study(double u_high, double u_low, double damping_ratio, double t1,
                                           double period, size_t periods, double phi0, td_variance_study* out);

#ifdef __cplusplus
}
#endif

#endif /* TEARDROP_TEARDROP_H */
