#ifndef PHOTON_GAUGE_H
#define PHOTON_GAUGE_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum PgStatus {
  PG_STATUS_OK = 0,
  PG_STATUS_NULL_POINTER = 1,
  PG_STATUS_INVALID_ARGUMENT = 2,
  PG_STATUS_NOT_RESONANT = 3,
  PG_STATUS_NUMERICAL = 4,
  PG_STATUS_BUFFER_TOO_SMALL = 5,
  PG_STATUS_PANIC = 6,
} PgStatus;

/**
 * Values for the `waveform` argument of [`pg_drive_new`].
 */
typedef enum PgWaveform {
  PG_WAVEFORM_SINUSOIDAL = 0,
  PG_WAVEFORM_DELTA_KICKS = 1,
} PgWaveform;

/**
 * Values for `method` arguments.
 */
typedef enum PgHoppingMethod {
  PG_HOPPING_METHOD_CLOSED_FORM = 0,
  PG_HOPPING_METHOD_QUADRATURE = 1,
} PgHoppingMethod;

/**
 * Opaque drive handle.
 */
typedef struct PgDrive PgDrive;

/**
 * Opaque field handle.
 */
typedef struct PgField PgField;

/**
 * Opaque trajectory handle.
 */
typedef struct PgTrajectory PgTrajectory;

/**
 * Effective hoppings; `quadrature_discrepancy` is 0 for closed forms.
 */
typedef struct PgHoppings {
  double kappa_x_re;
  double kappa_x_im;
  double kappa_y_re;
  double kappa_y_im;
  double alpha;
  double quadrature_discrepancy;
} PgHoppings;

typedef struct PgDiagnostics {
  double norm_drift;
  double norm_drift_budget;
  double max_edge_mass;
  /**
   * Nonzero when the edge mass exceeded its tolerance.
   */
  uint8_t truncation_warning;
  size_t steps;
} PgDiagnostics;

typedef struct PgBand {
  double e_min;
  double e_max;
  /**
   * Nonzero when the band touches the next one up.
   */
  uint8_t touches_next;
} PgBand;

/**
 * Fabrication numbers; units as in `photon_gauge::units::PhysicalParams`.
 */
typedef struct PgPhysicalParams {
  double omega;
  double gradient;
  double radius_cm;
  double lambda_mod_mm;
  double amplitude;
  double delta_n;
  double length_cm;
} PgPhysicalParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next `pg_*` call on the same thread.
 */
const char *pg_last_error(void);

/**
 * Library version as a static nul-terminated string.
 */
const char *pg_version(void);

/**
 * Creates a drive with `β_{n,m}(t) = beta0 + gradient·m + amplitude·H(ωt + nσ + mρ)`;
 * `waveform` is a [`PgWaveform`] value.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum PgStatus pg_drive_new(double beta0,
                           double gradient,
                           double omega,
                           double amplitude,
                           int64_t order,
                           double sigma,
                           double rho,
                           uint32_t waveform,
                           struct PgDrive **out);

/**
 * Creates a drive with a sampled waveform given by `len` nodes `(xs[i], hs[i])`
 * on `[0, 2π]`. With `center` nonzero the sample mean is removed first.
 *
 * # Safety
 * `xs` and `hs` must point to `len` values; `out` must be valid for writes.
 */
enum PgStatus pg_drive_new_sampled(double beta0,
                                   double gradient,
                                   double omega,
                                   double amplitude,
                                   int64_t order,
                                   double sigma,
                                   double rho,
                                   const double *xs,
                                   const double *hs,
                                   size_t len,
                                   uint8_t center,
                                   struct PgDrive **out);

/**
 * # Safety
 * `drive` must come from `pg_drive_new*` and not be used afterwards.
 */
void pg_drive_free(struct PgDrive *drive);

/**
 * Effective hoppings of a resonant drive.
 *
 * # Safety
 * `drive` must be a live handle; `out` must be valid for writes.
 */
enum PgStatus pg_hoppings(const struct PgDrive *drive,
                          double jx,
                          double jy,
                          uint32_t method,
                          struct PgHoppings *out);

/**
 * Normalized Gaussian beam `exp[-(n²+m²)/w² - i·tilt·n]` on the window
 * `[n_min, n_max] × [m_min, m_max]`, times the static imprint of `drive`
 * when `imprint` is nonzero.
 *
 * # Safety
 * `drive` must be a live handle; `out` must be valid for writes.
 */
enum PgStatus pg_field_gaussian(int64_t n_min,
                                int64_t n_max,
                                int64_t m_min,
                                int64_t m_max,
                                double width,
                                double tilt,
                                const struct PgDrive *drive,
                                uint8_t imprint,
                                struct PgField **out);

/**
 * # Safety
 * `field` must come from `pg_field_gaussian` and not be used afterwards.
 */
void pg_field_free(struct PgField *field);

/**
 * Window dimensions: `nx` columns (n) and `ny` rows (m).
 *
 * # Safety
 * `field` must be a live handle; `nx` and `ny` must be valid for writes.
 */
enum PgStatus pg_field_dims(const struct PgField *field, size_t *nx, size_t *ny);

/**
 * Interleaved real and imaginary parts, row-major with rows indexed by
 * `m`; `len` counts doubles and must be at least `2·nx·ny`.
 *
 * # Safety
 * `field` must be a live handle; `out` must point to `len` doubles.
 */
enum PgStatus pg_field_amplitudes(const struct PgField *field, double *out, size_t len);

/**
 * Exact driven evolution of `field`, sampled at `n_times` increasing times.
 *
 * # Safety
 * Handles must be live; `times` must point to `n_times` doubles; `out` must
 * be valid for writes.
 */
enum PgStatus pg_evolve_full(const struct PgField *field,
                             const struct PgDrive *drive,
                             double jx,
                             double jy,
                             const double *times,
                             size_t n_times,
                             struct PgTrajectory **out);

/**
 * Effective-model evolution of the lab-frame `field`. The field is mapped
 * into the effective frame at `t = 0`; samples stay in that frame.
 *
 * # Safety
 * As for [`pg_evolve_full`].
 */
enum PgStatus pg_evolve_effective(const struct PgField *field,
                                  const struct PgDrive *drive,
                                  double jx,
                                  double jy,
                                  uint32_t method,
                                  const double *times,
                                  size_t n_times,
                                  struct PgTrajectory **out);

/**
 * # Safety
 * `traj` must come from a `pg_evolve_*` call and not be used afterwards.
 */
void pg_trajectory_free(struct PgTrajectory *traj);

/**
 * Number of samples, or 0 for a null handle.
 *
 * # Safety
 * `traj` must be null or a live handle.
 */
size_t pg_trajectory_len(const struct PgTrajectory *traj);

/**
 * # Safety
 * `traj` must be a live handle; `out` must be valid for writes.
 */
enum PgStatus pg_trajectory_diagnostics(const struct PgTrajectory *traj, struct PgDiagnostics *out);

/**
 * `|c|` at sample `index`, row-major with rows indexed by `m`.
 *
 * # Safety
 * `traj` must be a live handle; `out` must point to `len` doubles.
 */
enum PgStatus pg_trajectory_moduli(const struct PgTrajectory *traj,
                                   size_t index,
                                   double *out,
                                   size_t len);

/**
 * Centre of mass per sample as interleaved `(x, y)`; `len` counts doubles.
 *
 * # Safety
 * `traj` must be a live handle; `out` must point to `len` doubles.
 */
enum PgStatus pg_trajectory_com(const struct PgTrajectory *traj, double *out, size_t len);

/**
 * Fringe visibility per sample over the central half of the columns, and
 * the revival period (NaN when none is detected).
 *
 * # Safety
 * `traj` must be a live handle; `out` must point to `len` doubles and
 * `revival` must be valid for writes.
 */
enum PgStatus pg_trajectory_visibility(const struct PgTrajectory *traj,
                                       double *out,
                                       size_t len,
                                       double *revival);

/**
 * Per-sample `max |c| - |f|` and infidelity between an exact and an
 * effective trajectory sampled at the same whole drive periods.
 *
 * # Safety
 * Handles must be live; `max_abs` and `infidelity` must point to `len` doubles.
 */
enum PgStatus pg_model_deviation(const struct PgTrajectory *full,
                                 const struct PgTrajectory *effective,
                                 const struct PgDrive *drive,
                                 double *max_abs,
                                 double *infidelity,
                                 size_t len);

/**
 * Magnetic bands at flux `p/q` for hoppings `κ_x`, `κ_y`. Writes up to
 * `capacity` bands and the total count to `count`; a short buffer returns
 * `BufferTooSmall` with `count` still set.
 *
 * # Safety
 * `out` must point to `capacity` bands; `count` must be valid for writes.
 */
enum PgStatus pg_harper_bands(double kappa_x_re,
                              double kappa_x_im,
                              double kappa_y_re,
                              double kappa_y_im,
                              int64_t p,
                              int64_t q,
                              size_t k_grid,
                              struct PgBand *out,
                              size_t capacity,
                              size_t *count);

/**
 * Fabrication numbers for hopping rate `j` (1/cm), `Γ`, `ω/J`, order `M`,
 * spacing `d` (m), wavelength `lambda` (m) and substrate index `n_s`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum PgStatus pg_physical_units(double j,
                                double gamma,
                                double omega_over_j,
                                int64_t order,
                                double d,
                                double lambda,
                                double n_s,
                                struct PgPhysicalParams *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PHOTON_GAUGE_H */
