#ifndef RIS_HARMONICS_H
#define RIS_HARMONICS_H

/* Generated by cbindgen from crates/ffi. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RisStatus {
  RIS_STATUS_OK = 0,
  RIS_STATUS_NULL_POINTER = 1,
  RIS_STATUS_INVALID_INPUT = 2,
  RIS_STATUS_SINGULAR = 3,
  RIS_STATUS_DIMENSION = 4,
  RIS_STATUS_UNSUPPORTED = 5,
  RIS_STATUS_BUFFER_TOO_SMALL = 6,
  RIS_STATUS_UNDEFINED = 7,
  RIS_STATUS_PANIC = 99,
} RisStatus;

/**
 * Opaque scattering model handle.
 */
typedef struct RisModel RisModel;

typedef struct RisComplex {
  double re;
  double im;
} RisComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or NULL.
 */
const char *ris_last_error(void);

enum RisStatus ris_reflection_coefficient(struct RisComplex z_load,
                                          struct RisComplex z_antenna,
                                          struct RisComplex *out);

/**
 * Fourier coefficient `c_m` of a two-state square wave.
 */
enum RisStatus ris_fourier_coefficient(struct RisComplex gamma_on,
                                       struct RisComplex gamma_off,
                                       double f0_hz,
                                       double tau_s,
                                       double pulse_width_s,
                                       int32_t m,
                                       struct RisComplex *out);

/**
 * Create a model. `element_exponent <= 0` selects isotropic elements.
 */
enum RisStatus ris_model_new(size_t rows,
                             size_t cols,
                             double dx_over_lambda,
                             double dy_over_lambda,
                             double carrier_hz,
                             struct RisComplex gamma_on,
                             struct RisComplex gamma_off,
                             double f0_hz,
                             double duty,
                             double element_exponent,
                             struct RisModel **out);

/**
 * The 1×4 half-wavelength reference device at 2.45 GHz with its tabulated
 * loads, 313 Hz control and the fitted cosine-power element.
 */
struct RisModel *ris_model_new_reference(void);

void ris_model_free(struct RisModel *model);

/**
 * Number of elements, or 0 for a null handle.
 */
size_t ris_model_element_count(const struct RisModel *model);

/**
 * `F_m` at azimuth `azimuth_deg` in the `θ = 90°` cut.
 */
enum RisStatus ris_harmonic_field(const struct RisModel *model,
                                  const double *phases_deg,
                                  size_t len,
                                  int32_t m,
                                  double azimuth_deg,
                                  struct RisComplex *out);

/**
 * `|F_m|` on the uniform azimuth grid. Writes `360/step` magnitudes; on
 * `RIS_STATUS_BUFFER_TOO_SMALL` `*out_len` holds the required length.
 */
enum RisStatus ris_pattern_sweep(const struct RisModel *model,
                                 const double *phases_deg,
                                 size_t len,
                                 int32_t m,
                                 double grid_step_deg,
                                 bool normalize,
                                 double *out_magnitudes,
                                 size_t capacity,
                                 size_t *out_len);

/**
 * Closed-form progressive-phase profile for a single-row model.
 */
enum RisStatus ris_progressive_profile(const struct RisModel *model,
                                       double target_azimuth_deg,
                                       int32_t m,
                                       double resolution_deg,
                                       double *out_phases,
                                       size_t capacity);

/**
 * Coordinate-ascent profile; `*out_magnitude` receives the achieved `|F_m|`.
 */
enum RisStatus ris_search_profile(const struct RisModel *model,
                                  double target_azimuth_deg,
                                  int32_t m,
                                  double resolution_deg,
                                  size_t pinned_element,
                                  double *out_phases,
                                  size_t capacity,
                                  double *out_magnitude);

/**
 * Rise and fall ticks of each channel's 50% duty schedule. Both output
 * arrays must hold `len` entries.
 */
enum RisStatus ris_schedule_ticks(const double *phases_deg,
                                  size_t len,
                                  double f0_hz,
                                  uint32_t ticks_per_period,
                                  uint32_t *out_rise,
                                  uint32_t *out_fall);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RIS_HARMONICS_H */
