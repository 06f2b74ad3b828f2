#ifndef IONCAT_H
#define IONCAT_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum IoncatStatus {
  IONCAT_STATUS_OK = 0,
  IONCAT_STATUS_NULL_POINTER = 1,
  IONCAT_STATUS_INVALID_ARGUMENT = 2,
  IONCAT_STATUS_CONFIG_ERROR = 3,
  IONCAT_STATUS_NUMERIC_FAILURE = 4,
  IONCAT_STATUS_IO_ERROR = 5,
  IONCAT_STATUS_INTERNAL = 6,
  IONCAT_STATUS_PANIC = 7,
} IoncatStatus;

typedef enum IoncatLevel {
  IONCAT_LEVEL_GROUND = 0,
  IONCAT_LEVEL_EXCITED = 1,
} IoncatLevel;

typedef enum IoncatDirection {
  IONCAT_DIRECTION_PLUS_X = 0,
  IONCAT_DIRECTION_MINUS_X = 1,
} IoncatDirection;

typedef enum IoncatBackend {
  IONCAT_BACKEND_ANALYTIC = 0,
  IONCAT_BACKEND_NUMERIC = 1,
} IoncatBackend;

/**
 * Result of a protocol run.
 */
typedef struct IoncatReport IoncatReport;

/**
 * Superposition of coherent states of one motional mode.
 */
typedef struct IoncatState IoncatState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *ioncat_version(void);

/**
 * Message of the last failed call on this thread; empty if none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *ioncat_last_error_message(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not have been freed, or be null.
 */
void ioncat_string_free(char *s);

/**
 * ⟨α|β⟩ for two coherent states.
 *
 * # Safety
 * `out_re` and `out_im` must be valid for writes.
 */
enum IoncatStatus ioncat_coherent_overlap(double alpha_re,
                                          double alpha_im,
                                          double beta_re,
                                          double beta_im,
                                          double *out_re,
                                          double *out_im);

/**
 * Coherent state |level⟩|α⟩.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum IoncatStatus ioncat_coherent_state_new(enum IoncatLevel internal,
                                            double alpha_re,
                                            double alpha_im,
                                            struct IoncatState **out);

/**
 * Normalized cat K(|α⟩ + |−α⟩)|level⟩.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum IoncatStatus ioncat_cat_state_new(enum IoncatLevel internal,
                                       double alpha_re,
                                       double alpha_im,
                                       struct IoncatState **out);

/**
 * # Safety
 * `state` must come from this library and not have been freed, or be null.
 */
void ioncat_state_free(struct IoncatState *state);

/**
 * Applies a strong-excitation pulse of the given area in place.
 *
 * # Safety
 * `state` must be a live handle from this library.
 */
enum IoncatStatus ioncat_state_pulse(struct IoncatState *state,
                                     double area,
                                     enum IoncatDirection direction,
                                     double eta);

/**
 * Free evolution for time `t` in units of 1/ν, in place.
 *
 * # Safety
 * `state` must be a live handle from this library.
 */
enum IoncatStatus ioncat_state_wait(struct IoncatState *state, double t);

/**
 * Ground and excited populations of a state.
 *
 * # Safety
 * `state` must be a live handle; `out_g` and `out_e` valid for writes.
 */
enum IoncatStatus ioncat_state_probabilities(const struct IoncatState *state,
                                             double *out_g,
                                             double *out_e);

/**
 * ⟨state|state⟩.
 *
 * # Safety
 * `state` must be a live handle; `out` valid for writes.
 */
enum IoncatStatus ioncat_state_norm_sqr(const struct IoncatState *state, double *out);

/**
 * Pulse-train cat preparation with `n` intermediate pulse pairs. A zero
 * `cutoff` picks the Fock truncation automatically; it is ignored by the
 * analytic backend.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum IoncatStatus ioncat_run_cat_pulses(enum IoncatBackend backend,
                                        double eta,
                                        double omega_ratio,
                                        uint32_t n,
                                        uint32_t cutoff,
                                        struct IoncatReport **out);

/**
 * Purity probe on the cat (`mixture` false) or the matching mixture.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum IoncatStatus ioncat_run_purity(enum IoncatBackend backend,
                                    double eta,
                                    double omega_ratio,
                                    bool mixture,
                                    uint32_t cutoff,
                                    struct IoncatReport **out);

/**
 * Interferometer phase scan over `count` rotation angles.
 *
 * # Safety
 * `alphas` must point to `count` readable doubles; `out` valid for writes.
 */
enum IoncatStatus ioncat_run_ramsey(enum IoncatBackend backend,
                                    double eta,
                                    double omega_ratio,
                                    uint32_t n,
                                    const double *alphas,
                                    size_t count,
                                    uint32_t cutoff,
                                    struct IoncatReport **out);

/**
 * # Safety
 * `report` must come from this library and not have been freed, or be null.
 */
void ioncat_report_free(struct IoncatReport *report);

/**
 * Outcome probability `"g"` or `"e"`.
 *
 * # Safety
 * `report` must be a live handle, `key` a NUL-terminated string and `out`
 * valid for writes.
 */
enum IoncatStatus ioncat_report_probability(const struct IoncatReport *report,
                                            const char *key,
                                            double *out);

/**
 * Named diagnostic such as `"target_fidelity"` or `"visibility"`.
 *
 * # Safety
 * As for [`ioncat_report_probability`].
 */
enum IoncatStatus ioncat_report_diagnostic(const struct IoncatReport *report,
                                           const char *key,
                                           double *out);

/**
 * Named flag such as `"four_peaks"`.
 *
 * # Safety
 * As for [`ioncat_report_probability`].
 */
enum IoncatStatus ioncat_report_flag(const struct IoncatReport *report, const char *key, bool *out);

/**
 * Copies up to `capacity` scan points into `values` and `results` and
 * writes the number of points to `out_len`. Call with `capacity` 0 to
 * query the length.
 *
 * # Safety
 * `values` and `results` must have room for `capacity` doubles.
 */
enum IoncatStatus ioncat_report_scan(const struct IoncatReport *report,
                                     double *values,
                                     double *results,
                                     size_t capacity,
                                     size_t *out_len);

/**
 * The report as JSON; release with [`ioncat_string_free`].
 *
 * # Safety
 * `report` must be a live handle; `out` valid for writes.
 */
enum IoncatStatus ioncat_report_to_json(const struct IoncatReport *report, char **out);

/**
 * Runs a JSON experiment config exactly as the command-line tool does,
 * writing files to its output directory. The run manifest is returned as
 * JSON; release it with [`ioncat_string_free`].
 *
 * # Safety
 * `config` must be a NUL-terminated string; `out_manifest` valid for writes.
 */
enum IoncatStatus ioncat_run_config_json(const char *config, char **out_manifest);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IONCAT_H */
