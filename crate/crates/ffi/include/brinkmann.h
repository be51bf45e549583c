#ifndef BRINKMANN_H
#define BRINKMANN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BrkClassKind {
  BRK_CLASS_KIND_PLANE_WAVE = 0,
  BRK_CLASS_KIND_CAHEN_WALLACH = 1,
  BRK_CLASS_KIND_GENERAL_PP_WAVE = 2,
} BrkClassKind;

typedef enum BrkExitReason {
  BRK_EXIT_REASON_COMPLETED = 0,
  BRK_EXIT_REASON_LEFT_DOMAIN = 1,
  BRK_EXIT_REASON_BLOWUP = 2,
  BRK_EXIT_REASON_STEP_UNDERFLOW = 3,
} BrkExitReason;

typedef enum BrkStatus {
  BRK_STATUS_OK = 0,
  BRK_STATUS_NULL_POINTER = 1,
  BRK_STATUS_INVALID_UTF8 = 2,
  BRK_STATUS_PARSE = 3,
  BRK_STATUS_INVALID_INPUT = 4,
  BRK_STATUS_OUTSIDE_DOMAIN = 5,
  BRK_STATUS_NOT_RICCI_FLAT = 6,
  BRK_STATUS_NOT_HARMONIC = 7,
  BRK_STATUS_NO_WITNESS = 8,
  BRK_STATUS_SEARCH_EXHAUSTED = 9,
  BRK_STATUS_NON_AUTONOMOUS = 10,
  BRK_STATUS_BUFFER_TOO_SMALL = 11,
  BRK_STATUS_INTERNAL = 12,
  BRK_STATUS_PANIC = 13,
} BrkStatus;

typedef struct BrkCertificate BrkCertificate;

// Metric `2du(dv + H du + Ω_i dx^i) + dx² + dy²` with its check grid.
typedef struct BrkMetric BrkMetric;

// Result of the pp-wave normalization.
typedef struct BrkPpWave BrkPpWave;

// Headline numbers of a causality certificate.
typedef struct BrkCertificateSummary {
  uint32_t k0;
  double radius;
  double e0;
  double excursion_norm;
  double max_timelike_residual;
  double bound_slack;
  size_t sample_count;
} BrkCertificateSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version, a static NUL-terminated string.
const char *brk_version(void);

// Message of the last failed call on this thread, or NULL. Valid until the
// next call into the library on this thread.
const char *brk_last_error(void);

// Builds a metric with `γ = δ` on the box `domain[6] = {u0,u1,x0,x1,y0,y1}`.
//
// # Safety
// Strings must be NUL-terminated; `domain` must point to 6 doubles.
enum BrkStatus brk_metric_new(const char *h,
                              const char *omega1,
                              const char *omega2,
                              const double *domain6,
                              struct BrkMetric **out_metric);

// Builds a metric from the JSON config format of the command-line tool.
//
// # Safety
// `json` must be NUL-terminated.
enum BrkStatus brk_metric_from_json(const char *json, struct BrkMetric **out_metric);

// # Safety
// `m` must come from a `brk_metric_*` constructor, or be NULL.
void brk_metric_free(struct BrkMetric *m);

// `g_ab` at `point[4] = {u,v,x,y}` into `out[16]`.
//
// # Safety
// Pointers must be valid for the stated lengths.
enum BrkStatus brk_metric_components(const struct BrkMetric *m, const double *point, double *out16);

// `Γ^a_{bc}` at `point[4]` into `out[64]`, index `16a + 4b + c`.
//
// # Safety
// Pointers must be valid for the stated lengths.
enum BrkStatus brk_christoffel(const struct BrkMetric *m, const double *point, double *out64);

// `Ric_ab` at `point[4]` into `out[16]`.
//
// # Safety
// Pointers must be valid for the stated lengths.
enum BrkStatus brk_ricci(const struct BrkMetric *m, const double *point, double *out16);

// Ricci-flatness over the metric's check grid.
//
// # Safety
// Output pointers must be valid.
enum BrkStatus brk_is_ricci_flat(const struct BrkMetric *m, bool *out_flat, double *out_violation);

// Reduces a Ricci-flat metric with `γ = δ` to pp-wave form.
//
// # Safety
// `m` must be a valid handle and `out_pp` writable.
enum BrkStatus brk_normalize(const struct BrkMetric *m, struct BrkPpWave **out_pp);

// # Safety
// `pp` must come from `brk_normalize`, or be NULL.
void brk_pp_wave_free(struct BrkPpWave *pp);

// `α(u)`.
//
// # Safety
// `pp` must be a valid handle.
enum BrkStatus brk_pp_wave_alpha(const struct BrkPpWave *pp, double u, double *out_alpha);

// `(U, X, Y)` of the source point `(u, x, y)` into `out[3]`.
//
// # Safety
// `pp` must be a valid handle and `out3` hold 3 doubles.
enum BrkStatus brk_pp_wave_forward(const struct BrkPpWave *pp,
                                   double u,
                                   double x,
                                   double y,
                                   double *out3);

// pp-wave profile `H̃(U, X, Y)`.
//
// # Safety
// `pp` must be a valid handle.
enum BrkStatus brk_pp_wave_h_tilde(const struct BrkPpWave *pp,
                                   double uu,
                                   double xx,
                                   double yy,
                                   double *out_h);

// Classifies the pp-wave profile `h` on `domain[6]`. `out_eigen[2]` receives
// the eigenvalues for Cahen–Wallach spaces and NaN otherwise.
//
// # Safety
// `h` must be NUL-terminated and the pointers valid.
enum BrkStatus brk_classify(const char *h,
                            const double *domain6,
                            double tol,
                            enum BrkClassKind *out_kind,
                            double *out_eigen2);

// Integrates a geodesic to `s_max`. `out_state[9] = {s, u,v,x,y, u',v',x',y'}`
// is the last accepted state; `out_drift` the max change of `g(ẋ,ẋ)`.
//
// # Safety
// Pointers must be valid for the stated lengths.
enum BrkStatus brk_geodesic(const struct BrkMetric *m,
                            const double *x0,
                            const double *dx0,
                            double s_max,
                            double *out_state9,
                            enum BrkExitReason *out_exit,
                            double *out_drift);

// Builds a strong-causality violation certificate for the harmonic profile
// `hhat(x, y)`. Returns `BRK_STATUS_NO_WITNESS` when `-hhat` has no
// superquadratic witness in the search box (default half-width `4 r0`).
//
// # Safety
// `hhat` must be NUL-terminated and `out_cert` writable.
enum BrkStatus brk_certificate_new(const char *hhat,
                                   double alpha,
                                   double r0,
                                   double delta,
                                   uint32_t k_max,
                                   struct BrkCertificate **out_cert);

// # Safety
// `c` must come from `brk_certificate_new`, or be NULL.
void brk_certificate_free(struct BrkCertificate *c);

// # Safety
// `c` must be a valid handle and `out_summary` writable.
enum BrkStatus brk_certificate_summary(const struct BrkCertificate *c,
                                       struct BrkCertificateSummary *out_summary);

// Copies the curve samples as rows `{t, U, V, X, Y, g}` into `buf`, which
// must hold `6 * sample_count` doubles.
//
// # Safety
// `buf` must be valid for `len` doubles.
enum BrkStatus brk_certificate_samples(const struct BrkCertificate *c, double *buf, size_t len);

// The certificate as JSON, in the format of the command-line tool. Release
// with `brk_string_free`.
//
// # Safety
// `c` must be a valid handle and `out_json` writable.
enum BrkStatus brk_certificate_json(const struct BrkCertificate *c, char **out_json);

// # Safety
// `s` must come from this library, or be NULL.
void brk_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BRINKMANN_H */
