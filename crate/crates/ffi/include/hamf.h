#ifndef HAMF_H
#define HAMF_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum HamfStatus {
  HAMF_STATUS_OK = 0,
  // Argument outside the domain of the operation.
  HAMF_STATUS_DOMAIN = 1,
  // A series needed more terms than the configured cap.
  HAMF_STATUS_TERM_CAP = 2,
  HAMF_STATUS_NUMERICAL = 3,
  // Coefficients violate their declared decay bound.
  HAMF_STATUS_DECAY_VIOLATION = 4,
  HAMF_STATUS_PARSE = 5,
  HAMF_STATUS_IO = 6,
  HAMF_STATUS_NULL_POINTER = 7,
  // Internal panic; the library state is unaffected but the call produced nothing.
  HAMF_STATUS_PANIC = 8,
} HamfStatus;

// Abscissa sampler for [`hamf_samples_new`].
typedef enum HamfSampler {
  HAMF_SAMPLER_IID_UNIFORM = 0,
  HAMF_SAMPLER_STRATIFIED_GRID = 1,
} HamfSampler;

// Opaque set of horocycle samples `y^{1/4} ξ(x+iy)`.
typedef struct HamfSamples HamfSamples;

// Opaque coefficient sequence `ĥ_k`.
typedef struct HamfSequence HamfSequence;

typedef struct HamfComplex {
  double re;
  double im;
} HamfComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *hamf_version(void);

// Copy the last error message of this thread into `buf` (NUL-terminated,
// truncated to `len - 1` bytes). Returns the full message length in bytes.
//
// # Safety
// `buf` must be null or valid for `len` bytes.
size_t hamf_last_error_message(char *buf, size_t len);

// Residue symbol `(a/b)` for odd `b`, written as -1, 0 or 1.
//
// # Safety
// `out` must be valid for writes.
enum HamfStatus hamf_qr_symbol(int64_t a, int64_t b, int32_t *out);

// Theta multiplier `j_γ(z)` for `γ = [[a, b], [c, d]]` in `Γ₁(4)`.
//
// # Safety
// `out` must be valid for writes.
enum HamfStatus hamf_j_factor(int64_t a,
                              int64_t b,
                              int64_t c,
                              int64_t d,
                              double x,
                              double y,
                              struct HamfComplex *out);

// `θ(k z)` at `z = x + iy`.
//
// # Safety
// `out` must be valid for writes.
enum HamfStatus hamf_theta(uint64_t k, double x, double y, double abs_tol, struct HamfComplex *out);

// Built-in coefficient sequence: `"log-squares"`, `"theta-only"` or `"zero"`.
//
// # Safety
// `name` must be a NUL-terminated string; `out` must be valid for writes.
enum HamfStatus hamf_sequence_preset(const char *name, struct HamfSequence **out);

// Finitely supported sequence with `ĥ_k = values[k - 1]` for `1 <= k <= len`,
// certified by `|ĥ_k| <= decay_c · k^(-decay_beta)`.
//
// # Safety
// `values` must be valid for `len` reads; `out` must be valid for writes.
enum HamfStatus hamf_sequence_from_table(const struct HamfComplex *values,
                                         size_t len,
                                         double decay_c,
                                         double decay_beta,
                                         struct HamfSequence **out);

// # Safety
// `seq` must be null or a handle from this library that has not been freed.
void hamf_sequence_free(struct HamfSequence *seq);

// `ξ(z) = Σ_n h(n² z)` at `z = x + iy`.
//
// # Safety
// `seq` must be a live handle; `out` must be valid for writes.
enum HamfStatus hamf_xi_eval(const struct HamfSequence *seq,
                             double x,
                             double y,
                             double abs_tol,
                             struct HamfComplex *out);

// Fourier coefficients `ξ̂_m` for `0 <= m <= m_max`; `out_len` must be at least `m_max + 1`.
//
// # Safety
// `seq` must be a live handle; `out` must be valid for `out_len` writes.
enum HamfStatus hamf_xi_coeffs(const struct HamfSequence *seq,
                               uint64_t m_max,
                               struct HamfComplex *out,
                               size_t out_len);

// `M^{-1/2} Σ_{m<=M} |ξ̂_m − ξ̂^{(K)}_m|²`.
//
// # Safety
// `seq` must be a live handle; `out` must be valid for writes.
enum HamfStatus hamf_approx_error(const struct HamfSequence *seq,
                                  uint64_t k,
                                  uint64_t m,
                                  double *out);

// Leading-order limit of [`hamf_approx_error`] as `M → ∞`.
//
// # Safety
// `seq` must be a live handle; `out` must be valid for writes.
enum HamfStatus hamf_tail_bound(const struct HamfSequence *seq, uint64_t k, double *out);

// Truncated variance constant `A` and a bound on the truncation error.
//
// # Safety
// `seq` must be a live handle; `out_a` and `out_tail` must be valid for writes.
enum HamfStatus hamf_variance_a(const struct HamfSequence *seq,
                                uint64_t r_max,
                                uint64_t pq_cap,
                                struct HamfComplex *out_a,
                                double *out_tail);

// Draw `n` samples of `y^{1/4} ξ(x + iy)`, `0 < y <= 0.1`.
//
// # Safety
// `seq` must be a live handle; `out` must be valid for writes.
enum HamfStatus hamf_samples_new(const struct HamfSequence *seq,
                                 double y,
                                 size_t n,
                                 uint64_t seed,
                                 enum HamfSampler sampler,
                                 double abs_tol,
                                 struct HamfSamples **out);

// Number of samples; 0 for a null handle.
//
// # Safety
// `s` must be null or a live handle.
size_t hamf_samples_len(const struct HamfSamples *s);

// Abscissa and value of sample `i`.
//
// # Safety
// `s` must be a live handle; `x` and `w` must be valid for writes.
enum HamfStatus hamf_samples_get(const struct HamfSamples *s,
                                 size_t i,
                                 double *x,
                                 struct HamfComplex *w);

// Empirical `E|w|²`.
//
// # Safety
// `s` must be a live handle; `out` must be valid for writes.
enum HamfStatus hamf_samples_mean_abs2(const struct HamfSamples *s, double *out);

// # Safety
// `s` must be null or a handle from this library that has not been freed.
void hamf_samples_free(struct HamfSamples *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HAMF_H */
