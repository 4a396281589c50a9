#ifndef HAMBURGER_H
#define HAMBURGER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  HB_STATUS_OK = 0,
  /**
   * A required pointer argument was NULL.
   */
  HB_STATUS_NULL_POINTER = 1,
  /**
   * Invalid input: malformed data, wrong shapes, unsolvable moments.
   */
  HB_STATUS_VALIDATION = 2,
  /**
   * A linear system was too ill-conditioned to solve reliably.
   */
  HB_STATUS_NUMERICAL = 3,
  /**
   * The evaluation point is outside the admissible region.
   */
  HB_STATUS_DOMAIN = 4,
  /**
   * An internal panic was caught at the boundary.
   */
  HB_STATUS_PANIC = 5,
} HbStatus;

/**
 * Gram-space model built from a moment sequence.
 */
typedef struct HbModel HbModel;

/**
 * Validated moment sequence.
 */
typedef struct HbMoments HbMoments;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty if none. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *hb_last_error_message(void);

/**
 * Builds a moment sequence from `count` matrices of size `dim x dim` stored
 * consecutively in `data` (`2 * count * dim * dim` doubles). `count` must be
 * odd and at least 3.
 *
 * # Safety
 * `data` must be readable for the stated length and `out` writable.
 */
HbStatus hb_moments_new(size_t dim,
                        size_t count,
                        const double *data,
                        double tol_herm,
                        HbMoments **out);

/**
 * Parses the JSON moment-file format used by the command line tool.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` writable.
 */
HbStatus hb_moments_from_json(const char *json, double tol_herm, HbMoments **out);

/**
 * Releases a handle from `hb_moments_new`/`hb_moments_from_json`. NULL is ignored.
 *
 * # Safety
 * `m` must be NULL or a live handle not freed before.
 */
void hb_moments_free(HbMoments *m);

/**
 * Matrix size `d` of the moments.
 *
 * # Safety
 * `m` must be a live handle and `out_dim` writable.
 */
HbStatus hb_moments_dim(const HbMoments *m, size_t *out_dim);

/**
 * Positivity test of the block Hankel matrix. Any of the output pointers
 * may be NULL.
 *
 * # Safety
 * `m` must be a live handle; non-NULL outputs must be writable.
 */
HbStatus hb_check_solvability(const HbMoments *m,
                              double tol_psd,
                              double tol_rank,
                              bool *out_solvable,
                              double *out_min_eigenvalue,
                              size_t *out_rank);

/**
 * Builds the Gram space, shift operator and Cayley data.
 *
 * # Safety
 * `m` must be a live handle and `out` writable.
 */
HbStatus hb_model_build(const HbMoments *m, double tol_psd, double tol_rank, HbModel **out);

/**
 * # Safety
 * `model` must be NULL or a live handle not freed before.
 */
void hb_model_free(HbModel *model);

/**
 * Matrix size `d`, Gram-space dimension and defect numbers. Any output may
 * be NULL.
 *
 * # Safety
 * `model` must be a live handle; non-NULL outputs must be writable.
 */
HbStatus hb_model_info(const HbModel *model,
                       size_t *out_dim,
                       size_t *out_rank,
                       size_t *out_defect_plus,
                       size_t *out_defect_minus);

/**
 * `R(z)` for the constant parameter `phi`, a `defect_minus x defect_plus`
 * contraction in interleaved row-major form, or NULL for the zero
 * parameter. Writes `2 * d * d` doubles to `out`.
 *
 * # Safety
 * `model` must be a live handle; `phi` NULL or readable for its shape;
 * `out` writable for `2 * d * d` doubles.
 */
HbStatus hb_model_evaluate(const HbModel *model,
                           const double *phi,
                           double z_re,
                           double z_im,
                           double *out);

/**
 * `R(z)` for the unitary parameter `e^{iθ} E` (equal defect numbers only).
 *
 * # Safety
 * `model` must be a live handle and `out` writable for `2 * d * d` doubles.
 */
HbStatus hb_model_evaluate_unitary(const HbModel *model,
                                   double theta,
                                   double z_re,
                                   double z_im,
                                   double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HAMBURGER_H */
