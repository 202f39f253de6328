#ifndef HOCRIP_H
#define HOCRIP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HocripStatus {
  HOCRIP_STATUS_OK = 0,
  HOCRIP_STATUS_NULL_POINTER = 1,
  HOCRIP_STATUS_DOMAIN = 2,
  HOCRIP_STATUS_INVALID = 3,
  HOCRIP_STATUS_PRECISION_INSUFFICIENT = 4,
  HOCRIP_STATUS_ILL_CONDITIONED = 5,
  HOCRIP_STATUS_CONFIG = 6,
  HOCRIP_STATUS_IO = 7,
  HOCRIP_STATUS_BUFFER_TOO_SMALL = 8,
  HOCRIP_STATUS_UTF8 = 9,
  HOCRIP_STATUS_PANIC = 10,
} HocripStatus;

/**
 * Matrix layout selector for [`hocrip_matrix_new`].
 */
typedef enum HocripToeplitz {
  HOCRIP_TOEPLITZ_LOWER_TRIANGULAR = 0,
  HOCRIP_TOEPLITZ_ZERO_PADDED_FAT = 1,
  HOCRIP_TOEPLITZ_STEADY_STATE = 2,
} HocripToeplitz;

/**
 * Implicit Toeplitz sensing matrix.
 */
typedef struct HocripMatrix HocripMatrix;

/**
 * Quadratic irrational `(a + b√d)/c`.
 */
typedef struct HocripQirr HocripQirr;

/**
 * Generated complex sequence.
 */
typedef struct HocripSequence HocripSequence;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *hocrip_version(void);

/**
 * Copies the calling thread's last error message into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length excluding the NUL, or
 * 0 when there is no error.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t hocrip_last_error(char *buf, size_t len);

/**
 * Parses a preset name (`golden`, `sqrt2`, …) or `a,b,c,d` for `(a+b√d)/c`.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out_q` must be writable.
 */
enum HocripStatus hocrip_qirr_parse(const char *text, struct HocripQirr **out_q);

/**
 * # Safety
 * `q` must be null or a handle from [`hocrip_qirr_parse`] not yet freed.
 */
void hocrip_qirr_free(struct HocripQirr *q);

/**
 * # Safety
 * `q` must be a live handle; `value` writable.
 */
enum HocripStatus hocrip_qirr_to_f64(const struct HocripQirr *q, double *value);

/**
 * Writes the partial quotients `a_0 … a_{len−1}` into `quotients`.
 *
 * # Safety
 * `q` must be a live handle; `quotients` valid for `len` writes.
 */
enum HocripStatus hocrip_cf_quotients(const struct HocripQirr *q, int64_t *quotients, size_t len);

/**
 * Ostrowski type of `m` with respect to `beta ∈ (0,1)`.
 *
 * # Safety
 * `beta` must be a live handle; `type_index` writable.
 */
enum HocripStatus hocrip_ostrowski_type(const struct HocripQirr *beta,
                                        uint64_t m,
                                        size_t *type_index);

/**
 * Generates a sequence from a descriptor such as `hoc3:golden`, `prbs`,
 * `sine:sqrt2:re`.
 *
 * # Safety
 * `descriptor` must be a NUL-terminated string; `out_seq` must be writable.
 */
enum HocripStatus hocrip_sequence_new(const char *descriptor,
                                      size_t length,
                                      struct HocripSequence **out_seq);

/**
 * # Safety
 * `s` must be null or a handle from [`hocrip_sequence_new`] not yet freed.
 */
void hocrip_sequence_free(struct HocripSequence *s);

/**
 * Number of samples; 0 for a null handle.
 *
 * # Safety
 * `s` must be null or a live handle.
 */
size_t hocrip_sequence_len(const struct HocripSequence *s);

/**
 * Copies the samples into split real/imaginary buffers of at least
 * `hocrip_sequence_len` entries.
 *
 * # Safety
 * `s` must be a live handle; `re` and `im` valid for `len` writes.
 */
enum HocripStatus hocrip_sequence_copy(const struct HocripSequence *s,
                                       double *re,
                                       double *im,
                                       size_t len);

/**
 * Worst off-peak aperiodic ACF ratio for window `n` (reads `n + 1` samples).
 *
 * # Safety
 * `s` must be a live handle; `ratio` and `argmax_tau` writable.
 */
enum HocripStatus hocrip_acf_max_ratio(const struct HocripSequence *s,
                                       size_t n,
                                       double *ratio,
                                       int64_t *argmax_tau);

/**
 * Builds an `n`-row Toeplitz matrix with `p` columns over `s` (the sequence
 * is copied).
 *
 * # Safety
 * `s` must be a live handle; `out_m` must be writable.
 */
enum HocripStatus hocrip_matrix_new(const struct HocripSequence *s,
                                    size_t n,
                                    size_t p,
                                    enum HocripToeplitz kind,
                                    struct HocripMatrix **out_m);

/**
 * # Safety
 * `m` must be null or a handle from [`hocrip_matrix_new`] not yet freed.
 */
void hocrip_matrix_free(struct HocripMatrix *m);

/**
 * Certified RIP order `q` and the matching Gershgorin bound `r_bound < 1`.
 *
 * # Safety
 * `m` must be a live handle; `q` and `r_bound` writable.
 */
enum HocripStatus hocrip_matrix_rip_order(const struct HocripMatrix *m, size_t *q, double *r_bound);

/**
 * Extreme eigenvalues of the normalized correlation matrix of the columns in
 * `subset`.
 *
 * # Safety
 * `m` must be a live handle; `subset` valid for `len` reads; outputs writable.
 */
enum HocripStatus hocrip_matrix_subset_eigs(const struct HocripMatrix *m,
                                            const size_t *subset,
                                            size_t len,
                                            double *lambda_min,
                                            double *lambda_max);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HOCRIP_H */
