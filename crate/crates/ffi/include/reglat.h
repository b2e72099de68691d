#ifndef REGLAT_H
#define REGLAT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ReglatStatus {
  REGLAT_STATUS_OK = 0,
  REGLAT_STATUS_NULL_POINTER = 1,
  REGLAT_STATUS_INVALID_ARGUMENT = 2,
  REGLAT_STATUS_NOT_PRIME = 3,
  REGLAT_STATUS_NOT_PRIMITIVE = 4,
  REGLAT_STATUS_RANK_TOO_SMALL = 5,
  REGLAT_STATUS_BOUND_TOO_LARGE = 6,
  REGLAT_STATUS_NO_CASE = 7,
  REGLAT_STATUS_UNSTABLE = 8,
  REGLAT_STATUS_OVERFLOW = 9,
  REGLAT_STATUS_PANIC = 10,
} ReglatStatus;

/**
 * Opaque lattice handle.
 */
typedef struct ReglatLattice ReglatLattice;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static description of a status code.
 */
const char *reglat_status_message(enum ReglatStatus status);

/**
 * Creates a lattice from `len` positive coefficients (any order).
 *
 * # Safety
 * `coeffs` must point to `len` readable `u64` values; `out` must be writable.
 */
enum ReglatStatus reglat_lattice_new(const uint64_t *coeffs,
                                     size_t len,
                                     struct ReglatLattice **out);

/**
 * # Safety
 * `l` must be null or a handle from this library that has not been freed.
 */
void reglat_lattice_free(struct ReglatLattice *l);

/**
 * Rank of the lattice, 0 for a null handle.
 *
 * # Safety
 * `l` must be null or a live handle.
 */
size_t reglat_lattice_rank(const struct ReglatLattice *l);

/**
 * Copies up to `cap` sorted coefficients into `buf`; `*written` receives the rank.
 *
 * # Safety
 * `buf` must have room for `cap` values; `l` and `written` must be valid.
 */
enum ReglatStatus reglat_lattice_coeffs(const struct ReglatLattice *l,
                                        uint64_t *buf,
                                        size_t cap,
                                        size_t *written);

/**
 * Product of the coefficients.
 *
 * # Safety
 * `l` must be a live handle and `out` writable.
 */
enum ReglatStatus reglat_lattice_discriminant(const struct ReglatLattice *l, uint64_t *out);

/**
 * # Safety
 * `l` must be a live handle and `out` writable.
 */
enum ReglatStatus reglat_locally_represents(const struct ReglatLattice *l,
                                            uint64_t p,
                                            uint64_t n,
                                            bool *out);

/**
 * # Safety
 * `l` must be a live handle and `out` writable.
 */
enum ReglatStatus reglat_genus_represents(const struct ReglatLattice *l, uint64_t n, bool *out);

/**
 * # Safety
 * `l` must be a live handle and `out` writable.
 */
enum ReglatStatus reglat_represents(const struct ReglatLattice *l, uint64_t n, bool *out);

/**
 * Searches `[1, bound]` for an integer represented locally but not globally.
 * `*refuted_at` is that integer, or 0 when none exists.
 *
 * # Safety
 * `l` must be a live handle and `refuted_at` writable.
 */
enum ReglatStatus reglat_regular_verdict(const struct ReglatLattice *l,
                                         uint64_t bound,
                                         uint64_t *refuted_at);

/**
 * Least integer in `[1, bound]` represented by the genus but not the
 * lattice, or 0 when none exists.
 *
 * # Safety
 * `l` must be a live handle and `out` writable.
 */
enum ReglatStatus reglat_t_value(const struct ReglatLattice *l, uint64_t bound, uint64_t *out);

/**
 * Watson transformation at `p` using the first applicable case.
 *
 * # Safety
 * `l` must be a live handle and `out` writable; the new handle is owned by
 * the caller.
 */
enum ReglatStatus reglat_lambda(const struct ReglatLattice *l,
                                uint64_t p,
                                struct ReglatLattice **out);

/**
 * Local representation table at `p` as a JSON string.
 *
 * # Safety
 * `l` must be a live handle and `out` writable; free the string with
 * [`reglat_string_free`].
 */
enum ReglatStatus reglat_local_rep_set_json(const struct ReglatLattice *l, uint64_t p, char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library and not yet freed.
 */
void reglat_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* REGLAT_H */
