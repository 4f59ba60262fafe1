#ifndef SUSY_FORGE_H
#define SUSY_FORGE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Curves that can be copied out of a construction.
 */
typedef enum SfCurve {
  SfCurve_GridX = 0,
  SfCurve_V0 = 1,
  SfCurve_V2 = 2,
  SfCurve_V3 = 3,
  SfCurve_V3Iterative = 4,
  SfCurve_SeedU1 = 5,
  SfCurve_WronskianW = 6,
  SfCurve_ProfileF = 7,
  SfCurve_MissingState = 8,
} SfCurve;

/**
 * Base problem selector.
 */
typedef enum SfModel {
  /**
   * Free particle; `param` is the wave number k > 0.
   */
  SfModel_Free = 0,
  /**
   * Radial Coulomb problem; `param` is the angular momentum l >= 0.
   */
  SfModel_Coulomb = 1,
} SfModel;

/**
 * Spectral regime of a constructed partner.
 */
typedef enum SfRegime {
  SfRegime_Augmented = 0,
  SfRegime_Isospectral = 1,
  SfRegime_GroundDeleted = 2,
  SfRegime_Singular = 3,
} SfRegime;

/**
 * Status codes returned by every FFI entry point.
 */
typedef enum SfStatus {
  SfStatus_Ok = 0,
  SfStatus_NullArgument = 1,
  SfStatus_InvalidConfig = 2,
  SfStatus_SingularTransformation = 3,
  SfStatus_EigensolveFailure = 4,
  SfStatus_BufferTooSmall = 5,
  SfStatus_InternalError = 6,
} SfStatus;

/**
 * Opaque partner construction.
 */
typedef struct SfPartner SfPartner;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Build a partner construction.
 *
 * `model` selects the base problem, `param` its parameter (k or l), `f0`
 * the chain constant, and `grid_n` the number of samples (0 picks the
 * model default). On success `*out` owns the construction.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one pointer.
 */
enum SfStatus sf_partner_new(enum SfModel model,
                             double param,
                             double f0,
                             uintptr_t grid_n,
                             struct SfPartner **out);

/**
 * Release a handle returned by [`sf_partner_new`]. A null pointer is a
 * no-op.
 *
 * # Safety
 * `p` must be null or a pointer produced by [`sf_partner_new`] that has
 * not been freed yet.
 */
void sf_partner_free(struct SfPartner *p);

/**
 * Number of grid samples in the construction.
 *
 * # Safety
 * `p` must be a live handle from [`sf_partner_new`].
 */
uintptr_t sf_partner_len(const struct SfPartner *p);

/**
 * Copy a tabulated curve into `buf` (length `len` doubles). `len` must be
 * at least [`sf_partner_len`].
 *
 * # Safety
 * `p` must be a live handle; `buf` must point to at least `len` writable
 * doubles.
 */
enum SfStatus sf_partner_curve(const struct SfPartner *p,
                               enum SfCurve curve,
                               double *buf,
                               uintptr_t len);

/**
 * Scalar summary of the construction.
 *
 * # Safety
 * `p` must be a live handle; the out pointers must each be null or valid
 * for one write.
 */
enum SfStatus sf_partner_summary(const struct SfPartner *p,
                                 double *sigma_minus,
                                 double *f0,
                                 double *epsilon,
                                 enum SfRegime *regime);

/**
 * Lowest eigenvalues of the partner potential inside `(e_lo, e_hi)`.
 * Writes up to `n_levels` energies into `energies` and the count found into
 * `n_found`.
 *
 * # Safety
 * `p` must be a live handle; `energies` must point to at least `n_levels`
 * writable doubles; `n_found` must be valid for one write.
 */
enum SfStatus sf_partner_spectrum(const struct SfPartner *p,
                                  uintptr_t n_levels,
                                  double e_lo,
                                  double e_hi,
                                  double *energies,
                                  uintptr_t *n_found);

/**
 * Static description of a status code.
 */
const char *sf_status_message(enum SfStatus status);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* SUSY_FORGE_H */
