#ifndef QJACOBI_H
#define QJACOBI_H

#include <stddef.h>
#include <stdint.h>

/*
 Result code of every call.
 */
typedef enum QjStatus {
  QJ_STATUS_OK = 0,
  QJ_STATUS_NULL_POINTER = 1,
  QJ_STATUS_INVALID_ARGUMENT = 2,
  QJ_STATUS_CONFIG = 3,
  QJ_STATUS_PARAMETER_DOMAIN = 4,
  QJ_STATUS_NON_GENERIC = 5,
  QJ_STATUS_GRID_MISMATCH = 6,
  QJ_STATUS_NUMERICAL = 7,
  QJ_STATUS_BUFFER_TOO_SMALL = 8,
  QJ_STATUS_PANIC = 9,
} QjStatus;

/*
 Validated parameters.
 */
typedef struct QjParams QjParams;

/*
 A spectral function belonging to a transform.
 */
typedef struct QjSpectral QjSpectral;

/*
 Transform tables on a window.
 */
typedef struct QjTransform QjTransform;

typedef struct QjComplex {
  double re;
  double im;
} QjComplex;

/*
 Plain values of a parameter set.
 */
typedef struct QjParamValues {
  double q;
  double z_minus;
  double z_plus;
  struct QjComplex a;
  struct QjComplex b;
  struct QjComplex c;
  struct QjComplex d;
} QjParamValues;

/*
 Counts from [`qj_verify`].
 */
typedef struct QjRunCounts {
  size_t total;
  size_t passed;
  size_t failed;
  size_t skipped;
} QjRunCounts;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version as a static NUL-terminated string.
 */
const char *qj_version(void);

/*
 Message of the last failed call on this thread, or null after a success.
 The pointer stays valid until the next call on the same thread.
 */
const char *qj_last_error(void);

/*
 Parameters of a named preset (`"ps1"` to `"ps4"`).

 # Safety
 `name` must be a NUL-terminated string and `out` a valid pointer.
 */
enum QjStatus qj_params_preset(const char *name, struct QjParams **out);

/*
 Validated parameters from plain values.

 # Safety
 `values` and `out` must be valid pointers.
 */
enum QjStatus qj_params_new(const struct QjParamValues *values, struct QjParams **out);

/*
 Copies the values of `params` into `out`.

 # Safety
 Both pointers must be valid.
 */
enum QjStatus qj_params_values(const struct QjParams *params, struct QjParamValues *out);

/*
 # Safety
 `params` must come from this library and not be used afterwards. Null is
 ignored.
 */
void qj_params_free(struct QjParams *params);

/*
 Builds transform tables on `[k_min, k_max]` with `nodes` circle nodes;
 `nodes = 0` selects the default.

 # Safety
 `params` and `out` must be valid pointers.
 */
enum QjStatus qj_transform_new(const struct QjParams *params,
                               int64_t k_min,
                               int64_t k_max,
                               size_t nodes,
                               struct QjTransform **out);

/*
 # Safety
 `transform` must come from this library and not be used afterwards. Null
 is ignored.
 */
void qj_transform_free(struct QjTransform *transform);

/*
 Sizes of `transform`: window bounds, number of circle nodes and number of
 discrete spectral points. Any output pointer may be null.

 # Safety
 `transform` must be valid; non-null outputs must be writable.
 */
enum QjStatus qj_transform_shape(const struct QjTransform *transform,
                                 int64_t *k_min,
                                 int64_t *k_max,
                                 size_t *nodes,
                                 size_t *points);

/*
 Circle nodes `ψ` into `psi` and discrete spectral parameters `γ` into
 `gamma`. Either output may be null with length 0.

 # Safety
 Each buffer must hold at least its stated length.
 */
enum QjStatus qj_transform_spectrum(const struct QjTransform *transform,
                                    double *psi,
                                    size_t psi_len,
                                    double *gamma,
                                    size_t gamma_len);

/*
 Forward transform of a grid function given as `2 n` values.

 # Safety
 `values` must hold `len` elements; `transform` and `out` must be valid.
 */
enum QjStatus qj_transform_forward(const struct QjTransform *transform,
                                   const struct QjComplex *values,
                                   size_t len,
                                   struct QjSpectral **out);

/*
 Inverse transform into `2 n` values.

 # Safety
 `out` must hold `len` elements; the handles must be valid.
 */
enum QjStatus qj_transform_inverse(const struct QjTransform *transform,
                                   const struct QjSpectral *spectral,
                                   struct QjComplex *out,
                                   size_t len);

/*
 Inner product `⟨g₁, g₂⟩` in the spectral space of `transform`.

 # Safety
 All pointers must be valid.
 */
enum QjStatus qj_transform_inner(const struct QjTransform *transform,
                                 const struct QjSpectral *g1,
                                 const struct QjSpectral *g2,
                                 struct QjComplex *out);

/*
 A spectral function from its values: `2 × nodes` circle values (node by
 node, first then second component) and one value per discrete point.

 # Safety
 Each buffer must hold its stated length; `transform` and `out` must be
 valid.
 */
enum QjStatus qj_spectral_new(const struct QjTransform *transform,
                              const struct QjComplex *circle,
                              size_t circle_len,
                              const struct QjComplex *points,
                              size_t points_len,
                              struct QjSpectral **out);

/*
 Copies the values of `spectral` in the layout of [`qj_spectral_new`].

 # Safety
 Each buffer must hold its stated length.
 */
enum QjStatus qj_spectral_values(const struct QjSpectral *spectral,
                                 struct QjComplex *circle,
                                 size_t circle_len,
                                 struct QjComplex *points,
                                 size_t points_len);

/*
 # Safety
 `spectral` must come from this library and not be used afterwards. Null is
 ignored.
 */
void qj_spectral_free(struct QjSpectral *spectral);

/*
 Runs the verification suites of a JSON run configuration. Check failures
 are reported through `counts`, not the status. When the configuration
 names a `report_path` the report is written there.

 # Safety
 `config_json` must be a NUL-terminated string and `counts` valid.
 */
enum QjStatus qj_verify(const char *config_json, struct QjRunCounts *counts);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QJACOBI_H */
