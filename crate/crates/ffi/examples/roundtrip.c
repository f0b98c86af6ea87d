/* Forward and inverse transform of a point mass through the C interface. */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>

#include "qjacobi.h"

#define CHECK(call)                                                   \
  do {                                                                \
    QjStatus s_ = (call);                                             \
    if (s_ != QJ_STATUS_OK) {                                         \
      fprintf(stderr, "%s: %d %s\n", #call, s_, qj_last_error());     \
      return 1;                                                       \
    }                                                                 \
  } while (0)

int main(void) {
  QjParams *p = NULL;
  QjTransform *t = NULL;
  QjSpectral *g = NULL;
  int64_t k_min, k_max;
  size_t nodes, points;

  if (qj_params_preset("nope", &p) != QJ_STATUS_CONFIG || qj_last_error() == NULL) {
    fprintf(stderr, "unknown preset was accepted\n");
    return 1;
  }
  CHECK(qj_params_preset("ps1", &p));
  CHECK(qj_transform_new(p, -20, 8, 0, &t));
  CHECK(qj_transform_shape(t, &k_min, &k_max, &nodes, &points));

  size_t n = (size_t)(k_max - k_min + 1);
  QjComplex *f = calloc(2 * n, sizeof *f);
  QjComplex *back = calloc(2 * n, sizeof *back);
  f[n + (size_t)(2 - k_min)].re = 1.0; /* z+ q^2 */
  f[(size_t)(-1 - k_min)].im = 0.5;    /* z- q^-1 */

  CHECK(qj_transform_forward(t, f, 2 * n, &g));
  CHECK(qj_transform_inverse(t, g, back, 2 * n));
  double err = 0.0;
  for (size_t i = 0; i < 2 * n; i++) {
    double e = hypot(back[i].re - f[i].re, back[i].im - f[i].im);
    if (e > err) err = e;
  }
  printf("qjacobi %s: window [%lld, %lld], %zu nodes, %zu points, roundtrip error %.3e\n", qj_version(),
         (long long)k_min, (long long)k_max, nodes, points, err);

  qj_spectral_free(g);
  qj_transform_free(t);
  qj_params_free(p);
  free(f);
  free(back);
  return err < 1e-8 ? 0 : 1;
}
