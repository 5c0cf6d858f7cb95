/* Pure C99 consumer of the shared library: proves the header compiles as C
 * and the basic call sequence works without the C++ runtime in the client. */
#include <stdio.h>
#include <string.h>

#include "slowfast.h"

static int failures = 0;
#define CHECK(cond)                                                   \
  do {                                                                \
    if (!(cond)) {                                                    \
      fprintf(stderr, "FAIL %s:%d: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                     \
    }                                                                 \
  } while (0)

int main(void) {
  CHECK(sf_version() != NULL);
  CHECK(strcmp(sf_status_name(SF_OK), "ok") == 0);
  CHECK(strcmp(sf_status_name(SF_NOT_A_FOLD), "not_a_fold") == 0);

  sf_model* m = NULL;
  CHECK(sf_model_builtin("fold-canonical", &m) == SF_OK);

  double p[4] = {1.0, 2.0, 3.0, 4.0};
  double value = 0.0;
  CHECK(sf_model_eval(m, p, &value) == SF_OK);
  CHECK(value > 9.999999 && value < 10.000001);

  double f[4];
  double origin[4] = {0.0, 0.0, 0.0, 0.0};
  CHECK(sf_vector_field(m, origin, 0.5, f) == SF_OK);
  CHECK(f[2] > 0.4999999 && f[2] < 0.5000001); /* eps * H_v = 0.5 */

  sf_classification rec;
  CHECK(sf_classify(m, origin, &rec) == SF_OK);
  CHECK(rec.kind == SF_KIND_FOLD);
  CHECK(rec.chart_valid == 1);

  sf_fold_data fd;
  CHECK(sf_fold_coefficients(m, 0.0, &fd) == SF_OK);
  CHECK(fd.alpha_c > -1.000001 && fd.alpha_c < -0.999999);
  CHECK(fd.s1 > -0.500001 && fd.s1 < -0.499999);

  sf_trajectory* traj = NULL;
  double init[4] = {1.0, 0.0, -3.0, 0.0};
  CHECK(sf_integrate(m, init, 1e-2, 0.0, 0.1, 1e-3, 10, &traj) == SF_OK);
  CHECK(sf_trajectory_size(traj) > 2);
  CHECK(sf_trajectory_aborted(traj) == 0);
  sf_trajectory_free(traj);
  sf_model_free(m);

  CHECK(sf_model_builtin("bogus", &m) == SF_INVALID_ARGUMENT);
  CHECK(strlen(sf_last_error()) > 0);

  if (failures) {
    fprintf(stderr, "%d check(s) failed\n", failures);
    return 1;
  }
  printf("capi smoke ok\n");
  return 0;
}
