#ifndef SLOWFAST_H
#define SLOWFAST_H

/* C interface to the slow-fast Hamiltonian analysis library.
 *
 * All functions return sf_status; SF_OK means success. On failure the
 * thread-local message from sf_last_error() describes the problem. Objects
 * returned through out-parameters are owned by the caller and released with
 * the matching *_free function. Phase-space points are double[4] in the
 * order (x, y, u, v): (x, y) fast pair, (u, v) slow pair.
 */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Stable status numbering, shared with the library's internal error codes. */
typedef enum sf_status {
  SF_OK = 0,
  SF_PARSE_ERROR = 1,
  SF_INVALID_ARGUMENT = 2,
  SF_UNBOUND_PARAMETER = 3,
  SF_NEWTON_DIVERGENCE = 4,
  SF_SINGULAR_JACOBIAN = 5,
  SF_CHART_INVALID = 6,
  SF_NOT_ON_SLOW_MANIFOLD = 7,
  SF_BRANCH_INVALID = 8,
  SF_NOT_A_FOLD = 9,
  SF_NOT_A_CUSP = 10,
  SF_CLASSIFICATION_MISMATCH = 11,
  SF_CONTINUATION_STALL = 12,
  SF_DEGENERATE_COEFFICIENTS = 13,
  SF_POLE_IN_WINDOW = 14,
  SF_MISMATCHED_EPSILON = 15,
  SF_TRANSVERSALITY_FAILURE = 16,
  SF_CONFIG_ERROR = 17,
  SF_IO_ERROR = 18,
  SF_INTERNAL = 19
} sf_status;

typedef enum sf_kind {
  SF_KIND_REGULAR = 0,
  SF_KIND_FOLD = 1,
  SF_KIND_CUSP = 2,
  SF_KIND_DEGENERATE = 3
} sf_kind;

typedef struct sf_model sf_model;
typedef struct sf_trajectory sf_trajectory;

const char* sf_version(void);
const char* sf_status_name(sf_status status);
/* Message of the most recent failure on this thread ("" when none). */
const char* sf_last_error(void);

/* --- models ----------------------------------------------------------- */

/* Parses an inline Hamiltonian expression in x, y, u, v (free identifiers
 * become bindable parameters). */
sf_status sf_model_parse(const char* text, sf_model** out);
/* Loads a model file: optional `param NAME = VALUE` lines, '#' comments,
 * and the expression (possibly spanning several lines). */
sf_status sf_model_load(const char* path, sf_model** out);
/* Built-in families: "fold-canonical", "cusp-canonical". */
sf_status sf_model_builtin(const char* family, sf_model** out);
sf_status sf_model_bind(sf_model* model, const char* name, double value);
void sf_model_free(sf_model* model);

const char* sf_model_source(const sf_model* model);
uint64_t sf_model_hash(const sf_model* model);

sf_status sf_model_eval(const sf_model* model, const double point[4],
                        double* out);
/* Mixed partial derivative; orders[i] >= 0 with total order <= 8. */
sf_status sf_model_partial(const sf_model* model, const double point[4],
                           const int orders[4], double* out);

/* --- dynamics --------------------------------------------------------- */

/* Slow-fast field (H_y, -H_x, eps H_v, -eps H_u); eps = 0 gives the layer
 * (frozen slow variables) field. */
sf_status sf_vector_field(const sf_model* model, const double point[4],
                          double eps, double out[4]);

/* Implicit-midpoint integration from t0 to t1 with step near h (adjusted to
 * land on t1 exactly); records every stride-th step plus the endpoints. */
sf_status sf_integrate(const sf_model* model, const double point[4],
                       double eps, double t0, double t1, double h, int stride,
                       sf_trajectory** out);
void sf_trajectory_free(sf_trajectory* traj);
size_t sf_trajectory_size(const sf_trajectory* traj);
sf_status sf_trajectory_sample(const sf_trajectory* traj, size_t index,
                               double* t, double state[4]);
/* Max |H - H(start)| seen over every step taken. */
double sf_trajectory_energy_drift(const sf_trajectory* traj);
/* Nonzero when the integration stopped early (diverged Newton solve); the
 * recorded samples then cover only the completed prefix. */
int sf_trajectory_aborted(const sf_trajectory* traj);

/* --- slow manifold ---------------------------------------------------- */

typedef struct sf_classification {
  double point[4];       /* refined location on the slow manifold */
  int kind;              /* sf_kind */
  int degenerate_reason; /* 0 none, 1 rank-deficient, 2 fast-block-only,
                            3 criteria conflict, 4 chart failure,
                            5 unclassified */
  double delta;          /* fast-Hessian discriminant at the point */
  double transversality; /* slow-regularity bracket (when computed) */
  int chart_valid;
} sf_classification;

/* Refines (x, y) to the fast equilibrium at the point's (u, v), then
 * classifies: regular, fold, cusp, or degenerate. */
sf_status sf_classify(const sf_model* model, const double point[4],
                      sf_classification* out);

/* --- reduction -------------------------------------------------------- */

typedef struct sf_fold_data {
  double alpha_c, gamma_c, s1; /* fold limit-system coefficients */
  double trace_point[4];
  double transversality;
} sf_fold_data;

/* Coefficients of the fold limit system on the level H = c. */
sf_status sf_fold_coefficients(const sf_model* model, double c,
                               sf_fold_data* out);

typedef struct sf_cusp_data {
  double rho, sigma, beta, alpha; /* cusp limit-system coefficients */
  double beta_literal;            /* alternative beta variant, recorded */
  double genericity_det;
  int generic;
  double trace_point[4];
  double transversality;
} sf_cusp_data;

/* Coefficients of the cusp limit system on the level H = c. */
sf_status sf_cusp_coefficients(const sf_model* model, double c,
                               sf_cusp_data* out);

/* --- command runner --------------------------------------------------- */

/* Executes one subcommand (analyze, integrate, trace-singular, reduce,
 * painleve, verify-fold, verify-cusp, form-check) against a config file,
 * writing artifacts into out_dir (NULL or "" for the current directory).
 * exit_code, when non-NULL, receives the process-style code: 0 success,
 * 1 internal error, 2 domain/classification mismatch, 3 config or I/O
 * error. */
sf_status sf_run(const char* command, const char* config_path,
                 const char* out_dir, uint64_t seed, int* exit_code);

#ifdef __cplusplus
}
#endif

#endif
