/* qpmsa: quasi-periodic Schroedinger operator analysis toolkit.
 *
 * C interface to the core library. All functions return a status code (or a
 * handle / NULL); the last error message of the calling thread is available
 * through qpmsa_last_error(). Strings returned through char** parameters are
 * heap-allocated and must be released with qpmsa_string_free().
 */
#ifndef QPMSA_H
#define QPMSA_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qpmsa_status {
  QPMSA_OK = 0,
  QPMSA_ERR_INVALID_ARGUMENT = 1,
  QPMSA_ERR_RUNTIME = 2,
  QPMSA_ERR_CHECK_FAILED = 3,  /* a theorem/property check failed */
  QPMSA_ERR_IO = 4
} qpmsa_status;

typedef struct qpmsa_config qpmsa_config;     /* opaque run configuration */
typedef struct qpmsa_operator qpmsa_operator; /* opaque finite-volume operator */

const char* qpmsa_version(void);
const char* qpmsa_last_error(void);
void qpmsa_string_free(char* s);

/* --- configuration ------------------------------------------------------ */

qpmsa_config* qpmsa_config_create(void);
void qpmsa_config_destroy(qpmsa_config* cfg);
/* Load a JSON or TOML config file (dispatch on extension). */
qpmsa_status qpmsa_config_load_file(qpmsa_config* cfg, const char* path);
/* Set one dotted key from a string, e.g. ("epsilon", "1e-6"),
 * ("schedule.l1", "3"), ("experiment", "msa"). */
qpmsa_status qpmsa_config_set(qpmsa_config* cfg, const char* key, const char* value);
/* Current configuration as a JSON string. */
qpmsa_status qpmsa_config_dump(const qpmsa_config* cfg, char** json_out);

/* Run the configured experiment: writes manifest.json, report files and
 * summary.txt under the configured output directory. Returns QPMSA_OK when
 * every executed check passed, QPMSA_ERR_CHECK_FAILED when a check failed. */
qpmsa_status qpmsa_run(const qpmsa_config* cfg);

/* --- direct operator access ---------------------------------------------- */

/* Assemble H on an axis-aligned box around `center` (length `dim`).
 * potential: "cos" or "cos2". omega may be NULL for the shipped default
 * frequency of that dimension (then tau/gamma are ignored). */
qpmsa_operator* qpmsa_operator_create_box(int dim, double epsilon, const char* potential,
                                          const double* omega, double tau, double gamma,
                                          double theta, const int* center, int radius);
void qpmsa_operator_destroy(qpmsa_operator* op);
int qpmsa_operator_size(const qpmsa_operator* op);
/* Dense row-major copy into out (size*size doubles). */
qpmsa_status qpmsa_operator_matrix(const qpmsa_operator* op, double* out);
/* Ascending eigenvalues into out (size doubles). */
qpmsa_status qpmsa_operator_eigenvalues(const qpmsa_operator* op, double* out);
/* (H - E)^{-1}, row-major, with the max residual of (H-E)G - I. Fails with
 * QPMSA_ERR_RUNTIME when E is too close to the spectrum. */
qpmsa_status qpmsa_operator_green(const qpmsa_operator* op, double energy, double* out,
                                  double* residual_out);

/* --- small numeric utilities --------------------------------------------- */

/* Distance to the nearest integer, in [0, 1/2]. */
qpmsa_status qpmsa_torus_norm(double t, double* out);
/* Exhaustive Diophantine scan over 0 < ||x||_1 <= radius; report as JSON. */
qpmsa_status qpmsa_verify_diophantine(int dim, const double* omega, double tau, double gamma,
                                      int radius, char** report_json_out);
/* Membership of theta in the arithmetic set Theta_A (exponent d+1); JSON. */
qpmsa_status qpmsa_arithmetic_membership(double theta, int dim, const double* omega, double a,
                                         int radius, char** report_json_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* QPMSA_H */
