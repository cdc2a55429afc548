/*
 * C API for the fss library: Frechet means on circles and spheres,
 * finite-sample smeariness diagnostics, and mean-equality tests.
 *
 * Conventions:
 *  - All functions return fss_status; FSS_OK is 0. On failure,
 *    fss_last_error() returns a one-line description (thread-local).
 *  - Objects are opaque handles released with their fss_*_free function.
 *  - Strings returned through char** are heap-allocated and released with
 *    fss_string_free.
 *  - Results are deterministic for fixed seeds, independent of `threads`.
 */

#ifndef FSS_C_API_H
#define FSS_C_API_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fss_status {
  FSS_OK = 0,
  FSS_ERR_USAGE = 1,   /* invalid arguments or call sequence */
  FSS_ERR_DATA = 2,    /* malformed files, specs, or samples */
  FSS_ERR_NUMERIC = 3  /* numerical failure (non-convergence, singularity) */
} fss_status;

const char* fss_version(void);
const char* fss_last_error(void);
void fss_string_free(char* s);
void fss_longs_free(long* values);

/* --- Distribution specs (JSON schema, e.g.
 *     {"type":"von_mises","mu":0.0,"kappa":0.5}) --- */

typedef struct fss_spec_s fss_spec_t;

fss_status fss_spec_from_json(const char* json, fss_spec_t** out);
fss_status fss_spec_to_json(const fss_spec_t* spec, char** out);
int fss_spec_dim(const fss_spec_t* spec);
void fss_spec_free(fss_spec_t* spec);

/* --- Samples --- */

typedef struct fss_sample_s fss_sample_t;

fss_status fss_sample_draw(const fss_spec_t* spec, long n, uint64_t seed,
                           uint64_t stream, fss_sample_t** out);
fss_status fss_sample_from_angles(const double* angles, long n,
                                  fss_sample_t** out);
/* data: n rows of m+1 ambient coordinates, row-major. */
fss_status fss_sample_from_vectors(const double* data, long n, int m,
                                   fss_sample_t** out);
/* unit: "deg"/"degrees" or "rad"/"radians". Reports rows skipped through a
 * truthy `calm` column via skipped_calm (may be NULL). */
fss_status fss_sample_read_angles_csv(const char* path, const char* unit,
                                      long* skipped_calm, fss_sample_t** out);
/* Header-sniffing reader: `angle` or x0,...,xm. */
fss_status fss_sample_read_csv(const char* path, fss_sample_t** out);
fss_status fss_sample_to_csv(const fss_sample_t* sample, char** out);
long fss_sample_size(const fss_sample_t* sample);
int fss_sample_dim(const fss_sample_t* sample);
void fss_sample_free(fss_sample_t* sample);

/* --- Frechet means --- */

/* point_out must hold m+1 doubles for dimension m, or 1 for the circle. */
fss_status fss_frechet_mean(const fss_sample_t* sample, double* point_out,
                            double* value_out);
fss_status fss_frechet_function(const fss_sample_t* sample,
                                const double* point, double* out);

/* --- Modulation curves --- */

typedef struct fss_curve_s fss_curve_t;

fss_status fss_modulation_curve(const fss_spec_t* spec, const long* n_grid,
                                int grid_len, long replicates, uint64_t seed,
                                int threads, fss_curve_t** out);
fss_status fss_curve_to_csv(const fss_curve_t* curve, char** out);
fss_status fss_curve_to_json(const fss_curve_t* curve, char** out);
fss_status fss_curve_from_csv(const char* text, fss_curve_t** out);
long fss_curve_size(const fss_curve_t* curve);
void fss_curve_free(fss_curve_t* curve);

/* Parses "a,b,c" or "log:a:b:k" into a grid of sample sizes. */
fss_status fss_parse_n_grid(const char* text, long** values, int* count);

fss_status fss_bootstrap_modulation(const fss_sample_t* sample, long B,
                                    uint64_t seed, int threads,
                                    double* estimate, double* se);
fss_status fss_bootstrap_modulation_json(const fss_sample_t* sample, long B,
                                         uint64_t seed, int threads,
                                         char** json_out);

/* --- Asymptotics and classification --- */

/* CLT analysis: Hessian, tangent covariance, asymptotic covariance and the
 * limit of the modulation, as JSON. */
fss_status fss_limit_analysis(const fss_spec_t* spec, char** json_out);

/* Antipodal density and the circle limit formula. */
fss_status fss_antipodal_density(const fss_spec_t* spec, double* out);
fss_status fss_circle_limit_modulation(double f_pi, double* out);

/* limit may be NULL (classify from the curve alone) or point to a value;
 * +infinity marks an analytically smeary law. */
fss_status fss_classify(const fss_curve_t* curve, const double* limit,
                        char** json_out);
fss_status fss_fit_regimes(const fss_curve_t* curve, char** json_out);

fss_status fss_ring_search(int m, double target, char** json_out);
fss_status fss_ring_feasibility_threshold(int m, double* theta_out);

/* --- Tests --- */

fss_status fss_one_sample_test(const fss_sample_t* sample, const double* mu0,
                               char** json_out);
/* method: "quantile" or "bootstrap"; B ignored for quantile. */
fss_status fss_two_sample_test(const fss_sample_t* s1, const fss_sample_t* s2,
                               const char* method, long B, uint64_t seed,
                               int threads, char** json_out);
fss_status fss_rejection_curve(const fss_spec_t* spec, const double* offsets,
                               int offsets_len, long n, long replicates,
                               double level, const char* method, long B,
                               uint64_t seed, int threads, int as_json,
                               char** out);

/* --- Angle ingestion (normalized dataset emission) --- */

/* Reads angles (see fss_sample_read_angles_csv) and renders them as a
 * normalized CSV (radians) or JSON document. */
fss_status fss_ingest_angles(const char* path, const char* unit, int as_json,
                             char** out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* FSS_C_API_H */
