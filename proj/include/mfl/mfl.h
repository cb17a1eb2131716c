#ifndef MFL_H
#define MFL_H

/* C interface to the mean-field likelihood library. Handles are opaque; every
 * call returns an mfl_status and, on failure, mfl_last_error() describes it
 * (thread-local, valid until the next call on the same thread). */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define MFL_API __declspec(dllexport)
#else
#define MFL_API __attribute__((visibility("default")))
#endif

typedef enum mfl_status {
    MFL_OK = 0,
    MFL_ERR_DOMAIN = 1,
    MFL_ERR_SHAPE = 2,
    MFL_ERR_NUMERIC = 3,
    MFL_ERR_BLOW_UP = 4,
    MFL_ERR_SINGULAR = 5,
    MFL_ERR_UNSUPPORTED = 6,
    MFL_ERR_CONFIG = 7,
    MFL_ERR_IO = 8,
    MFL_ERR_NON_CONVERGENCE = 9,
    MFL_ERR_INVALID_ARGUMENT = 10,
    MFL_ERR_INTERNAL = 11
} mfl_status;

typedef enum mfl_init_kind { MFL_INIT_POINT = 0, MFL_INIT_GAUSSIAN = 1, MFL_INIT_UNIFORM = 2 } mfl_init_kind;
typedef enum mfl_method { MFL_METHOD_LINEAR = 0, MFL_METHOD_QUASI_NEWTON = 1 } mfl_method;

typedef struct mfl_model mfl_model;
typedef struct mfl_paths mfl_paths;
typedef struct mfl_config mfl_config;
typedef struct mfl_result mfl_result;

MFL_API const char* mfl_version(void);
MFL_API const char* mfl_last_error(void);
MFL_API const char* mfl_status_name(mfl_status status);

/* family: mckean_ou, gen_linear, double_layer, nonlinear_f. Kernel names are
 * ignored by families that do not use them (may be NULL). For nonlinear_f,
 * kernel_f names the link F. lower/upper have p entries, or are both NULL for
 * the default box. */
MFL_API mfl_status mfl_model_create(const char* family, size_t dim, const double* lower, const double* upper,
                                    size_t p, const char* kernel_f, const char* kernel_g, double sigma,
                                    mfl_model** out);
MFL_API void mfl_model_destroy(mfl_model* model);
MFL_API mfl_status mfl_model_num_params(const mfl_model* model, size_t* p);
MFL_API mfl_status mfl_model_drift(const mfl_model* model, const double* theta, size_t p, double t, const double* x,
                                   const double* atoms, size_t n_atoms, double* out);

MFL_API mfl_status mfl_simulate(const mfl_model* model, const double* theta, size_t p, size_t particles, double horizon,
                                size_t steps, mfl_init_kind init, double init_a, double init_b, uint64_t seed,
                                mfl_paths** out);
MFL_API void mfl_paths_destroy(mfl_paths* paths);
MFL_API mfl_status mfl_paths_shape(const mfl_paths* paths, size_t* particles, size_t* steps, size_t* dim);
/* Step-major storage: value (particle i, step j, coord k) at (j * N + i) * d + k. */
MFL_API mfl_status mfl_paths_data(const mfl_paths* paths, const double** data, size_t* length);
MFL_API mfl_status mfl_paths_write(const mfl_paths* paths, const char* csv_path, const char* meta_path);
MFL_API mfl_status mfl_paths_read(const char* csv_path, const char* meta_path, mfl_paths** out);

MFL_API mfl_status mfl_log_likelihood(const mfl_model* model, const double* theta, size_t p, const mfl_paths* paths,
                                      double* out);
MFL_API mfl_status mfl_score(const mfl_model* model, const double* theta, size_t p, const mfl_paths* paths,
                             double* out);
/* Row-major p x p. */
MFL_API mfl_status mfl_empirical_fisher(const mfl_model* model, const double* theta, size_t p, const mfl_paths* paths,
                                        double* out);
MFL_API mfl_status mfl_ou_limit_fisher(const double* theta3, double mean0, double var0, double sigma, double horizon,
                                       size_t steps, double* out9);

MFL_API mfl_status mfl_mle(const mfl_model* model, const mfl_paths* paths, const double* theta_init, size_t p,
                           mfl_method method, uint64_t seed, double* theta_hat, int* converged);

/* keys/values: n overrides applied on top of the text (NULL when n == 0). */
MFL_API mfl_status mfl_config_parse(const char* text, const char* const* keys, const char* const* values, size_t n,
                                    mfl_config** out);
MFL_API mfl_status mfl_config_parse_file(const char* path, const char* const* keys, const char* const* values,
                                         size_t n, mfl_config** out);
MFL_API void mfl_config_destroy(mfl_config* config);
MFL_API mfl_status mfl_config_hash(const mfl_config* config, uint64_t* hash);
MFL_API const char* mfl_config_kind(const mfl_config* config);
MFL_API const char* mfl_config_out(const mfl_config* config);

/* threads == 0: MFL_THREADS, then hardware concurrency. */
MFL_API mfl_status mfl_run(const mfl_config* config, const char* out_dir, unsigned threads, mfl_result** out);
/* seed may be NULL to keep each suite entry's own seed. */
MFL_API mfl_status mfl_verify(const char* suite, const char* out_dir, unsigned threads, const uint64_t* seed,
                              mfl_result** out);
MFL_API void mfl_result_destroy(mfl_result* result);
MFL_API int mfl_result_pass(const mfl_result* result);
/* `key: value` lines (run) or `entry: pass|fail` lines (verify). */
MFL_API const char* mfl_result_summary(const mfl_result* result);
MFL_API const char* mfl_result_manifest(const mfl_result* result);

#ifdef __cplusplus
}
#endif

#endif
