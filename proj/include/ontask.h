/*
 * ontask — time-on-task estimation from clickstream timestamps.
 *
 * C interface to the ontask core. All functions return ontask_status;
 * non-OK calls leave a message retrievable with ontask_last_error()
 * (thread-local). Objects are opaque handles released with the matching
 * *_destroy function; strings returned through char** are released with
 * ontask_string_free().
 */
#ifndef ONTASK_H
#define ONTASK_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ontask_status {
    ONTASK_OK = 0,
    ONTASK_ERROR_CONFIG = 2,
    ONTASK_ERROR_IO = 3,
    ONTASK_ERROR_INVALID_ARGUMENT = 4,
    ONTASK_ERROR_INSUFFICIENT_DATA = 5,
    ONTASK_ERROR_NO_CONVERGENCE = 6,
    ONTASK_ERROR_DEGENERATE = 7,
    ONTASK_ERROR_UNSUPPORTED = 8,
    ONTASK_ERROR_INTERNAL = 9
} ontask_status;

typedef enum ontask_threshold_case {
    ONTASK_THRESHOLD_NONE = 0,
    ONTASK_THRESHOLD_JUMP = 1,
    ONTASK_THRESHOLD_ZERO_SHELF = 2
} ontask_threshold_case;

typedef struct ontask_config ontask_config;
typedef struct ontask_fit ontask_fit;
typedef struct ontask_report ontask_report;

typedef struct ontask_threshold_result {
    int solution_case; /* ontask_threshold_case */
    double tau;        /* seconds; 0 when solution_case == NONE */
    double f_left;
    double f_right;
    double shelf_lo; /* zero-shelf bounds; 0 otherwise */
    double shelf_hi;
} ontask_threshold_result;

const char* ontask_version(void);

/* Message for the most recent failing call on this thread. */
const char* ontask_last_error(void);

void ontask_string_free(char* s);

/*
 * Configuration is a key/value store shared by the pipeline and the direct
 * fitting entry points. Integer keys: min_clicks, seed, jobs, max_iterations,
 * restarts, min_points, per_resource (0/1). Double keys: min_interval,
 * max_interval, rel_tolerance, sigma_floor. String keys: delimiter (one
 * character), k_range (e.g. "3,4,5"), grades, completion, cohorts,
 * fits_cache (paths).
 */
ontask_config* ontask_config_create(void);
void ontask_config_destroy(ontask_config* cfg);
ontask_status ontask_config_set_int(ontask_config* cfg, const char* key, long long value);
ontask_status ontask_config_set_double(ontask_config* cfg, const char* key, double value);
ontask_status ontask_config_set_string(ontask_config* cfg, const char* key, const char* value);

/*
 * Runs the full pipeline on a delimited track log (header row with user_id,
 * timestamp and optional resource_type columns).
 */
ontask_status ontask_run_pipeline(const ontask_config* cfg, const char* input_path,
                                  ontask_report** out);
void ontask_report_destroy(ontask_report* report);
ontask_status ontask_report_counts(const ontask_report* report, long long* n_input,
                                   long long* n_fit, long long* n_dropped);
/* name: aggregate_gof, mean_on_task_ratio, grade_correlation, completer_ratio,
 * completer_log_gap. *present is 0 when the value is missing. */
ontask_status ontask_report_aggregate(const ontask_report* report, const char* name,
                                      double* value, int* present);
/* what: users_csv, users_json, thresholds_csv, thresholds_json, drops_csv,
 * summary, json, fits_json. */
ontask_status ontask_report_render(const ontask_report* report, const char* what, char** out);

/*
 * Generates a synthetic track log plus ground truth from a JSON generator
 * spec (see README). truth_intervals_path may be NULL.
 */
ontask_status ontask_simulate(const char* spec_json, const char* events_path,
                              const char* truth_users_path, const char* truth_intervals_path);

/*
 * Fits the log-normal mixture to one interval series (seconds), selecting the
 * component count by BIC, and exposes the derived quantities. cfg may be NULL
 * for defaults.
 */
ontask_status ontask_fit_intervals(const double* deltas, size_t n, const ontask_config* cfg,
                                   ontask_fit** out);
void ontask_fit_destroy(ontask_fit* fit);
ontask_status ontask_fit_component_count(const ontask_fit* fit, int* k);
/* Arrays must have room for k entries each; any pointer may be NULL. */
ontask_status ontask_fit_components(const ontask_fit* fit, double* weights, double* means_log,
                                    double* stds_log, double* means_direct);
/* name: bic, log_likelihood, gof, converged, iterations, k_effective, n. */
ontask_status ontask_fit_scalar(const ontask_fit* fit, const char* name, double* value,
                                int* present);
ontask_status ontask_fit_time_on_task(const ontask_fit* fit, double* t, double* m_on);
ontask_status ontask_fit_time_on_task_excluding_fast(const ontask_fit* fit, double* t);
ontask_status ontask_fit_to_json(const ontask_fit* fit, char** out);

/*
 * T'(tau) with a strict cutoff. When no interval lies below tau the estimate
 * is undefined: *below_support is set to 1 and *t_prime is left untouched.
 */
ontask_status ontask_thresholded_estimate(const double* deltas, size_t n, double tau,
                                          double* t_prime, int* below_support);

/* Solves T'(tau) = t on the shelves of T'. t must lie within [0, net time]. */
ontask_status ontask_effective_threshold(const double* deltas, size_t n, double t,
                                         ontask_threshold_result* out);

#ifdef __cplusplus
}
#endif

#endif /* ONTASK_H */
