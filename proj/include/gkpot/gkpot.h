#ifndef GKPOT_H
#define GKPOT_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define GKP_API __declspec(dllexport)
#else
#define GKP_API __attribute__((visibility("default")))
#endif

typedef enum gkp_status {
    GKP_OK = 0,
    GKP_ERR_INVALID_ARGUMENT = 1,
    GKP_ERR_DOMAIN = 2,
    GKP_ERR_CONDITIONING = 3,
    GKP_ERR_TRANSVERSALITY = 4,
    GKP_ERR_NOT_CLOSED = 5,
    GKP_ERR_FLOW_ESCAPE = 6,
    GKP_ERR_TOLERANCE = 7,
    GKP_ERR_CONFIG = 8,
    GKP_ERR_IO = 9,
    GKP_ERR_INTERNAL = 100
} gkp_status;

typedef struct gkp_config gkp_config;
typedef struct gkp_report gkp_report;

GKP_API const char* gkp_version(void);
/* message of the last failing call on this thread, "" if none */
GKP_API const char* gkp_last_error(void);

GKP_API gkp_status gkp_config_from_file(const char* path, gkp_config** out);
GKP_API gkp_status gkp_config_from_string(const char* json_text, gkp_config** out);
GKP_API gkp_status gkp_config_set_seed(gkp_config* cfg, uint64_t seed);
/* threads <= 0 keeps the config value and GKPOT_THREADS */
GKP_API gkp_status gkp_config_set_threads(gkp_config* cfg, int threads);
GKP_API void gkp_config_free(gkp_config* cfg);

/* command is "verify", "flow" or "scan" */
GKP_API gkp_status gkp_run(const gkp_config* cfg, const char* command, gkp_report** out);
GKP_API gkp_status gkp_golden(const gkp_config* cfg, const char* golden_path, gkp_report** out);

/* 0 pass, 1 tolerance or positivity failure */
GKP_API int gkp_report_exit_code(const gkp_report* rep);
/* JSON text owned by the report */
GKP_API const char* gkp_report_json(const gkp_report* rep);
GKP_API gkp_status gkp_report_write(const gkp_report* rep, const char* dir, const char* prefix);
GKP_API void gkp_report_free(gkp_report* rep);

/* Pipeline at one brane point u (length 4 for the two-dimensional bases).
   Any of the output pointers may be NULL. */
GKP_API gkp_status gkp_evaluate_point(const gkp_config* cfg, const double* u, size_t len, double* star1,
                                      double* star2, double* min_eig);

#ifdef __cplusplus
}
#endif

#endif
