#ifndef HHFLOW_H
#define HHFLOW_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes double as process exit codes for the command-line tool. */
typedef enum hh_status {
  HH_OK = 0,
  HH_ERR_RUNTIME = 1,   /* I/O failure or unexpected internal error */
  HH_ERR_CONFIG = 2,    /* malformed or inconsistent input */
  HH_ERR_NUMERICAL = 3, /* blow-up, tube exit, Newton failure, non-finite values */
  HH_ERR_CHECK = 4      /* a check ran but at least one criterion failed */
} hh_status;

typedef struct hh_config hh_config;
typedef struct hh_run hh_run;
typedef struct hh_report hh_report;
typedef struct hh_calibration hh_calibration;

/* Message of the last failing call on this thread; never NULL. */
const char* hh_last_error(void);
const char* hh_version(void);
/* Name of the environment variable that overrides every output directory. */
const char* hh_output_dir_env(void);

hh_status hh_config_load(const char* path, hh_config** out);
hh_status hh_config_parse(const char* text, const char* name, hh_config** out);
hh_status hh_config_set(hh_config* cfg, const char* key, const char* value);
/* Resolved value of a key (defaults included), or NULL for unknown keys.
   The pointer stays valid until the next call on the same handle. */
const char* hh_config_get(hh_config* cfg, const char* key);
void hh_config_free(hh_config* cfg);

/* output_dir may be NULL: then $HHFLOW_OUTPUT_DIR, output.dir, out/<name>.
   *out is set even when the solver fails, so the artifacts can be located. */
hh_status hh_evolve(const hh_config* cfg, const char* output_dir, hh_run** out);
const char* hh_run_output_dir(const hh_run* run);
size_t hh_run_records(const hh_run* run);
double hh_run_final_time(const hh_run* run);
double hh_run_final_energy(const hh_run* run);
double hh_run_wall_time(const hh_run* run);
const char* hh_run_calibration_source(const hh_run* run);
void hh_run_free(hh_run* run);

/* suite: "identity", "geometry" or "crossform". Returns HH_ERR_CHECK (with
   *out set) when a check fails. When output_dir is non-NULL or the
   environment override is set, the report is also written there as
   check_<suite>_M<M>.json. */
hh_status hh_check(const char* suite, int M, uint64_t seed, const char* output_dir, hh_report** out);
int hh_report_passed(const hh_report* report);
size_t hh_report_count(const hh_report* report);
/* Fills the fields of check i; name stays owned by the report. */
hh_status hh_report_check(const hh_report* report, size_t i, const char** name, double* value, double* threshold,
                          int* pass);
const char* hh_report_json(const hh_report* report);
void hh_report_free(hh_report* report);

/* Writes calibration.json into output_dir (NULL: env override, then "out"). */
hh_status hh_calibrate(const double* s, size_t ns, const int* M, size_t nM, const char* output_dir,
                       hh_calibration** out);
size_t hh_calibration_count(const hh_calibration* table);
hh_status hh_calibration_entry(const hh_calibration* table, size_t i, double* s, int* M, double* c_disc,
                               double* c_dual);
const char* hh_calibration_json(const hh_calibration* table);
void hh_calibration_free(hh_calibration* table);

#ifdef __cplusplus
}
#endif

#endif
