#ifndef SWARMFIELD_H
#define SWARMFIELD_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SF_API __declspec(dllexport)
#else
#define SF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sf_status
{
  SF_OK = 0,
  SF_ERR_PARSE = 1,
  SF_ERR_VALIDATION = 2,
  SF_ERR_IO = 3,
  SF_ERR_NUMERIC = 4,
  SF_ERR_ARGUMENT = 5,
  SF_ERR_INTERNAL = 6
} sf_status;

typedef enum sf_outcome
{
  SF_OUTCOME_SUCCESS = 0,
  SF_OUTCOME_CAP = 1,
  SF_OUTCOME_INCOMPLETE = 2
} sf_outcome;

typedef struct sf_config sf_config;
typedef struct sf_mission sf_mission;

typedef struct sf_mission_summary
{
  int outer_periods;
  size_t dataset_size;
  double final_sup_uncertainty;
  double initial_prediction_error;
  double final_prediction_error;
} sf_mission_summary;

/* Message of the last failed call on this thread ("" if none). */
SF_API const char* sf_last_error(void);
SF_API const char* sf_version(void);

SF_API sf_status sf_config_load(const char* path, sf_config** out);
/* Documented defaults (the values in configs/full.ini). */
SF_API sf_status sf_config_default(sf_config** out);
SF_API void sf_config_free(sf_config* cfg);
SF_API sf_status sf_config_set_seed(sf_config* cfg, uint64_t seed);
/* Writes 64 hex characters plus a terminating NUL. */
SF_API sf_status sf_config_hash(const sf_config* cfg, char out[65]);
/* Canonical text; *needed receives the size including the NUL. A null buf
   only queries the size; a buffer shorter than that is an argument error. */
SF_API sf_status sf_config_canonical(const sf_config* cfg, char* buf, size_t cap,
                                     size_t* needed);

/* On a mid-mission failure the partial log is still returned through *out
   (outcome SF_OUTCOME_INCOMPLETE) together with the error status. */
SF_API sf_status sf_mission_run(const sf_config* cfg, sf_mission** out);
SF_API sf_outcome sf_mission_outcome(const sf_mission* m);
SF_API sf_status sf_mission_summary_get(const sf_mission* m, sf_mission_summary* out);
SF_API sf_status sf_mission_export(const sf_mission* m, const char* dir);
SF_API void sf_mission_free(sf_mission* m);

/* One planner solve from density files (.csv or .json) over [0, period]. */
SF_API sf_status sf_plan_files(const sf_config* cfg, const char* p0_path,
                               const char* pf_path, const char* out_dir,
                               double* final_cost);

/* Density-level tracking run against a stationary uniform reference from a
   smooth initial perturbation, with estimate p(1 + eps); eps_mode is
   "smooth", "constant" or "none". Writes track.csv into out_dir. */
SF_API sf_status sf_track(const sf_config* cfg, double eps_mag, const char* eps_mode,
                          double horizon, const char* out_dir, double* final_ratio);

SF_API sf_status sf_export_plots(const char* mission_json_path, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif
