#ifndef STPUF_STPUF_H
#define STPUF_STPUF_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(STPUF_BUILDING)
#    define STPUF_API __declspec(dllexport)
#  else
#    define STPUF_API __declspec(dllimport)
#  endif
#else
#  define STPUF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Nonzero values match the CLI exit codes. */
typedef enum stpuf_status {
  STPUF_OK = 0,
  STPUF_ERR_ARGUMENT = 2,
  STPUF_ERR_CONFIG = 3,
  STPUF_ERR_IO = 4,
  STPUF_ERR_GATE_STALLED = 5,
  STPUF_ERR_CALIBRATION_RANGE = 6,
  STPUF_ERR_CALIBRATION_INFEASIBLE = 7,
  STPUF_ERR_PROTOCOL = 8,
  STPUF_ERR_INTERNAL = 9
} stpuf_status;

/* Holds one experiment configuration. Not safe for concurrent mutation. */
typedef struct stpuf_context stpuf_context;

STPUF_API const char* stpuf_version(void);
STPUF_API const char* stpuf_status_name(int status);
/* Message of the last failure on the calling thread ("" if none). */
STPUF_API const char* stpuf_last_error(void);

/* Strings returned through char** are owned by the caller. */
STPUF_API void stpuf_string_free(char* s);

STPUF_API stpuf_status stpuf_context_create(stpuf_context** out);
STPUF_API stpuf_status stpuf_context_load(const char* path, stpuf_context** out);
STPUF_API stpuf_status stpuf_context_from_json(const char* json_text, stpuf_context** out);
STPUF_API void stpuf_context_destroy(stpuf_context* ctx);

STPUF_API stpuf_status stpuf_context_save(const stpuf_context* ctx, const char* path);
STPUF_API stpuf_status stpuf_context_to_json(const stpuf_context* ctx, char** json_out);
/* Writes 16 hex digits plus a terminator; `len` must be at least 17. */
STPUF_API stpuf_status stpuf_context_hash(const stpuf_context* ctx, char* buf, size_t len);
STPUF_API stpuf_status stpuf_context_seed(const stpuf_context* ctx, uint64_t* seed);
STPUF_API stpuf_status stpuf_context_set_seed(stpuf_context* ctx, uint64_t seed);

STPUF_API stpuf_status stpuf_parse_duration(const char* text, double* seconds);
STPUF_API stpuf_status stpuf_sensitivity_ratio(const stpuf_context* ctx, double delta_vth, double* out);

/* Runs a named pipeline (fig1, fig2b, fig4a, fig4b, fig4c, fig5, fig6e, nist)
   into `out_dir`. `summary_json` may be NULL. */
STPUF_API stpuf_status stpuf_run_experiment(const stpuf_context* ctx, const char* name,
                                            const char* out_dir, char** summary_json);

/* Fits the free constants with the built-in targets and replaces the
   context's configuration with the result (provenance included). */
STPUF_API stpuf_status stpuf_calibrate(stpuf_context* ctx, char** report_json);

/* `usages` and `variants` are comma-separated; NULL or "" selects the
   configured defaults. `histogram_csv` may be NULL. */
STPUF_API stpuf_status stpuf_sensor_sim(const stpuf_context* ctx, const char* usages,
                                        const char* variants, const char* out_csv,
                                        const char* histogram_csv, char** summary_json);

typedef struct stpuf_arbiter_options {
  int stages;
  const char* kind; /* "inv" or "st" */
  int chips;
  int challenges;
  int repeats;
  int noise; /* nonzero: configured environmental noise */
} stpuf_arbiter_options;

STPUF_API void stpuf_arbiter_options_default(stpuf_arbiter_options* o);
STPUF_API stpuf_status stpuf_arbiter_sim(const stpuf_context* ctx, const stpuf_arbiter_options* o,
                                         const char* out_path, char** summary_json);

typedef struct stpuf_sram_options {
  const char* kinds; /* comma-separated "6t,8t,7t"; NULL or "" for all */
  int rows;
  int cols;
  double vdd_lo;
  double vdd_hi;
  double vdd_step;
  int cycles;
} stpuf_sram_options;

STPUF_API void stpuf_sram_options_default(stpuf_sram_options* o);
STPUF_API stpuf_status stpuf_sram_sim(const stpuf_context* ctx, const stpuf_sram_options* o,
                                      const char* out_csv, const char* fingerprint_path,
                                      char** summary_json);

/* Reads a CRP dataset, or a raw bit file when `bit_file` is nonzero.
   `report_path` may be NULL. */
STPUF_API stpuf_status stpuf_metrics_report(const stpuf_context* ctx, const char* in_path,
                                            int bit_file, const char* report_path,
                                            char** report_json);

typedef struct stpuf_nist_row {
  char test_name[48];
  double p_value;
  int pass;
  int insufficient_data;
} stpuf_nist_row;

/* `bits` holds one 0/1 value per byte. Fills up to `capacity` rows and
   reports the suite's row count through `count`. */
STPUF_API stpuf_status stpuf_nist_suite(const stpuf_context* ctx, const uint8_t* bits, size_t n,
                                        stpuf_nist_row* rows, size_t capacity, size_t* count);

STPUF_API stpuf_status stpuf_hamming_distance(const uint8_t* a, const uint8_t* b, size_t n,
                                              size_t* out);

#ifdef __cplusplus
}
#endif

#endif
