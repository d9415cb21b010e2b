/* C interface to the consistency-constrained multitask classification
 * library. All functions return CONSIST_OK (0) on success; on failure a
 * nonzero code comes back and consist_last_error() gives a thread-local
 * human-readable message. Handles are opaque and must be released with
 * their matching _free function. */
#ifndef CONSIST_H
#define CONSIST_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum consist_status {
  CONSIST_OK = 0,
  CONSIST_ERR_IO = 1,
  CONSIST_ERR_PARSE = 2,
  CONSIST_ERR_INVALID_ARGUMENT = 3,
  CONSIST_ERR_RUN_FAILED = 4,
  CONSIST_ERR_INTERNAL = 5
} consist_status;

typedef enum consist_verdict {
  CONSIST_CONSISTENT = 0,
  CONSIST_INCOMPATIBLE = 1,
  CONSIST_INSUFFICIENT = 2,
  CONSIST_BOTH = 3
} consist_verdict;

typedef struct consist_spec consist_spec;

const char* consist_last_error(void);
const char* consist_status_name(consist_status status);

/* Constraint specs */
consist_status consist_spec_load(const char* path, consist_spec** out);
consist_status consist_spec_parse(const char* json_text, consist_spec** out);
void consist_spec_free(consist_spec* spec);
int consist_spec_num_classes(const consist_spec* spec);
int consist_spec_num_evidence(const consist_spec* spec);

/* Consistency of one assignment; z has num_evidence entries of +-1. */
consist_status consist_check(const consist_spec* spec, int y, const int8_t* z, int z_len,
                             consist_verdict* out);

/* Per-example inconsistency counts. */
consist_status consist_r1_example(const consist_spec* spec, int y, const int8_t* z, int z_len,
                                  int* out);
consist_status consist_r2_example(const consist_spec* spec, int y, const int8_t* z, int z_len,
                                  int* out);

/* File-driven commands mirroring the CLI. */
consist_status consist_cmd_validate(const char* spec_path, const char* predictions_path,
                                    const char* out_dir);
consist_status consist_cmd_gen(const char* config_path, const char* out_path);
consist_status consist_cmd_train(const char* spec_path, const char* data_path,
                                 const char* config_path, double omega1, double omega2,
                                 const char* mode, uint64_t seed, const char* out_dir);
consist_status consist_cmd_sweep(const char* grid_path, const char* out_dir);
consist_status consist_cmd_report(const char* const* inputs, int n_inputs, const char* out_path);

#ifdef __cplusplus
}
#endif

#endif /* CONSIST_H */
