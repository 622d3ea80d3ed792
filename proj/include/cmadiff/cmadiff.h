/* SPDX-FileCopyrightText: 2026 The cmadiff authors
 * SPDX-License-Identifier: Apache-2.0 */

#ifndef CMADIFF_CMADIFF_H
#define CMADIFF_CMADIFF_H

/* C interface to the cmadiff controllable protein sequence generator.
 *
 * All functions returning cmadiff_status set a thread-local error message
 * readable via cmadiff_last_error() on failure. Objects returned through
 * out-parameters are owned by the caller and released with the matching
 * _free function. Handles are opaque; NULL is never a valid handle.
 */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cmadiff_status {
  CMADIFF_OK = 0,
  CMADIFF_ERR_INVALID_ARGUMENT = 2,
  CMADIFF_ERR_IO = 3,
  CMADIFF_ERR_PARSE = 4,
  CMADIFF_ERR_CONFIG = 5,
  CMADIFF_ERR_SHAPE_MISMATCH = 6,
  CMADIFF_ERR_NUMERIC = 7,
  CMADIFF_ERR_INTERNAL = 8
} cmadiff_status;

/* Library semantic version, e.g. "0.1.0". */
const char* cmadiff_version(void);

/* Static name of a status code, e.g. "shape-mismatch". */
const char* cmadiff_status_string(cmadiff_status status);

/* Message of the calling thread's most recent failure; empty if none. */
const char* cmadiff_last_error(void);

/* Full command-line interface (subcommands: build-dataset, featurize,
 * train-cvae, train-aligner, train-diffusion, generate, evaluate, selftest).
 * Returns a process exit code. */
int cmadiff_main(int argc, const char* const* argv);

/* ---- amino-acid property table ------------------------------------- */

typedef struct cmadiff_table cmadiff_table;

/* Loads the embedded 20x16 descriptor table, or a CSV override when
 * csv_path is non-NULL. */
cmadiff_status cmadiff_table_open(const char* csv_path, cmadiff_table** out);
void cmadiff_table_free(cmadiff_table* table);

/* ---- trained generation pipeline ------------------------------------ */

typedef struct cmadiff_pipeline cmadiff_pipeline;
typedef struct cmadiff_sequences cmadiff_sequences;

/* Opens the three trained checkpoints (CVAE, aligner, diffusion) plus the
 * property table (CSV override optional, NULL for embedded). */
cmadiff_status cmadiff_pipeline_open(const char* cvae_ckpt, const char* aligner_ckpt,
                                     const char* diffusion_ckpt, const char* table_csv,
                                     cmadiff_pipeline** out);
void cmadiff_pipeline_free(cmadiff_pipeline* pipeline);

/* Sequence generation under the three condition modes. min_len/max_len
 * bound the emitted length; results are deterministic per seed. */
cmadiff_status cmadiff_generate_random(cmadiff_pipeline* pipeline, uint64_t seed, int count,
                                       int min_len, int max_len, cmadiff_sequences** out);
cmadiff_status cmadiff_generate_text(cmadiff_pipeline* pipeline, const char* text,
                                     uint64_t seed, int count, int min_len, int max_len,
                                     cmadiff_sequences** out);
cmadiff_status cmadiff_generate_features(cmadiff_pipeline* pipeline, const double* features,
                                         size_t feature_count, uint64_t seed, int count,
                                         int min_len, int max_len, cmadiff_sequences** out);

size_t cmadiff_sequences_count(const cmadiff_sequences* sequences);
/* Borrowed pointer, valid until the set is freed; NULL when out of range. */
const char* cmadiff_sequences_get(const cmadiff_sequences* sequences, size_t index);
void cmadiff_sequences_free(cmadiff_sequences* sequences);

/* ---- sequence metrics ------------------------------------------------ */

cmadiff_status cmadiff_avg_hydrophobicity(const cmadiff_table* table, const char* sequence,
                                          double* out);
cmadiff_status cmadiff_net_charge(const char* sequence, double ph, double* out);
cmadiff_status cmadiff_isoelectric_point(const char* sequence, double* out);
cmadiff_status cmadiff_shannon_entropy(const char* const* sequences, size_t count, double* out);
cmadiff_status cmadiff_sequence_identity(const char* a, const char* b, double* out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* CMADIFF_CMADIFF_H */
