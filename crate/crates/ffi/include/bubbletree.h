#ifndef BUBBLETREE_H
#define BUBBLETREE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum BtStatus {
  Ok = 0,
  NullArgument = 1,
  InvalidUtf8 = 2,
  Io = 3,
  Config = 4,
  Analysis = 5,
  Numeric = 6,
} BtStatus;

/**
 * Opaque sequence handle.
 */
typedef struct BtSequence BtSequence;

/**
 * Opaque tree handle (keeps the sequence it was built from for the
 * decomposition and accounting calls).
 */
typedef struct BtTree BtTree;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread, or null.
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *bt_last_error_message(void);

/**
 * Load a sequence from a BTSEQ file. Returns null on failure.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string.
 */
struct BtSequence *bt_sequence_load(const char *path);

/**
 * Generate a sequence from scenario text containing `[domain]` and
 * `[sequence]` sections. Returns null on failure.
 *
 * # Safety
 * `config_text` must be a valid NUL-terminated string.
 */
struct BtSequence *bt_sequence_generate(const char *config_text);

/**
 * Save a sequence as a BTSEQ file.
 *
 * # Safety
 * `seq` must be a live handle from this library; `path` a valid string.
 */
enum BtStatus bt_sequence_save(const struct BtSequence *seq, const char *path);

/**
 * Number of frames in a sequence, or -1 on a null handle.
 *
 * # Safety
 * `seq` must be a live handle from this library (or null).
 */
int bt_sequence_frame_count(const struct BtSequence *seq);

/**
 * Area and energy of one frame over the whole chart.
 *
 * # Safety
 * `seq` must be a live handle; `out_area`/`out_energy` valid pointers.
 */
enum BtStatus bt_sequence_functionals(const struct BtSequence *seq,
                                      int frame,
                                      double *out_area,
                                      double *out_energy);

/**
 * Build the bubble tree of a sequence. `analysis_text` may be null (library
 * defaults) or a config snippet with an `[analysis]` section.
 *
 * # Safety
 * `seq` must be a live handle; `analysis_text` null or a valid string.
 */
struct BtTree *bt_tree_build(const struct BtSequence *seq, const char *analysis_text);

/**
 * Vertex count of a tree, or -1 on a null handle.
 *
 * # Safety
 * `tree` must be a live handle from this library (or null).
 */
int bt_tree_vertex_count(const struct BtTree *tree);

/**
 * Edge count of a tree, or -1 on a null handle.
 *
 * # Safety
 * `tree` must be a live handle from this library (or null).
 */
int bt_tree_edge_count(const struct BtTree *tree);

/**
 * Tree document in the pinned JSON schema. Free with [`bt_string_free`].
 *
 * # Safety
 * `tree` must be a live handle from this library.
 */
char *bt_tree_to_json(const struct BtTree *tree);

/**
 * Thick-thin decomposition as JSON. Free with [`bt_string_free`].
 *
 * # Safety
 * `tree` must be a live handle from this library.
 */
char *bt_thick_thin_json(const struct BtTree *tree, double eps);

/**
 * Mass-accounting report as JSON. Free with [`bt_string_free`].
 *
 * # Safety
 * `tree` must be a live handle from this library.
 */
char *bt_mass_accounting_json(const struct BtTree *tree);

/**
 * Run a scenario file end to end. Returns the same codes as the CLI's exit
 * status: 0 ok, 2 config error, 3 analysis assertion failure, 1 otherwise.
 *
 * # Safety
 * `path` must be a valid string; `out_dir` null or a valid string.
 */
int bt_run_scenario(const char *path, const char *out_dir);

/**
 * Release a string returned by this library.
 *
 * # Safety
 * `s` must come from a `*_json` function of this library (or be null).
 */
void bt_string_free(char *s);

/**
 * Release a sequence handle.
 *
 * # Safety
 * `seq` must come from this library (or be null) and not be used afterwards.
 */
void bt_sequence_free(struct BtSequence *seq);

/**
 * Release a tree handle.
 *
 * # Safety
 * `tree` must come from this library (or be null) and not be used afterwards.
 */
void bt_tree_free(struct BtTree *tree);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* BUBBLETREE_H */
