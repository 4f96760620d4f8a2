#ifndef CHANTOPO_H
#define CHANTOPO_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ChantopoStatus {
  CHANTOPO_STATUS_OK = 0,
  CHANTOPO_STATUS_NULL_ARGUMENT = 1,
  CHANTOPO_STATUS_INVALID_UTF8 = 2,
  CHANTOPO_STATUS_INVALID_ARGUMENT = 3,
  CHANTOPO_STATUS_IO = 4,
  CHANTOPO_STATUS_PARSE = 5,
  CHANTOPO_STATUS_NUMERICAL = 6,
  CHANTOPO_STATUS_INVALID_REGISTRY = 7,
  CHANTOPO_STATUS_OUT_OF_RANGE = 8,
  CHANTOPO_STATUS_PANIC = 9,
} ChantopoStatus;

typedef enum ChantopoFormat {
  CHANTOPO_FORMAT_JSON = 0,
  CHANTOPO_FORMAT_GRAPH_ML = 1,
  CHANTOPO_FORMAT_SVG = 2,
} ChantopoFormat;

/**
 * Loaded project table plus the registry used to read it.
 */
typedef struct ChantopoTable ChantopoTable;

/**
 * Result of a full pipeline run.
 */
typedef struct ChantopoTopology ChantopoTopology;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until
 * the next call into the library on the same thread.
 */
const char *chantopo_last_error(void);

/**
 * Static version string.
 */
const char *chantopo_version(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void chantopo_string_free(char *s);

/**
 * Reads a project CSV. `schema_path` and `registry_path` may be null for
 * the built-in libraries.io mapping and channel registry.
 *
 * # Safety
 * String arguments must be null or NUL-terminated; `out` must be writable.
 */
enum ChantopoStatus chantopo_table_load(const char *path,
                                        const char *schema_path,
                                        const char *registry_path,
                                        struct ChantopoTable **out);

/**
 * Number of projects, or 0 for a null handle.
 *
 * # Safety
 * `table` must be null or a live handle.
 */
size_t chantopo_table_len(const struct ChantopoTable *table);

/**
 * # Safety
 * `table` must be null or a live handle, not used afterwards.
 */
void chantopo_table_free(struct ChantopoTable *table);

/**
 * Default pipeline parameters as TOML, for editing and passing back.
 *
 * # Safety
 * `out` must be writable.
 */
enum ChantopoStatus chantopo_params_default(char **out);

/**
 * Runs the pipeline. `params_toml` may be null for defaults; unset keys
 * keep their defaults.
 *
 * # Safety
 * `table` must be a live handle, `params_toml` null or NUL-terminated,
 * `out` writable.
 */
enum ChantopoStatus chantopo_topology_build(const struct ChantopoTable *table,
                                            const char *params_toml,
                                            struct ChantopoTopology **out);

/**
 * # Safety
 * `topo` must be null or a live handle, not used afterwards.
 */
void chantopo_topology_free(struct ChantopoTopology *topo);

/**
 * Node, edge and component counts; any out pointer may be null.
 *
 * # Safety
 * `topo` must be a live handle; non-null outs must be writable.
 */
enum ChantopoStatus chantopo_topology_counts(const struct ChantopoTopology *topo,
                                             size_t *nodes,
                                             size_t *edges,
                                             size_t *components);

/**
 * Distinct points of the component of `rank` (1 = largest).
 *
 * # Safety
 * `topo` must be a live handle; `points` writable.
 */
enum ChantopoStatus chantopo_topology_component_points(const struct ChantopoTopology *topo,
                                                       size_t rank,
                                                       size_t *points);

/**
 * Serializes the nerve graph. Release the string with
 * [`chantopo_string_free`].
 *
 * # Safety
 * `topo` must be a live handle; `out` writable.
 */
enum ChantopoStatus chantopo_topology_export(const struct ChantopoTopology *topo,
                                             enum ChantopoFormat format,
                                             char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHANTOPO_H */
