#ifndef LOCALFLOW_H
#define LOCALFLOW_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Use the k-commodity solver even for one commodity.
#define LF_SOLVE_MULTI 1

// Check the locality invariants every round.
#define LF_SOLVE_AUDIT 2

// Outcome of an interface call.
typedef enum LfStatus {
  LF_STATUS_OK = 0,
  LF_STATUS_NULL_POINTER = 1,
  LF_STATUS_INVALID_GRAPH = 2,
  LF_STATUS_INVALID_DEMAND = 3,
  LF_STATUS_INVALID_PARAMETER = 4,
  // The solver hit an internal consistency failure.
  LF_STATUS_INTERNAL = 5,
  LF_STATUS_PANIC = 6,
} LfStatus;

// What a solve produced.
typedef enum LfResultKind {
  LF_RESULT_KIND_FLOW = 0,
  LF_RESULT_KIND_CUT_CERTIFICATE = 1,
  LF_RESULT_KIND_POTENTIAL_CERTIFICATE = 2,
} LfResultKind;

// A k-commodity demand.
typedef struct LfDemand LfDemand;

// An undirected unit-capacity graph.
typedef struct LfGraph LfGraph;

// A flow or an infeasibility certificate, with run statistics.
typedef struct LfResult LfResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Builds a graph on `n` vertices from `m` edges stored as `2m` endpoints.
//
// # Safety
// `edges` must point to `2 * m` readable `uint32_t` values (or be null when
// `m` is 0); `out` must be writable.
enum LfStatus lf_graph_new(size_t n, const uint32_t *edges, size_t m, struct LfGraph **out);

// Parses a graph in the text format (`n m` header, then `u v` lines).
//
// # Safety
// `source` must be a NUL-terminated string; `out` must be writable.
enum LfStatus lf_graph_parse(const char *source, struct LfGraph **out);

// # Safety
// `graph` must be null or a handle from this library that was not yet freed.
void lf_graph_free(struct LfGraph *graph);

// Vertex count, or 0 for a null handle.
//
// # Safety
// `graph` must be null or a live handle.
size_t lf_graph_vertex_count(const struct LfGraph *graph);

// Edge count, or 0 for a null handle.
//
// # Safety
// `graph` must be null or a live handle.
size_t lf_graph_edge_count(const struct LfGraph *graph);

// An all-zero demand with `k ≥ 1` commodities.
//
// # Safety
// `out` must be writable.
enum LfStatus lf_demand_new(size_t k, struct LfDemand **out);

// Parses a demand file (`k` header, then 1-based `j v value` lines) against `graph`.
//
// # Safety
// `source` must be a NUL-terminated string, `graph` a live handle, `out` writable.
enum LfStatus lf_demand_parse(const char *source,
                              const struct LfGraph *graph,
                              struct LfDemand **out);

// Sets `b_commodity(vertex) = value`. Vertex range is checked at solve time.
//
// # Safety
// `demand` must be a live handle.
enum LfStatus lf_demand_set(struct LfDemand *demand,
                            size_t commodity,
                            uint32_t vertex,
                            double value);

// Number of commodities, or 0 for a null handle.
//
// # Safety
// `demand` must be null or a live handle.
size_t lf_demand_commodities(const struct LfDemand *demand);

// # Safety
// `demand` must be null or a handle from this library that was not yet freed.
void lf_demand_free(struct LfDemand *demand);

// Routes `demand` on `graph` up to residual `eps·deg(v)` or certifies that it
// cannot be routed. `flags` combines `LF_SOLVE_MULTI` and `LF_SOLVE_AUDIT`.
//
// # Safety
// `graph` and `demand` must be live handles; `out` must be writable.
enum LfStatus lf_solve(const struct LfGraph *graph,
                       const struct LfDemand *demand,
                       double eps,
                       uint32_t flags,
                       struct LfResult **out);

// # Safety
// `result` must be null or a handle from this library that was not yet freed.
void lf_result_free(struct LfResult *result);

// # Safety
// `result` must be a live handle.
enum LfStatus lf_result_kind(const struct LfResult *result, enum LfResultKind *out);

// Rounds run before the result was produced; 0 for a null handle.
//
// # Safety
// `result` must be null or a live handle.
size_t lf_result_iterations(const struct LfResult *result);

// Work units spent; 0 for a null handle.
//
// # Safety
// `result` must be null or a live handle.
uint64_t lf_result_total_work(const struct LfResult *result);

// Locality-audit violations recorded (only nonzero under `LF_SOLVE_AUDIT`).
//
// # Safety
// `result` must be null or a live handle.
size_t lf_result_audit_violations(const struct LfResult *result);

// `f̄_commodity(edge)`; zero for edges the flow does not use.
//
// # Safety
// `result` must be a live handle; `out` must be writable.
enum LfStatus lf_result_flow_value(const struct LfResult *result,
                                   size_t commodity,
                                   uint32_t edge,
                                   double *out);

// Copies the vertex set of a cut certificate into `buffer`.
//
// `*len` receives the set size even when `capacity` is too small, in which
// case nothing is copied and `InvalidParameter` is returned. Pass a null
// buffer with capacity 0 to query the size.
//
// # Safety
// `result` must be a live handle, `len` writable, and `buffer` valid for
// `capacity` writes when non-null.
enum LfStatus lf_result_cut_vertices(const struct LfResult *result,
                                     uint32_t *buffer,
                                     size_t capacity,
                                     size_t *len);

// The result as a JSON artifact, as written by the command-line tool.
// Release the string with [`lf_string_free`].
//
// # Safety
// `result` must be a live handle; `out` must be writable.
enum LfStatus lf_result_to_json(const struct LfResult *result, char **out);

// Checks a JSON artifact against `graph` and `demand`. `eps ≤ 0` uses the
// artifact's own tolerance. `*ok` is set only when the call succeeds.
//
// # Safety
// `graph`, `demand` must be live handles, `json` NUL-terminated, `ok` writable.
enum LfStatus lf_verify_json(const struct LfGraph *graph,
                             const struct LfDemand *demand,
                             const char *json,
                             double eps,
                             bool *ok);

// # Safety
// `s` must be null or a string returned by this library that was not yet freed.
void lf_string_free(char *s);

// Description of the last failure on this thread, or null if none. The
// pointer stays valid until the next failing call on the same thread.
const char *lf_last_error_message(void);

// Static name of a status code; "unknown" for values outside the enum.
const char *lf_status_name(int status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LOCALFLOW_H */
