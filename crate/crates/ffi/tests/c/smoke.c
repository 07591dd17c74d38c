#include <stdio.h>
#include <string.h>
#include "localflow.h"

#define CHECK(call) do { enum LfStatus s_ = (call); if (s_ != LF_STATUS_OK) { \
    fprintf(stderr, "%s: %s (%s)\n", #call, lf_status_name(s_), lf_last_error_message()); return 1; } } while (0)

int main(void) {
    const uint32_t edges[] = {0, 1, 1, 2, 2, 3, 3, 4, 4, 5, 5, 0};
    struct LfGraph *g = NULL;
    struct LfDemand *d = NULL;
    struct LfResult *r = NULL;
    CHECK(lf_graph_new(6, edges, 6, &g));
    CHECK(lf_demand_new(1, &d));
    CHECK(lf_demand_set(d, 0, 0, 4.0));
    CHECK(lf_demand_set(d, 0, 3, -4.0));
    CHECK(lf_solve(g, d, 0.2, LF_SOLVE_AUDIT, &r));

    enum LfResultKind kind;
    CHECK(lf_result_kind(r, &kind));
    if (kind != LF_RESULT_KIND_CUT_CERTIFICATE) return 2;
    uint32_t set[6];
    size_t len = 0;
    CHECK(lf_result_cut_vertices(r, set, 6, &len));
    char *json = NULL;
    CHECK(lf_result_to_json(r, &json));
    bool ok = false;
    CHECK(lf_verify_json(g, d, json, 0.0, &ok));
    if (!ok) return 3;
    printf("cut of %zu vertices after %llu rounds\n", len, (unsigned long long)lf_result_iterations(r));
    lf_string_free(json);

    if (lf_demand_set(d, 5, 0, 1.0) != LF_STATUS_INVALID_PARAMETER) return 4;
    if (strlen(lf_last_error_message()) == 0) return 5;

    lf_result_free(r);
    lf_demand_free(d);
    lf_graph_free(g);
    return 0;
}
