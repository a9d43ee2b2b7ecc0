#include <stdio.h>
#include "hitchin_lab.h"

int main(void) {
    HlGraph *g = NULL;
    if (hl_graph_new("theta", &g) != HL_STATUS_OK) return 1;
    size_t edges = 0, len = 0;
    hl_graph_edge_count(g, &edges);
    if (hl_labelings(g, 1, NULL, 0, &len) != HL_STATUS_BUFFER_TOO_SMALL) return 2;
    uint32_t buf[64];
    if (hl_labelings(g, 1, buf, 64, &len) != HL_STATUS_OK) return 3;
    printf("theta k=1: %zu labelings\n", len / edges);
    hl_graph_free(g);

    char msg[256];
    if (hl_graph_new("chain:1", &g) != HL_STATUS_INVALID_INPUT) return 4;
    if (hl_last_error_message(msg, sizeof msg, &len) != HL_STATUS_OK || len == 0) return 5;
    return 0;
}
