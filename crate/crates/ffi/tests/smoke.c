#include <math.h>
#include <stdio.h>
#include <string.h>
#include "qklauder.h"

#define CHECK(cond) do { if (!(cond)) { fprintf(stderr, "failed: %s (%s)\n", #cond, qk_last_error()); return 1; } } while (0)

int main(void) {
    double q = exp(-0.005);
    QkRevivalTimes r;
    CHECK(qk_revival_times(q, 6.0, 1.0, 1.0, 1.0, &r) == QK_STATUS_OK);
    CHECK(fabs(r.t_cl - 6.65) < 0.01);

    QkState *s = NULL;
    CHECK(qk_state_new(q, 6.0, 0.0, 1.0, 1.0, 1.0, &s) == QK_STATUS_OK);
    QkUncertainty u;
    CHECK(qk_state_uncertainty(s, &u) == QK_STATUS_OK);
    CHECK(fabs(u.ratio - 1.0) < 1e-9);

    QkState *later = NULL;
    CHECK(qk_state_evolve(s, 2.0, &later) == QK_STATUS_OK);
    double p;
    CHECK(qk_state_expect_p(later, &p) == QK_STATUS_OK);
    CHECK(p != 0.0);
    qk_state_free(later);
    qk_state_free(s);

    double e;
    CHECK(qk_q_exponential(0.5, 6.0, &e) == QK_STATUS_DIVERGENCE);
    CHECK(strstr(qk_last_error(), "radius") != NULL);
    printf("ok\n");
    return 0;
}
