/* Exact recovery of a rank-1 hidden block through the C API.
 *
 *   cargo build -p egonet-ffi
 *   cc impute.c -I../../include -L../../../../target/debug -legonet_ffi -lm -o impute
 *   LD_LIBRARY_PATH=../../../../target/debug ./impute
 */
#include <math.h>
#include <stdio.h>

#include "egonet.h"

static int check(EgonetStatus s, const char *what) {
    if (s != EGONET_STATUS_OK) {
        fprintf(stderr, "%s failed (%d): %s\n", what, (int)s, egonet_last_error_message());
        return 1;
    }
    return 0;
}

int main(void) {
    const double x[5] = {0.9, 0.5, 0.7, 0.3, 0.6};
    double a11[9], a12[6], p22[4];
    for (int i = 0; i < 3; i++) {
        for (int j = 0; j < 3; j++) a11[i * 3 + j] = x[i] * x[j];
        for (int j = 0; j < 2; j++) a12[i * 2 + j] = x[i] * x[3 + j];
    }

    EgonetMatrix *m11 = NULL, *m12 = NULL, *est = NULL;
    EgonetEgoView *view = NULL;
    if (check(egonet_matrix_new(3, 3, a11, &m11), "a11") ||
        check(egonet_matrix_new(3, 2, a12, &m12), "a12") ||
        check(egonet_ego_view_from_blocks(m11, m12, &view), "view") ||
        check(egonet_impute(view, EGONET_ESTIMATOR_LE, 1, true, &est), "impute") ||
        check(egonet_matrix_copy(est, p22, 4), "copy")) {
        return 1;
    }

    double worst = 0.0;
    for (int i = 0; i < 2; i++)
        for (int j = 0; j < 2; j++)
            worst = fmax(worst, fabs(p22[i * 2 + j] - x[3 + i] * x[3 + j]));
    printf("max error %.3g\n", worst);

    EgonetMatrix *bad = NULL;
    EgonetStatus s = egonet_le_impute(view, 7, true, &bad);
    printf("rank 7 -> status %d: %s\n", (int)s, egonet_last_error_message());

    egonet_matrix_free(est);
    egonet_ego_view_free(view);
    egonet_matrix_free(m11);
    egonet_matrix_free(m12);
    return worst < 1e-10 ? 0 : 1;
}
