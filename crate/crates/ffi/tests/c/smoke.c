#include <math.h>
#include <stdio.h>
#include "relent.h"

int main(void) {
    double p[4] = {0.5, 0.0, 0.0, 0.5};
    double q[4] = {0.75, 0.0, 0.0, 0.25};
    RelentState *rho = NULL, *sigma = NULL;
    if (relent_state_from_parts(2, p, NULL, &rho) != RELENT_STATUS_OK) return 10;
    if (relent_state_from_parts(2, q, NULL, &sigma) != RELENT_STATUS_OK) return 11;
    double s = 0.0;
    if (relent_relative_entropy(rho, sigma, RELENT_METHOD_SUPPORT, &s) != RELENT_STATUS_OK) return 12;
    if (fabs(s - 0.143841036226) > 1e-9) return 13;
    RelentState *bad = NULL;
    if (relent_state_from_json("not json", &bad) != RELENT_STATUS_PARSE) return 14;
    if (relent_last_error_message() == NULL) return 15;
    relent_state_free(rho);
    relent_state_free(sigma);
    printf("%.12f\n", s);
    return 0;
}
