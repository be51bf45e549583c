#include <math.h>
#include <stdio.h>
#include "brinkmann.h"

static int check(BrkStatus s, BrkStatus want, const char *what) {
    if (s != want) {
        const char *e = brk_last_error();
        fprintf(stderr, "%s: status %d (%s)\n", what, (int)s, e ? e : "");
        return 1;
    }
    return 0;
}

int main(void) {
    const double box[6] = {-1, 1, -2, 2, -2, 2};
    BrkMetric *m = NULL;
    int bad = 0;
    bad |= check(brk_metric_new("x^2 - y^2", "0", "0", box, &m), BRK_STATUS_OK, "metric");
    bool flat = false;
    double viol = 1.0;
    bad |= check(brk_is_ricci_flat(m, &flat, &viol), BRK_STATUS_OK, "ricci flat");
    if (!flat) bad = 1;
    const double p[4] = {0, 0, 1, 0};
    double gam[64];
    bad |= check(brk_christoffel(m, p, gam), BRK_STATUS_OK, "christoffel");
    /* Gamma^x_{uu} = -dH/dx = -2 at x = 1 */
    if (fabs(gam[16 * 2] + 2.0) > 1e-12) bad = 1;
    brk_metric_free(m);

    BrkClassKind kind;
    double lam[2];
    bad |= check(brk_classify("x^2 - y^2", box, 1e-8, &kind, lam), BRK_STATUS_OK, "classify");
    if (kind != BRK_CLASS_KIND_CAHEN_WALLACH || lam[0] != 2.0 || lam[1] != -2.0) bad = 1;

    BrkCertificate *c = NULL;
    bad |= check(brk_certificate_new("x^2 - y^2", 0, 3, 1, 5, &c), BRK_STATUS_NO_WITNESS, "no witness");
    bad |= check(brk_metric_new("x +", "0", "0", box, &m), BRK_STATUS_PARSE, "parse error");
    printf("brinkmann %s: %s\n", brk_version(), bad ? "FAIL" : "ok");
    return bad;
}
