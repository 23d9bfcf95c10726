#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include "openqs.h"

static const char *CONFIG =
    "[grids.system]\nn = 16\nlength = 10.0\n"
    "[grids.environment]\nn = 16\nlength = 10.0\n"
    "[hamiltonian]\npreset = \"coupled_harmonic\"\nparams = { lambda = 0.5 }\n"
    "[initial.system]\ncenter = 1.0\n"
    "[evolution]\nt = 1.0\nsteps = 50\n";

#define CHECK(call)                                                          \
    do {                                                                     \
        OqsStatus s_ = (call);                                               \
        if (s_ != OQS_STATUS_OK) {                                           \
            fprintf(stderr, "%s -> %d: %s\n", #call, s_, oqs_last_error());  \
            return 1;                                                        \
        }                                                                    \
    } while (0)

int main(void) {
    OqsScenario *sc = NULL;
    OqsState *st = NULL;
    OqsDensity *rho = NULL;
    size_t n1 = 0, n2 = 0;
    double p0 = 0.0, p1 = 0.0, ck = 1.0;

    CHECK(oqs_scenario_from_toml(CONFIG, NULL, &sc));
    CHECK(oqs_scenario_dims(sc, &n1, &n2));
    CHECK(oqs_scenario_initial_state(sc, &st));
    CHECK(oqs_reduced_density(st, &rho));
    CHECK(oqs_density_purity(rho, &p0));
    oqs_density_free(rho);
    CHECK(oqs_evolve(sc, st, 1.0, 50));
    CHECK(oqs_reduced_density(st, &rho));
    CHECK(oqs_density_purity(rho, &p1));
    CHECK(oqs_chapman_kolmogorov(st, &ck));

    double *w = malloc(sizeof(double) * n1 * n1);
    double *q = malloc(sizeof(double) * n1);
    double *p = malloc(sizeof(double) * n1);
    CHECK(oqs_reduced_wigner(rho, q, p, w, n1, n1 * n1));
    double mass = 0.0;
    for (size_t i = 0; i < n1 * n1; i++) mass += w[i];
    mass *= (q[1] - q[0]) * (p[1] - p[0]);

    if (oqs_reduced_wigner(rho, q, p, w, n1 + 1, n1 * n1) != OQS_STATUS_SHAPE) return 2;
    if (oqs_density_purity(NULL, &p0) != OQS_STATUS_NULL_POINTER) return 3;

    printf("version=%s n1=%zu n2=%zu purity0=%.12f purity1=%.12f ck=%.3e mass=%.12f\n",
           oqs_version(), n1, n2, p0, p1, ck, mass);
    free(w); free(q); free(p);
    oqs_density_free(rho);
    oqs_state_free(st);
    oqs_scenario_free(sc);
    return (fabs(mass - 1.0) < 1e-8 && ck < 1e-12 && p1 < 0.999) ? 0 : 4;
}
