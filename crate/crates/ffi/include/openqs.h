#ifndef OPENQS_H
#define OPENQS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Result code of every fallible call.
 */
enum OqsStatus
#ifdef __cplusplus
  : int32_t
#endif // __cplusplus
 {
  OQS_STATUS_OK = 0,
  OQS_STATUS_NULL_POINTER = 1,
  /**
   * Malformed configuration or argument.
   */
  OQS_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Array length or grid mismatch.
   */
  OQS_STATUS_SHAPE = 3,
  /**
   * Allocation cap exceeded.
   */
  OQS_STATUS_RESOURCE = 4,
  /**
   * Norm drift, failed eigensolve or zero-mass sampling.
   */
  OQS_STATUS_NUMERICAL = 5,
  OQS_STATUS_INVALID_DENSITY = 6,
  OQS_STATUS_IO = 7,
  /**
   * A Rust panic was caught at the boundary.
   */
  OQS_STATUS_INTERNAL = 8,
};
#ifndef __cplusplus
typedef int32_t OqsStatus;
#endif // __cplusplus

/**
 * Density operator of the system.
 */
typedef struct OqsDensity OqsDensity;

/**
 * Scenario parsed from TOML: grids, Hamiltonian, initial state, options.
 */
typedef struct OqsScenario OqsScenario;

/**
 * Composite wavefunction on the product lattice.
 */
typedef struct OqsState OqsState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next `oqs_*` call on the thread.
 */
const char *oqs_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *oqs_version(void);

/**
 * Parses a scenario. `base_dir` (nullable) resolves relative CSV paths.
 *
 * # Safety
 * `toml` must be a NUL-terminated string, `base_dir` null or one, and `out`
 * a valid pointer.
 */
OqsStatus oqs_scenario_from_toml(const char *toml, const char *base_dir, struct OqsScenario **out);

/**
 * # Safety
 * `s` must be null or a handle from [`oqs_scenario_from_toml`], freed once.
 */
void oqs_scenario_free(struct OqsScenario *s);

/**
 * Lattice sizes `(n1, n2)` of system and environment.
 *
 * # Safety
 * All pointers must be valid.
 */
OqsStatus oqs_scenario_dims(const struct OqsScenario *s, uintptr_t *n1, uintptr_t *n2);

/**
 * A fresh copy of the configured initial state.
 *
 * # Safety
 * All pointers must be valid.
 */
OqsStatus oqs_scenario_initial_state(const struct OqsScenario *s, struct OqsState **out);

/**
 * Builds a state on the scenario lattices from `2·n1·n2` interleaved doubles.
 * The amplitudes are normalized to unit mass.
 *
 * # Safety
 * `amplitudes` must point to `len` readable doubles.
 */
OqsStatus oqs_state_from_amplitudes(const struct OqsScenario *s,
                                    const double *amplitudes,
                                    uintptr_t len,
                                    struct OqsState **out);

/**
 * # Safety
 * `st` must be null or a state handle, freed once.
 */
void oqs_state_free(struct OqsState *st);

/**
 * Copies `2·n1·n2` interleaved doubles into `out`.
 *
 * # Safety
 * `out` must point to `len` writable doubles.
 */
OqsStatus oqs_state_copy_amplitudes(const struct OqsState *st, double *out, uintptr_t len);

/**
 * Advances `st` in place by `steps` product steps over total time `t`,
 * using the scenario Hamiltonian, splitting and sign.
 *
 * # Safety
 * All pointers must be valid.
 */
OqsStatus oqs_evolve(const struct OqsScenario *s, struct OqsState *st, double t, uintptr_t steps);

/**
 * Reduced density operator of the system.
 *
 * # Safety
 * All pointers must be valid.
 */
OqsStatus oqs_reduced_density(const struct OqsState *st, struct OqsDensity **out);

/**
 * Monte-Carlo estimate of the reduced density from `samples` conditional
 * states. `momentum` selects the environment representation. Writes the
 * Hilbert–Schmidt norm of the entrywise standard error to `stderr_norm`
 * when it is non-null.
 *
 * # Safety
 * `st` and `out` must be valid; `stderr_norm` may be null.
 */
OqsStatus oqs_mc_density(const struct OqsState *st,
                         uint64_t seed,
                         uintptr_t time_index,
                         uintptr_t samples,
                         bool momentum,
                         struct OqsDensity **out,
                         double *stderr_norm);

/**
 * # Safety
 * `d` must be null or a density handle, freed once.
 */
void oqs_density_free(struct OqsDensity *d);

/**
 * Lattice size of the density.
 *
 * # Safety
 * All pointers must be valid.
 */
OqsStatus oqs_density_dim(const struct OqsDensity *d, uintptr_t *n);

/**
 * Copies the kernel `ϱ(q_i, q_j)` (trace `Σ ϱ(q_i,q_i)Δq = 1`) as `2n²`
 * interleaved doubles.
 *
 * # Safety
 * `out` must point to `len` writable doubles.
 */
OqsStatus oqs_density_copy_kernel(const struct OqsDensity *d, double *out, uintptr_t len);

/**
 * `tr(ρ²)`.
 *
 * # Safety
 * All pointers must be valid.
 */
OqsStatus oqs_density_purity(const struct OqsDensity *d, double *out);

/**
 * Hilbert–Schmidt distance between two densities on the same lattice.
 *
 * # Safety
 * All pointers must be valid.
 */
OqsStatus oqs_density_distance(const struct OqsDensity *a, const struct OqsDensity *b, double *out);

/**
 * Wigner function of the density on its `n × n` phase-space lattice:
 * positions to `q` (n), ascending momenta to `p` (n), `W(q_k, p_j)` to `w`
 * (n², row-major in `k`).
 *
 * # Safety
 * `q`, `p` must hold `n` doubles and `w` must hold `len_w` doubles.
 */
OqsStatus oqs_reduced_wigner(const struct OqsDensity *d,
                             double *q,
                             double *p,
                             double *w,
                             uintptr_t n,
                             uintptr_t len_w);

/**
 * Largest deviation between the two ways of forming the system marginal
 * (directly, and through the environment law and conditional states).
 *
 * # Safety
 * All pointers must be valid.
 */
OqsStatus oqs_chapman_kolmogorov(const struct OqsState *st, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OPENQS_H */
