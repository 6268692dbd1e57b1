#ifndef MMAB_H
#define MMAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  MMAB_STATUS_OK = 0,
  MMAB_STATUS_NULL_POINTER = 1,
  MMAB_STATUS_INVALID_ARGUMENT = 2,
  MMAB_STATUS_CONSTRAINT_VIOLATED = 3,
  MMAB_STATUS_SIMULATION_FAILED = 4,
  MMAB_STATUS_BUFFER_TOO_SMALL = 5,
  MMAB_STATUS_PANIC = 6,
} MmabStatus;

typedef struct MmabEnv MmabEnv;

typedef struct MmabGraph MmabGraph;

typedef struct MmabTrajectory MmabTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message, NUL-terminated, into
 * `buf` and returns the full message length excluding the terminator.
 * Pass a null `buf` to query the length.
 */
size_t mmab_last_error(char *buf, size_t len);

MmabStatus mmab_graph_complete(size_t nodes, MmabGraph **out);

MmabStatus mmab_graph_path(size_t nodes, MmabGraph **out);

/**
 * Nodes `0..q` form one clique, the rest another.
 */
MmabStatus mmab_graph_disconnected_clique(size_t m, size_t q, MmabGraph **out);

MmabStatus mmab_graph_two_expander(size_t m, double eta, MmabGraph **out);

MmabStatus mmab_graph_erdos_renyi(size_t nodes, double c, uint64_t seed, MmabGraph **out);

/**
 * Parses the 1-indexed edge-list text format.
 */
MmabStatus mmab_graph_from_edge_list(const char *text, MmabGraph **out);

void mmab_graph_free(MmabGraph *g);

MmabStatus mmab_graph_node_count(const MmabGraph *g, size_t *out);

MmabStatus mmab_graph_has_edge(const MmabGraph *g, size_t i, size_t j, bool *out);

MmabStatus mmab_graph_is_connected(const MmabGraph *g, bool *out);

/**
 * Writes the row-major `n x n` Metropolis weight matrix.
 */
MmabStatus mmab_graph_metropolis_weights(const MmabGraph *g, double *out, size_t len);

/**
 * Builds an environment from an instance spec such as `thm4(8, 1, 0.4)`.
 * `horizon` is used by horizon-dependent instances; `run_seed` drives any
 * latent draws. Violated instance constraints return
 * `ConstraintViolated`.
 */
MmabStatus mmab_env_from_spec(const char *spec, uint64_t horizon, uint64_t run_seed, MmabEnv **out);

void mmab_env_free(MmabEnv *e);

MmabStatus mmab_env_client_count(const MmabEnv *e, size_t *out);

MmabStatus mmab_env_arm_count(const MmabEnv *e, size_t *out);

/**
 * Writes global means and gaps (`arms` values each) and the 0-based
 * optimal arm.
 */
MmabStatus mmab_env_global_stats(const MmabEnv *e,
                                 double *means,
                                 double *gaps,
                                 size_t arms,
                                 size_t *optimal_arm);

/**
 * Simulates `horizon` steps on a static graph. `policy` is a spec such as
 * `gossip_ucb(C=2)`, `exp3_gossip` or `fixed(1)` (1-based arm).
 */
MmabStatus mmab_run(const MmabEnv *env,
                    const MmabGraph *graph,
                    const char *policy,
                    uint64_t horizon,
                    uint64_t run_seed,
                    MmabTrajectory **out);

void mmab_trajectory_free(MmabTrajectory *t);

MmabStatus mmab_trajectory_final_regret(const MmabTrajectory *t, double *out);

/**
 * Writes the cumulative pseudo-regret after each of the `horizon` steps.
 */
MmabStatus mmab_trajectory_regret_curve(const MmabTrajectory *t, double *out, size_t len);

MmabStatus mmab_trajectory_disagreement_steps(const MmabTrajectory *t, uint64_t *out);

/**
 * Writes pull counts, row-major by client then arm.
 */
MmabStatus mmab_trajectory_pull_counts(const MmabTrajectory *t, uint64_t *out, size_t len);

MmabStatus mmab_kl_bernoulli(double p, double q, double *out);

MmabStatus mmab_per_step_kl(double eps, double *out);

MmabStatus mmab_exact_tv(double eps, uint32_t d, double *out);

/**
 * Least-squares fit of `log R = alpha log T + b` over horizons of at least
 * 1024 with positive mean regret.
 */
MmabStatus mmab_fit_scaling_exponent(const uint64_t *horizons,
                                     const double *means,
                                     size_t n,
                                     double *alpha,
                                     double *prefactor,
                                     double *r2);

uint64_t mmab_derive_run_seed(uint64_t master, uint64_t horizon_index, uint64_t seed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MMAB_H */
