#ifndef NETSYNC_H
#define NETSYNC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NsStatus {
  NS_STATUS_OK = 0,
  NS_STATUS_NULL_POINTER = 1,
  NS_STATUS_INVALID_UTF8 = 2,
  /**
   * Rejected input (config, dimensions, arguments).
   */
  NS_STATUS_VALIDATION = 3,
  /**
   * Blow-up or non-finite values during integration or sampling.
   */
  NS_STATUS_NUMERICAL = 4,
  /**
   * A hypothesis of the gain formulas does not hold.
   */
  NS_STATUS_HYPOTHESIS = 5,
  NS_STATUS_IO = 6,
  NS_STATUS_PANIC = 7,
  /**
   * Caller buffer too small.
   */
  NS_STATUS_BUFFER_TOO_SMALL = 8,
} NsStatus;

/**
 * Network built from an experiment config.
 */
typedef struct NsNetwork NsNetwork;

/**
 * Result of [`ns_simulate`].
 */
typedef struct NsTrajectory NsTrajectory;

typedef struct NsSyncReport {
  double terminal_e_tot;
  double tail_min_e_tot;
  double tail_max_e_tot;
  double threshold;
  double tail_fraction;
  bool synchronized;
} NsSyncReport;

typedef struct NsCriticalGains {
  double c_star;
  double c_d_star;
} NsCriticalGains;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call into this library from the same thread.
 */
const char *ns_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ns_version(void);

/**
 * Parses and validates an experiment config (JSON text) into a network handle.
 */
enum NsStatus ns_network_from_json(const char *json, struct NsNetwork **out);

/**
 * Releases a network handle. Null is ignored.
 */
void ns_network_free(struct NsNetwork *net);

/**
 * Writes the node count `N` and node dimension `n`.
 */
enum NsStatus ns_network_shape(const struct NsNetwork *net, size_t *node_count, size_t *dim);

/**
 * Integrates the configured experiment, keeping every `stride`-th sample
 * (`stride = 0` uses the config's output stride).
 */
enum NsStatus ns_simulate(const struct NsNetwork *net, size_t stride, struct NsTrajectory **out);

/**
 * Releases a trajectory handle. Null is ignored.
 */
void ns_trajectory_free(struct NsTrajectory *traj);

/**
 * Number of stored samples, or 0 for a null handle.
 */
size_t ns_trajectory_len(const struct NsTrajectory *traj);

/**
 * Length `N·n` of one stacked state, or 0 for a null handle.
 */
size_t ns_trajectory_state_len(const struct NsTrajectory *traj);

/**
 * Copies the sample times (`len` values).
 */
enum NsStatus ns_trajectory_copy_times(const struct NsTrajectory *traj,
                                       double *buf,
                                       size_t capacity);

/**
 * Copies the stacked states, row-major (`len · state_len` values).
 */
enum NsStatus ns_trajectory_copy_states(const struct NsTrajectory *traj,
                                        double *buf,
                                        size_t capacity);

/**
 * Copies `e_tot` at every stored sample (`len` values).
 */
enum NsStatus ns_trajectory_copy_e_tot(const struct NsTrajectory *traj,
                                       double *buf,
                                       size_t capacity);

/**
 * Synchronization verdict of the run (monitored at every integration step).
 */
enum NsStatus ns_trajectory_sync_report(const struct NsTrajectory *traj, struct NsSyncReport *out);

/**
 * Evaluates the critical-gain formulas. `p`, `gamma` and `gamma_d` are
 * row-major `dim × dim`; `m` has `dim` entries.
 */
enum NsStatus ns_critical_gains(double max_q_norm,
                                double lambda2,
                                const double *p,
                                const double *gamma,
                                const double *m,
                                double delta,
                                const double *gamma_d,
                                size_t dim,
                                struct NsCriticalGains *out);

/**
 * Certifies the network over the ball of radius `radius` using the config's
 * `certify` section, and returns the certificate as JSON. Free the string
 * with [`ns_string_free`].
 */
enum NsStatus ns_certify_json(const struct NsNetwork *net,
                              double radius,
                              uint64_t seed,
                              char **out);

/**
 * Releases a string returned by this library. Null is ignored.
 */
void ns_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NETSYNC_H */
