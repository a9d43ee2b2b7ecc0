#ifndef HITCHIN_LAB_H
#define HITCHIN_LAB_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum HlStatus {
  HL_STATUS_OK = 0,
  HL_STATUS_NULL_POINTER = 1,
  HL_STATUS_INVALID_INPUT = 2,
  HL_STATUS_NUMERICAL = 3,
  HL_STATUS_PANIC = 4,
  HL_STATUS_BUFFER_TOO_SMALL = 5,
} HlStatus;

/**
 * A trivalent pants graph.
 */
typedef struct HlGraph HlGraph;

/**
 * A KZ system on invariant tensors of four irreps.
 */
typedef struct HlKzSystem HlKzSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Null-terminated version string with static lifetime.
 */
const char *hl_version(void);

/**
 * Copies the last error on this thread into `buf` (null-terminated).
 * `len_out` receives the message length without the terminator; it is 0
 * when the previous call succeeded.
 *
 * # Safety
 * `buf` must hold `cap` bytes; `len_out` must be writable.
 */
enum HlStatus hl_last_error_message(char *buf, size_t cap, size_t *len_out);

/**
 * Builds a graph from a file path, JSON text, or a preset name
 * (`theta`, `dumbbell`, `chain:<genus>`).
 *
 * # Safety
 * `source` must be a null-terminated string; `out` must be writable.
 */
enum HlStatus hl_graph_new(const char *source, struct HlGraph **out);

/**
 * # Safety
 * `graph` must come from [`hl_graph_new`] and not be used afterwards.
 */
void hl_graph_free(struct HlGraph *graph);

/**
 * # Safety
 * Pointers must be valid.
 */
enum HlStatus hl_graph_genus(const struct HlGraph *graph, size_t *out);

/**
 * # Safety
 * Pointers must be valid.
 */
enum HlStatus hl_graph_edge_count(const struct HlGraph *graph, size_t *out);

/**
 * Admissible labelings, one row of edge labels per labeling. `len_out`
 * receives the number of `u32` entries (rows times edge count).
 *
 * # Safety
 * `buf` must hold `cap` values; other pointers must be valid.
 */
enum HlStatus hl_labelings(const struct HlGraph *graph,
                           uint32_t level,
                           uint32_t *buf,
                           size_t cap,
                           size_t *len_out);

/**
 * Norms of the labeled basis vectors, in the order of [`hl_labelings`].
 *
 * # Safety
 * `buf` must hold `cap` values; other pointers must be valid.
 */
enum HlStatus hl_norms(const struct HlGraph *graph,
                       uint32_t level,
                       double *buf,
                       size_t cap,
                       size_t *len_out);

/**
 * # Safety
 * `out` must be writable.
 */
enum HlStatus hl_verlinde_number(uint32_t genus, uint32_t level, double *out);

/**
 * # Safety
 * `labels` must point to four values; `out` must be writable.
 */
enum HlStatus hl_kz_new(const uint32_t *labels, double coupling, struct HlKzSystem **out);

/**
 * # Safety
 * `sys` must come from [`hl_kz_new`] and not be used afterwards.
 */
void hl_kz_free(struct HlKzSystem *sys);

/**
 * Dimension of the invariant subspace.
 *
 * # Safety
 * Pointers must be valid.
 */
enum HlStatus hl_kz_dim(const struct HlKzSystem *sys, size_t *out);

/**
 * Transport along the polyline through `n_points` complex points. The
 * matrix is written as `dim * dim` interleaved complex entries.
 *
 * # Safety
 * `path` must hold `2 * n_points` values, `buf` `cap` values.
 */
enum HlStatus hl_kz_transport(const struct HlKzSystem *sys,
                              const double *path,
                              size_t n_points,
                              size_t steps,
                              double *buf,
                              size_t cap,
                              size_t *len_out,
                              double *halving_defect);

/**
 * Complex structure `I` of `Z = X + iY` as a real `2n x 2n` matrix.
 *
 * # Safety
 * `x`, `y` must hold `n * n` values, `out` `4 * n * n`.
 */
enum HlStatus hl_siegel_complex_structure(size_t n, const double *x, const double *y, double *out);

/**
 * Whether the graph of `X + iY` is transverse and whether it is totally
 * complex, for symmetric `X`, `Y` with `Y` possibly degenerate.
 *
 * # Safety
 * `x`, `y` must hold `n * n` values; out pointers must be writable.
 */
enum HlStatus hl_siegel_transversality(size_t n,
                                       const double *x,
                                       const double *y,
                                       bool *graph_transverse,
                                       bool *totally_complex);

/**
 * Transport `E(t)` of `E' = -(P + C s^alpha) E`, `E(t0) = Id`, as `n * n`
 * interleaved complex entries.
 *
 * # Safety
 * `p_inf`, `coeff` must hold `2 * n * n` values, `out` the same.
 */
enum HlStatus hl_dyson_power(size_t n,
                             const double *p_inf,
                             const double *coeff,
                             double alpha,
                             double t_min,
                             double t0,
                             double t,
                             double tol,
                             double *out);

/**
 * Largest residuals of the four-holed sphere and one-holed torus trace
 * identities over `draws` seeded Haar samples.
 *
 * # Safety
 * Out pointers must be writable.
 */
enum HlStatus hl_charvar_sample(uint64_t seed,
                                size_t draws,
                                double *max_sphere4,
                                double *max_torus);

/**
 * # Safety
 * `out` must be writable.
 */
enum HlStatus hl_torus_fiber_membership(double x, double y, double z, double c0, bool *out);

/**
 * `theta_j(z, tau)` at level `k` and its heat-equation residual.
 *
 * # Safety
 * Out pointers must be writable.
 */
enum HlStatus hl_theta(uint32_t j,
                       uint32_t k,
                       double tau_re,
                       double tau_im,
                       double z_re,
                       double z_im,
                       double *value,
                       double *heat_residual);

/**
 * Toeplitz matrix of a registry function at level `k`, as `(k+1)^2`
 * interleaved complex entries.
 *
 * # Safety
 * `name` must be null-terminated; `buf` must hold `cap` values.
 */
enum HlStatus hl_toeplitz(const char *name, uint32_t k, double *buf, size_t cap, size_t *len_out);

/**
 * Runs the acceptance suite; `passed` receives the number of passing
 * criteria and `total` their count.
 *
 * # Safety
 * Out pointers must be writable.
 */
enum HlStatus hl_accept(uint32_t *passed, uint32_t *total);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HITCHIN_LAB_H */
