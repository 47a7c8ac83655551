#ifndef RELENT_H
#define RELENT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RelentStatus {
  RELENT_STATUS_OK = 0,
  // A certified inequality failed; outputs are still written.
  RELENT_STATUS_VIOLATION = 1,
  RELENT_STATUS_NULL_POINTER = 2,
  RELENT_STATUS_INVALID_ARGUMENT = 3,
  RELENT_STATUS_PARSE = 4,
  RELENT_STATUS_DIMENSION = 5,
  RELENT_STATUS_INVALID_STATE = 6,
  RELENT_STATUS_NUMERICAL = 7,
  RELENT_STATUS_PANIC = 8,
} RelentStatus;

typedef enum RelentMethod {
  RELENT_METHOD_SUPPORT = 0,
  RELENT_METHOD_REGULARIZED = 1,
  RELENT_METHOD_MODULAR = 2,
  RELENT_METHOD_FORM = 3,
} RelentMethod;

typedef enum RelentProof {
  RELENT_PROOF_PETZ = 0,
  RELENT_PROOF_UHLMANN = 1,
} RelentProof;

typedef enum RelentFigure {
  RELENT_FIGURE_JENSEN_INVERSE = 0,
  RELENT_FIGURE_JENSEN_LOG = 1,
} RelentFigure;

// Quantum channel handle.
typedef struct RelentChannel RelentChannel;

// Density operator handle.
typedef struct RelentState RelentState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until the next failing call.
const char *relent_last_error_message(void);

// # Safety
// `s` must come from this library, or be null.
void relent_string_free(char *s);

// Library version, static storage.
const char *relent_version(void);

// Parse a state from its JSON wire format.
//
// # Safety
// `json` must be a nul-terminated string; `out` must be writable.
enum RelentStatus relent_state_from_json(const char *json, struct RelentState **out);

// Build a state from row-major real and imaginary parts of a `dim × dim` matrix.
// `im` may be null for a real matrix.
//
// # Safety
// `re` (and `im` when non-null) must point to `dim * dim` doubles.
enum RelentStatus relent_state_from_parts(size_t dim,
                                          const double *re,
                                          const double *im,
                                          struct RelentState **out);

// Random state of the given rank from a seeded stream.
//
// # Safety
// `out` must be writable.
enum RelentStatus relent_state_random(size_t dim,
                                      size_t rank,
                                      uint64_t seed,
                                      struct RelentState **out);

// # Safety
// `state` must be a live handle.
enum RelentStatus relent_state_dim(const struct RelentState *state, size_t *out);

// # Safety
// `state` must be a live handle; free the result with [`relent_string_free`].
enum RelentStatus relent_state_to_json(const struct RelentState *state, char **out);

// # Safety
// `state` must come from this library and not be used afterwards. Null is ignored.
void relent_state_free(struct RelentState *state);

// Parse a channel from `{"kraus": [...], "d_in": n, "d_out": m}`.
//
// # Safety
// `json` must be a nul-terminated string; `out` must be writable.
enum RelentStatus relent_channel_from_json(const char *json, struct RelentChannel **out);

// Random channel `ℂ^dim → ℂ^dim` with `kraus_count` Kraus operators.
//
// # Safety
// `out` must be writable.
enum RelentStatus relent_channel_random(size_t dim,
                                        size_t kraus_count,
                                        uint64_t seed,
                                        struct RelentChannel **out);

// # Safety
// `channel` must come from this library and not be used afterwards. Null is ignored.
void relent_channel_free(struct RelentChannel *channel);

// `S(ρ‖σ)` in nats; `+INFINITY` on the support-violation branch.
//
// # Safety
// Handles must be live; `out` must be writable.
enum RelentStatus relent_relative_entropy(const struct RelentState *rho,
                                          const struct RelentState *sigma,
                                          enum RelentMethod method,
                                          double *out);

// Certify `S(𝒞ρ‖𝒞σ) ≤ S(ρ‖σ)`. Returns `Violation` when the certificate fails.
//
// # Safety
// Handles must be live; output pointers must be writable.
enum RelentStatus relent_dpi(const struct RelentState *rho,
                             const struct RelentState *sigma,
                             const struct RelentChannel *channel,
                             double *lhs,
                             double *rhs);

// Certify monotonicity under `Tr_b` on `ℂ^{d_a} ⊗ ℂ^{d_b}` and report
// `S(ρ‖σ) − S(Tr_b ρ‖Tr_b σ)` (`+INFINITY` when the full side diverges).
// When `certificate_json` is non-null it receives the full certificate.
//
// # Safety
// Handles must be live; `gap` must be writable.
enum RelentStatus relent_chain(const struct RelentState *rho,
                               const struct RelentState *sigma,
                               size_t d_a,
                               size_t d_b,
                               enum RelentProof proof,
                               double *gap,
                               char **certificate_json);

// CSV (`x,lhs,rhs,violation`) of a scalar counterexample over `grid`.
//
// # Safety
// `grid` must point to `n` doubles; free the result with [`relent_string_free`].
enum RelentStatus relent_figure_csv(enum RelentFigure which,
                                    double alpha,
                                    double xi,
                                    const double *grid,
                                    size_t n,
                                    char **out);

// Run a campaign given as TOML or JSON text. `jobs = 0` uses the default pool.
// Returns `Violation` when any instance failed.
//
// # Safety
// `config` must be a nul-terminated string; free `report_json` with [`relent_string_free`].
enum RelentStatus relent_campaign_run(const char *config,
                                      size_t jobs,
                                      char **report_json,
                                      size_t *fail_count);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RELENT_H */
