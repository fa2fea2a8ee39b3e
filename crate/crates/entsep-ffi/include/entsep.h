/* C interface for the entsep library.
 *
 * Every fallible call returns an entsep_status and writes results through
 * out-pointers. States are opaque handles; strings returned through char**
 * are heap-allocated and must be released with entsep_string_free. The
 * last error message for the calling thread is available from
 * entsep_last_error_message until the next failing call.
 *
 * Kept in sync with crates/entsep-ffi/src/lib.rs by hand.
 */

#ifndef ENTSEP_H
#define ENTSEP_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct EntsepState EntsepState;

typedef enum entsep_status {
  ENTSEP_OK = 0,
  ENTSEP_ERR_INVALID_INPUT = 2,
  ENTSEP_ERR_PRECONDITION = 3,
  ENTSEP_ERR_NUMERICAL = 4,
  ENTSEP_ERR_NULL_POINTER = 5,
} entsep_status;

typedef enum entsep_class_label {
  ENTSEP_CLASS_SEPARABLE = 0,
  ENTSEP_CLASS_FREE_ENTANGLED = 1,
  ENTSEP_CLASS_PPT_ENTANGLED = 2,
  ENTSEP_CLASS_UNKNOWN = 3,
} entsep_class_label;

/* Library version as a static string; do not free. */
const char *entsep_version(void);

/* Last error message for this thread, or NULL. */
const char *entsep_last_error_message(void);

/* Build a state from a JSON family spec, e.g.
 * {"family":"stormer","alpha":3.5}. */
entsep_status entsep_state_from_spec_json(const char *spec_json,
                                          EntsepState **out);

/* Build a state from row-major interleaved [re, im] entries of an n x n
 * complex matrix, n = dim_a * dim_b, len = 2 * n * n. */
entsep_status entsep_state_from_matrix(size_t dim_a, size_t dim_b,
                                       const double *entries, size_t len,
                                       EntsepState **out);

void entsep_state_free(EntsepState *state);

entsep_status entsep_state_dims(const EntsepState *state, size_t *dim_a,
                                size_t *dim_b);

/* Minimum eigenvalue of the partial transpose; negative beyond tolerance
 * means the state is NPT (entangled). */
entsep_status entsep_ppt_min_eigenvalue(const EntsepState *state,
                                        double *out);

/* Singlet fraction F = <psi+|rho|psi+> (square bipartitions only). */
entsep_status entsep_singlet_fraction(const EntsepState *state, double *out);

/* Classification into separable / free entangled / PPT entangled /
 * unknown. projector_budget controls the stochastic distillability
 * search used for NPT states in higher dimensions. */
entsep_status entsep_classify(const EntsepState *state, uint64_t seed,
                              size_t projector_budget,
                              entsep_class_label *out);

/* Full criteria battery as the CLI's JSON report envelope. Free the
 * returned string with entsep_string_free. */
entsep_status entsep_analyze_json(const EntsepState *state, uint64_t seed,
                                  char **out_json);

void entsep_string_free(char *s);

/* Closed-form protocol steps. */
entsep_status entsep_bbpssw_step(double f, double *f_next,
                                 double *success_prob);
entsep_status entsep_activation_step(double f, double alpha, double *f_next,
                                     double *success_prob);
entsep_status entsep_teleportation_fidelity(double f_max, size_t d,
                                            double *out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* ENTSEP_H */
