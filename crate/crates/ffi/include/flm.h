#ifndef FLM_H
#define FLM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Pass as `start_level` to start from a uniformly random search point.
 */
#define FLM_START_RANDOM -1

typedef enum FlmStatus {
  FLM_STATUS_OK = 0,
  FLM_STATUS_NULL_POINTER = 1,
  FLM_STATUS_INVALID_PARAMETER = 2,
  FLM_STATUS_INVALID_PROBABILITY = 3,
  FLM_STATUS_DIMENSION_MISMATCH = 4,
  FLM_STATUS_INVALID_DISTRIBUTION = 5,
  FLM_STATUS_ABSORBING_LEVEL = 6,
  FLM_STATUS_TOO_LARGE = 7,
  FLM_STATUS_SINGULAR_SYSTEM = 8,
  FLM_STATUS_PRECONDITIONS = 9,
  FLM_STATUS_BUFFER_TOO_SMALL = 10,
  FLM_STATUS_INTERNAL = 11,
  FLM_STATUS_PANIC = 12,
} FlmStatus;

typedef enum FlmBoundKind {
  FLM_BOUND_KIND_UPPER = 0,
  FLM_BOUND_KIND_LOWER = 1,
  FLM_BOUND_KIND_EXACT = 2,
} FlmBoundKind;

typedef enum FlmBenchmarkKind {
  FLM_BENCHMARK_KIND_ONE_MAX = 0,
  FLM_BENCHMARK_KIND_LEADING_ONES = 1,
  FLM_BENCHMARK_KIND_JUMP = 2,
  FLM_BENCHMARK_KIND_LONG_PATH = 3,
} FlmBenchmarkKind;

/**
 * Opaque benchmark function.
 */
typedef struct FlmBenchmark FlmBenchmark;

/**
 * Opaque level chain.
 */
typedef struct FlmLevelChain FlmLevelChain;

typedef struct FlmBound {
  double value;
  enum FlmBoundKind kind;
  /**
   * The raw formula was negative and the value was clamped to 0.
   */
  bool clamped;
  /**
   * False for reference values without a proof.
   */
  bool proven;
} FlmBound;

typedef struct FlmOneMaxBounds {
  double tilde_t;
  double tilde_t_plus;
  double tilde_t_minus;
  double thm_lower;
  bool thm_lower_clamped;
  double e_n;
} FlmOneMaxBounds;

typedef struct FlmJumpBounds {
  double p_k;
  double skip_bound_arbitrary;
  double skip_bound_random;
  double lower_bound_arbitrary;
  double lower_bound_random;
} FlmJumpBounds;

typedef struct FlmRunResult {
  uint64_t runtime;
  bool hit_optimum;
} FlmRunResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to fit) and returns the full message length without the NUL.
 */
size_t flm_last_error(char *buf, size_t len);

/**
 * Static description of a status code.
 */
const char *flm_status_name(enum FlmStatus status);

/**
 * Builds a chain from a `levels x levels` row-major transition matrix and a
 * start distribution of length `levels`.
 */
enum FlmStatus flm_chain_new(const double *transition,
                             const double *start,
                             size_t levels,
                             struct FlmLevelChain **out);

enum FlmStatus flm_chain_onemax(size_t n,
                                double p,
                                int64_t start_level,
                                struct FlmLevelChain **out);

enum FlmStatus flm_chain_leadingones(size_t n,
                                     double p,
                                     int64_t start_level,
                                     struct FlmLevelChain **out);

/**
 * Fitness-class chain of Jump: gap classes first, then the non-gap classes
 * by ones-count, then the optimum.
 */
enum FlmStatus flm_chain_jump(size_t n,
                              size_t k,
                              double p,
                              int64_t start_level,
                              struct FlmLevelChain **out);

void flm_chain_free(struct FlmLevelChain *chain);

/**
 * Number of levels including the top; 0 for a null handle.
 */
size_t flm_chain_levels(const struct FlmLevelChain *chain);

enum FlmStatus flm_chain_expected_time(const struct FlmLevelChain *chain, double *out_time);

/**
 * Writes `levels` visit probabilities.
 */
enum FlmStatus flm_chain_visit_probabilities(const struct FlmLevelChain *chain,
                                             double *out,
                                             size_t len);

/**
 * Writes the `levels - 1` leave probabilities of the non-top levels.
 */
enum FlmStatus flm_chain_leave_probabilities(const struct FlmLevelChain *chain,
                                             double *out,
                                             size_t len);

/**
 * Writes `levels` proven lower bounds on the visit probabilities computed
 * from the transition structure alone.
 */
enum FlmStatus flm_chain_visit_lower(const struct FlmLevelChain *chain, double *out, size_t len);

enum FlmStatus flm_bound_upper_classic(const double *p, size_t len, struct FlmBound *out);

enum FlmStatus flm_bound_lower_classic(const double *p,
                                       const double *start,
                                       size_t len,
                                       struct FlmBound *out);

enum FlmStatus flm_bound_lower_visit(const double *p_upper,
                                     const double *v_lower,
                                     size_t len,
                                     struct FlmBound *out);

enum FlmStatus flm_bound_upper_visit(const double *p_lower,
                                     const double *v_upper,
                                     size_t len,
                                     struct FlmBound *out);

enum FlmStatus flm_bound_lower_viscosity(const double *p,
                                         const double *gamma,
                                         double chi,
                                         const double *start,
                                         size_t len,
                                         struct FlmBound *out);

enum FlmStatus flm_bound_upper_viscosity(const double *p,
                                         const double *gamma,
                                         double chi,
                                         const double *start,
                                         size_t len,
                                         struct FlmBound *out);

enum FlmStatus flm_leadingones_exact(size_t n, double p, double *out_time);

enum FlmStatus flm_e_n(size_t n, double *out_value);

/**
 * OneMax bounds for going from fitness `k` to fitness `l` with rate `1/n`.
 */
enum FlmStatus flm_onemax_bounds(size_t n, size_t k, size_t l, struct FlmOneMaxBounds *out_bounds);

enum FlmStatus flm_jump_bounds(size_t n, size_t k, struct FlmJumpBounds *out_bounds);

/**
 * Lower bound for the long k-path started at its first point.
 */
enum FlmStatus flm_longpath_lower_bound(size_t n, size_t k, double p, struct FlmBound *out);

/**
 * `k` is the jump size or the path parameter; it is ignored for OneMax and
 * LeadingOnes.
 */
enum FlmStatus flm_benchmark_new(enum FlmBenchmarkKind kind,
                                 size_t n,
                                 size_t k,
                                 struct FlmBenchmark **out_ptr);

void flm_benchmark_free(struct FlmBenchmark *benchmark);

enum FlmStatus flm_benchmark_fitness(const struct FlmBenchmark *benchmark,
                                     const uint8_t *bits,
                                     size_t len,
                                     int64_t *out_fitness);

/**
 * One run of the (1+1) EA. `init` may be null for a uniformly random start,
 * otherwise it holds `n` bytes. `max_iterations == 0` means no budget.
 */
enum FlmStatus flm_run_ea(const struct FlmBenchmark *benchmark,
                          double p,
                          uint64_t seed,
                          uint64_t max_iterations,
                          const uint8_t *init,
                          struct FlmRunResult *out_result);

/**
 * Exact expected optimization time by solving the full Markov chain
 * (small `n` only). `init` as in [`flm_run_ea`].
 */
enum FlmStatus flm_full_state_expected_time(const struct FlmBenchmark *benchmark,
                                            double p,
                                            const uint8_t *init,
                                            double *out_time);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FLM_H */
