#ifndef LNORM_H
#define LNORM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum LnormShape {
  LNORM_SHAPE_L = 0,
  LNORM_SHAPE_C = 1,
  LNORM_SHAPE_CTR = 2,
} LnormShape;

typedef enum LnormStatus {
  LNORM_STATUS_OK = 0,
  LNORM_STATUS_NULL_POINTER = 1,
  LNORM_STATUS_INVALID_ARGUMENT = 2,
  LNORM_STATUS_LENGTH_MISMATCH = 3,
  LNORM_STATUS_NON_FINITE = 4,
  LNORM_STATUS_NEGATIVE_ENTRY = 5,
  LNORM_STATUS_DENSE_CAP = 6,
  LNORM_STATUS_OVERFLOW = 7,
  LNORM_STATUS_NO_VALID_EPSILON = 8,
  LNORM_STATUS_CONSISTENCY = 9,
  LNORM_STATUS_PANIC = 10,
} LnormStatus;

// Opaque matrix handle.
typedef struct LnormMatrix LnormMatrix;

typedef struct LnormEstimate {
  double value;
  double residual;
  double lower_certificate;
  size_t iterations;
  size_t truncation;
  bool converged;
} LnormEstimate;

typedef struct LnormLacunaryConstants {
  double b_n;
  double eta0;
  double eta_k;
  double eta_k_gap;
  double t_opt;
  double norm;
} LnormLacunaryConstants;

typedef struct LnormAsCertificate {
  double eps;
  double alpha;
  double beta;
  double ratio;
  double truncated_ratio;
  double tail;
  double image_discrepancy;
  bool pointwise_ok;
} LnormAsCertificate;

typedef struct LnormPnormCertificate {
  double ratio;
  double gamma_m;
  double norm_p_pow;
  double lower_bound_pow;
  double slack;
  bool self_bound_ok;
  bool upper_ok;
} LnormPnormCertificate;

typedef struct LnormLacunaryCertificate {
  double norm_sq;
  double ratio_sq;
  double limit_sq;
  double lower_bound_sq;
  bool bound_ok;
} LnormLacunaryCertificate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Matrix generated by `a_n = 1/(n+s)`.
//
// # Safety
// `out` must be valid for writes.
enum LnormStatus lnorm_matrix_new_as(enum LnormShape shape, double s, struct LnormMatrix **out);

// Same coefficients as [`lnorm_matrix_new_as`], labelled as the Cesàro family.
//
// # Safety
// `out` must be valid for writes.
enum LnormStatus lnorm_matrix_new_cesaro(enum LnormShape shape, double s, struct LnormMatrix **out);

// Lacunary generator `a_{N^j} = N^{-j/2}` (`j >= 1`), zero elsewhere.
//
// # Safety
// `out` must be valid for writes.
enum LnormStatus lnorm_matrix_new_lacunary(enum LnormShape shape,
                                           uint64_t base,
                                           struct LnormMatrix **out);

// Finite generator `values[0..len]`, zero beyond. The values are copied.
//
// # Safety
// `values` must point to `len` readable doubles; `out` must be valid for
// writes.
enum LnormStatus lnorm_matrix_new_custom(enum LnormShape shape,
                                         const double *values,
                                         size_t len,
                                         struct LnormMatrix **out);

// Releases a handle. Null is a no-op.
//
// # Safety
// `m` must be null or a handle not yet freed.
void lnorm_matrix_free(struct LnormMatrix *m);

// Entry `(i, j)` of the infinite matrix.
//
// # Safety
// `m` must be a live handle and `out` valid for writes.
enum LnormStatus lnorm_matrix_entry(const struct LnormMatrix *m,
                                    uint64_t i,
                                    uint64_t j,
                                    double *out);

// `y = A_len x` for the leading `len x len` section.
//
// # Safety
// `x` and `y` must each point to `len` doubles; they may not overlap.
enum LnormStatus lnorm_matrix_matvec(const struct LnormMatrix *m,
                                     const double *x,
                                     size_t len,
                                     double *y);

// `||A_M||_{2->2}` by power iteration. `tol <= 0` and `max_iter == 0`
// select the defaults.
//
// # Safety
// `m` must be a live handle and `out` valid for writes.
enum LnormStatus lnorm_norm2_power(const struct LnormMatrix *m,
                                   size_t truncation,
                                   double tol,
                                   size_t max_iter,
                                   struct LnormEstimate *out);

// `||A_M||_{p->p}` by the nonlinear power method (nonnegative matrices).
//
// # Safety
// `m` must be a live handle and `out` valid for writes.
enum LnormStatus lnorm_normp_boyd(const struct LnormMatrix *m,
                                  size_t truncation,
                                  double p,
                                  double tol,
                                  size_t max_iter,
                                  struct LnormEstimate *out);

// `s* = (sqrt(6(8+3 sqrt 3)) - sqrt 3 - 3)/12`.
double lnorm_s_star(void);

// `1/(2 sqrt 2)`.
double lnorm_s_upper(void);

// # Safety
// `out` must be valid for writes.
enum LnormStatus lnorm_f_of_s(double s, double *out);

// `p^2/(p-1)`.
//
// # Safety
// `out` must be valid for writes.
enum LnormStatus lnorm_pq_constant(double p, double *out);

// `sum_{k=0}^{n-1} Γ(k+b+1)/Γ(k+c)` in closed form.
//
// # Safety
// `out` must be valid for writes.
enum LnormStatus lnorm_gamma_ratio_sum(double b, double c, uint64_t n, double *out);

// Delta-method upper bound on `||A_s||_2` with `δ_n = 1/(n+s+1/2)`,
// evaluated up to `n_max` (0 selects the default) plus the tail limit.
//
// # Safety
// `out` must be valid for writes.
enum LnormStatus lnorm_delta_bound(double s, uint64_t n_max, double *out);

// `sqrt(N-1)/(sqrt N - 1)`.
//
// # Safety
// `out` must be valid for writes.
enum LnormStatus lnorm_lacunary_norm(uint64_t base, double *out);

// Lacunary constants at `index`. A NaN `t` selects the optimal `t`.
//
// # Safety
// `out` must be valid for writes.
enum LnormStatus lnorm_lacunary_constants(uint64_t base,
                                          double t,
                                          uint32_t index,
                                          struct LnormLacunaryConstants *out);

// Builds and certifies the `A_s` witness. A NaN `eps` selects it
// automatically.
//
// # Safety
// `out` must be valid for writes.
enum LnormStatus lnorm_witness_as(double s,
                                  double eps,
                                  size_t truncation,
                                  struct LnormAsCertificate *out);

// # Safety
// `out` must be valid for writes.
enum LnormStatus lnorm_witness_pnorm(double s,
                                     double p,
                                     size_t m,
                                     struct LnormPnormCertificate *out);

// # Safety
// `out` must be valid for writes.
enum LnormStatus lnorm_witness_lacunary(uint64_t base,
                                        uint32_t levels,
                                        struct LnormLacunaryCertificate *out);

// Message for the last failing call on this thread, or an empty string.
// Valid until the next `lnorm_*` call on the same thread.
const char *lnorm_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *lnorm_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LNORM_H */
