#ifndef WINOGRAD_H
#define WINOGRAD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum WgStatus {
  WG_STATUS_OK = 0,
  WG_STATUS_NULL_POINTER = 1,
  WG_STATUS_INVALID_POINTS = 2,
  WG_STATUS_DIMENSION = 3,
  WG_STATUS_INVALID_ARGUMENT = 4,
  WG_STATUS_BUFFER_TOO_SMALL = 5,
  WG_STATUS_INTERNAL = 6,
} WgStatus;

typedef enum WgMatrixKind {
  WG_MATRIX_KIND_G = 0,
  WG_MATRIX_KIND_B = 1,
  WG_MATRIX_KIND_A = 2,
  WG_MATRIX_KIND_P = 3,
  WG_MATRIX_KIND_P_INV = 4,
  WG_MATRIX_KIND_GP = 5,
  WG_MATRIX_KIND_BP = 6,
  WG_MATRIX_KIND_AP = 7,
} WgMatrixKind;

typedef enum WgBaseMode {
  WG_BASE_MODE_CANONICAL = 0,
  WG_BASE_MODE_LEGENDRE = 1,
} WgBaseMode;

typedef enum WgNorm {
  WG_NORM_TWO = 0,
  WG_NORM_FROBENIUS = 1,
} WgNorm;

/**
 * Opaque plan handle.
 */
typedef struct WgPlan WgPlan;

/**
 * Per-stage bit widths; mirrors the core `QuantConfig`.
 */
typedef struct WgQuantConfig {
  uint32_t input_bits;
  uint32_t weight_bits;
  uint32_t input_transform_bits;
  uint32_t weight_transform_bits;
  uint32_t base_change_bits;
  uint32_t hadamard_bits;
  uint32_t output_transform_bits;
} WgQuantConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *wg_last_error(void);

/**
 * Builds an `F(o, k)` plan. `points` is a NUL-terminated comma-separated
 * list (`inf` for infinity) or null for the default set. The Legendre base
 * change is always attached.
 *
 * # Safety
 * `points` must be null or a valid C string; `out` must be writable.
 */
enum WgStatus wg_plan_new(size_t o, size_t k, const char *points, struct WgPlan **out);

/**
 * # Safety
 * `plan` must come from [`wg_plan_new`] and not be used afterwards.
 */
void wg_plan_free(struct WgPlan *plan);

/**
 * # Safety
 * `plan` must be a live handle; the out pointers may be null.
 */
enum WgStatus wg_plan_dims(const struct WgPlan *plan, size_t *o, size_t *k, size_t *m);

/**
 * Copies one transform matrix (row-major, double precision) into `buf`.
 * `rows`/`cols` receive its shape even when the buffer is too small.
 *
 * # Safety
 * `plan` must be live; `buf` must hold `len` doubles; `rows`/`cols` may be null.
 */
enum WgStatus wg_plan_matrix(const struct WgPlan *plan,
                             enum WgMatrixKind kind,
                             double *buf,
                             size_t len,
                             size_t *rows,
                             size_t *cols);

/**
 * Double-precision Winograd convolution; the kernel edge comes from the plan.
 *
 * # Safety
 * Buffers must hold the sizes implied by the shape arguments; `out` holds `out_len`.
 */
enum WgStatus wg_conv2d(const struct WgPlan *plan,
                        enum WgBaseMode mode,
                        const double *input,
                        size_t c_in,
                        size_t h,
                        size_t w,
                        const double *weights,
                        size_t c_out,
                        double *out,
                        size_t out_len);

/**
 * Fake-quantized Winograd convolution with the given per-stage widths.
 *
 * # Safety
 * As [`wg_conv2d`]; `config` must point to a valid struct.
 */
enum WgStatus wg_conv2d_quantized(const struct WgPlan *plan,
                                  enum WgBaseMode mode,
                                  const struct WgQuantConfig *config,
                                  const double *input,
                                  size_t c_in,
                                  size_t h,
                                  size_t w,
                                  const double *weights,
                                  size_t c_out,
                                  double *out,
                                  size_t out_len);

/**
 * Direct valid cross-correlation (the reference).
 *
 * # Safety
 * Buffers must hold the sizes implied by the shape arguments; `out` holds `out_len`.
 */
enum WgStatus wg_conv2d_direct(const double *input,
                               size_t c_in,
                               size_t h,
                               size_t w,
                               const double *weights,
                               size_t c_out,
                               size_t k,
                               double *out,
                               size_t out_len);

/**
 * Writes the all-8-bit configuration.
 *
 * # Safety
 * `out` must be writable.
 */
enum WgStatus wg_quant_config_default(struct WgQuantConfig *out);

/**
 * Symmetric per-tensor fake quantization of `len` values; `out` may alias `values`.
 *
 * # Safety
 * Both buffers must hold `len` doubles.
 */
enum WgStatus wg_fake_quant(const double *values, size_t len, uint32_t bits, double *out);

/**
 * Condition number of a row-major `rows × cols` matrix; infinity when singular.
 *
 * # Safety
 * `data` must hold `rows * cols` doubles; `out` must be writable.
 */
enum WgStatus wg_condition_number(const double *data,
                                  size_t rows,
                                  size_t cols,
                                  enum WgNorm norm,
                                  double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WINOGRAD_H */
