#ifndef SLICEFFT_H
#define SLICEFFT_H

/* Generated by the slicefft-ffi build script. Do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * How values are rounded when low bits are dropped.
 */
typedef enum SlicefftRounding {
  /**
   * Round to nearest, ties away from zero.
   */
  SLICEFFT_ROUNDING_HALF_AWAY = 0,
  /**
   * Drop low bits, rounding toward negative infinity.
   */
  SLICEFFT_ROUNDING_TRUNCATE = 1,
} SlicefftRounding;

/**
 * Result of every fallible call.
 */
typedef enum SlicefftStatus {
  /**
   * Call completed.
   */
  SLICEFFT_STATUS_OK = 0,
  /**
   * A required pointer argument was NULL.
   */
  SLICEFFT_STATUS_NULL_ARGUMENT = 1,
  /**
   * The configuration violates a model constraint.
   */
  SLICEFFT_STATUS_INVALID_CONFIG = 2,
  /**
   * A non-configuration argument is out of range.
   */
  SLICEFFT_STATUS_INVALID_ARGUMENT = 3,
  /**
   * Internal failure; the call had no effect.
   */
  SLICEFFT_STATUS_PANIC = 4,
} SlicefftStatus;

/**
 * Opaque streaming pipeline handle.
 */
typedef struct SlicefftPipeline SlicefftPipeline;

/**
 * Model parameters. Start from `slicefft_config_default` and adjust.
 */
typedef struct SlicefftConfig {
  /**
   * Transform length; a power of two, at least 2.
   */
  uint32_t n;
  /**
   * Data word width in bits, 2 to 64.
   */
  uint32_t word_bits;
  /**
   * Fraction bits, at most word_bits - 1.
   */
  uint32_t frac_bits;
  /**
   * Low bits dropped from each stored rotation coefficient.
   */
  uint32_t rom_shift;
  /**
   * Digit-slice block width inside the rotator multipliers.
   */
  uint32_t bits_per_block;
  enum SlicefftRounding rounding;
  /**
   * Nonzero halves at every butterfly rank so words keep their width.
   */
  uint8_t scaling;
  /**
   * Nonzero rotates by stored unity coefficients instead of bypassing.
   */
  uint8_t rotate_unity;
  /**
   * Rotator multiplier register depth in cycles, 0 to 16.
   */
  uint32_t mult_depth;
} SlicefftConfig;

/**
 * One narrowed coefficient ROM entry.
 */
typedef struct SlicefftTwiddle {
  /**
   * Root-of-unity exponent this slot applies.
   */
  uint32_t exponent;
  /**
   * Stored integer coefficient, real rail.
   */
  int64_t stored_re;
  /**
   * Stored integer coefficient, imaginary rail.
   */
  int64_t stored_im;
  /**
   * Unquantized coefficient, real rail.
   */
  double exact_re;
  /**
   * Unquantized coefficient, imaginary rail.
   */
  double exact_im;
} SlicefftTwiddle;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Default 16-bit profile for an n-point transform.
 */
struct SlicefftConfig slicefft_config_default(uint32_t n);

/**
 * Build a pipeline and store the handle in `out`.
 *
 * # Safety
 * `config` and `out` must be valid pointers.
 */
enum SlicefftStatus slicefft_pipeline_new(const struct SlicefftConfig *config,
                                          struct SlicefftPipeline **out);

/**
 * Release a handle. NULL is accepted and ignored.
 *
 * # Safety
 * `pipeline` must be NULL or a handle from `slicefft_pipeline_new` that
 * has not been freed.
 */
void slicefft_pipeline_free(struct SlicefftPipeline *pipeline);

/**
 * Clear all pipeline state, as if freshly constructed.
 *
 * # Safety
 * `pipeline` must be a live handle.
 */
enum SlicefftStatus slicefft_pipeline_reset(struct SlicefftPipeline *pipeline);

/**
 * Cycles from a frame's first input to its first output.
 *
 * # Safety
 * `pipeline` must be a live handle; `out_cycles` must be valid.
 */
enum SlicefftStatus slicefft_pipeline_latency(const struct SlicefftPipeline *pipeline,
                                              uint64_t *out_cycles);

/**
 * Rotator output clips since construction or the last reset.
 *
 * # Safety
 * `pipeline` must be a live handle; `out_count` must be valid.
 */
enum SlicefftStatus slicefft_pipeline_saturations(const struct SlicefftPipeline *pipeline,
                                                  uint64_t *out_count);

/**
 * Advance one cycle: push one sample, receive one sample.
 *
 * Rails carry raw fixed-point integers in the configured format; inputs
 * outside that range are rejected. Outputs are meaningful once the
 * pipeline has been fed `latency` samples.
 *
 * # Safety
 * `pipeline` must be a live handle; `out_re` and `out_im` must be valid.
 */
enum SlicefftStatus slicefft_pipeline_tick(struct SlicefftPipeline *pipeline,
                                           int64_t re_raw,
                                           int64_t im_raw,
                                           int64_t *out_re,
                                           int64_t *out_im);

/**
 * Transform one frame through the fixed-point datapath.
 *
 * `input` and `output` are interleaved re,im pairs of `config.n` samples
 * (2n doubles each). Inputs are quantized to the configured format first.
 * Nonzero `natural_order` permutes bins into natural order; otherwise
 * they arrive in the hardware's bit-reversed order. `out_saturations`
 * may be NULL.
 *
 * # Safety
 * `config`, `input`, and `output` must be valid for their stated sizes.
 */
enum SlicefftStatus slicefft_fft_frame(const struct SlicefftConfig *config,
                                       const double *input,
                                       double *output,
                                       uint8_t natural_order,
                                       uint64_t *out_saturations);

/**
 * Reference transform in double precision, natural bin order.
 *
 * `input` and `output` are interleaved re,im pairs (2n doubles each);
 * every bin is multiplied by `scale`.
 *
 * # Safety
 * `input` and `output` must be valid for 2n doubles.
 */
enum SlicefftStatus slicefft_dft_reference(const double *input,
                                           uint32_t n,
                                           double scale,
                                           double *output);

/**
 * Read one coefficient ROM entry of a rotation stage.
 *
 * Stage 0 is the rotator nearest the input; `position` wraps by the
 * stage's span, matching the hardware's sample-counter addressing.
 *
 * # Safety
 * `config` and `out` must be valid pointers.
 */
enum SlicefftStatus slicefft_twiddle_entry(const struct SlicefftConfig *config,
                                           uint32_t stage,
                                           uint32_t position,
                                           struct SlicefftTwiddle *out);

/**
 * Library version as a NUL-terminated static string.
 */
const char *slicefft_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SLICEFFT_H */
