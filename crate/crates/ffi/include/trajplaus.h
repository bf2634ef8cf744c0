#ifndef TRAJPLAUS_H
#define TRAJPLAUS_H

#pragma once

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum TpStatus {
  TP_STATUS_OK = 0,
  TP_STATUS_NULL_POINTER = 1,
  TP_STATUS_INVALID_ARGUMENT = 2,
  TP_STATUS_IO = 3,
  TP_STATUS_PARSE = 4,
  TP_STATUS_SHAPE = 5,
  TP_STATUS_CONFIG = 6,
  TP_STATUS_NUMERIC = 7,
  TP_STATUS_PANIC = 8,
} TpStatus;

/**
 * Opaque plausibility surrogate.
 */
typedef struct TpLocoVal TpLocoVal;

/**
 * Opaque multi-head predictor.
 */
typedef struct TpPredictor TpPredictor;

/**
 * Observation at the current frame: root position, root velocity and an
 * optional pose (`joints` may be null with `n_joint_coords` 0).
 */
typedef struct TpObservation {
  double root_x;
  double root_y;
  double vel_x;
  double vel_y;
  const double *joints;
  size_t n_joint_coords;
} TpObservation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer stays
 * valid until the next call into the library from the same thread.
 */
const char *tp_last_error(void);

/**
 * Loads a surrogate checkpoint. On success `*out` owns a new handle.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum TpStatus tp_locoval_load(const char *path, struct TpLocoVal **out);

/**
 * # Safety
 * `h` must come from [`tp_locoval_load`] and not be used afterwards. Null is ignored.
 */
void tp_locoval_free(struct TpLocoVal *h);

/**
 * Number of future points the surrogate expects, or 0 for a null handle.
 *
 * # Safety
 * `h` must be null or a live handle.
 */
size_t tp_locoval_future_len(const struct TpLocoVal *h);

/**
 * Number of joints in a pose, or 0 when the surrogate ignores poses.
 *
 * # Safety
 * `h` must be null or a live handle.
 */
size_t tp_locoval_joint_count(const struct TpLocoVal *h);

/**
 * Name of joint `index`, owned by the handle; null when out of range.
 *
 * # Safety
 * `h` must be null or a live handle.
 */
const char *tp_locoval_joint_name(const struct TpLocoVal *h, size_t index);

/**
 * Scores one future trajectory of `n_points` points.
 *
 * # Safety
 * `xy` must hold `2 * n_points` values; `obs` and `score` must be valid.
 */
enum TpStatus tp_locoval_score(const struct TpLocoVal *h,
                               const double *xy,
                               size_t n_points,
                               double dt,
                               const struct TpObservation *obs,
                               double *score);

/**
 * Scores `k` candidates of `n_points` points each (stored back to back) and
 * keeps those scoring at least `lambda`, or the best one when none do.
 * `keep[i]` is set to 1 for kept candidates and 0 otherwise; `scores` may be null.
 *
 * # Safety
 * `xy` must hold `2 * k * n_points` values, `keep` `k` bytes and `scores`
 * (when non-null) `k` values.
 */
enum TpStatus tp_locoval_filter(const struct TpLocoVal *h,
                                const double *xy,
                                size_t k,
                                size_t n_points,
                                double dt,
                                const struct TpObservation *obs,
                                double lambda,
                                uint8_t *keep,
                                double *scores,
                                bool *fallback_used);

/**
 * Loads a predictor checkpoint. On success `*out` owns a new handle.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum TpStatus tp_predictor_load(const char *path, struct TpPredictor **out);

/**
 * # Safety
 * `h` must come from [`tp_predictor_load`] and not be used afterwards. Null is ignored.
 */
void tp_predictor_free(struct TpPredictor *h);

/**
 * Number of heads, or 0 for a null handle.
 *
 * # Safety
 * `h` must be null or a live handle.
 */
size_t tp_predictor_heads(const struct TpPredictor *h);

/**
 * Number of observed points the predictor consumes.
 *
 * # Safety
 * `h` must be null or a live handle.
 */
size_t tp_predictor_past_len(const struct TpPredictor *h);

/**
 * Number of points in each predicted future.
 *
 * # Safety
 * `h` must be null or a live handle.
 */
size_t tp_predictor_future_len(const struct TpPredictor *h);

/**
 * Number of joints the predictor expects, or 0 when it ignores poses.
 *
 * # Safety
 * `h` must be null or a live handle.
 */
size_t tp_predictor_joint_count(const struct TpPredictor *h);

/**
 * Name of joint `index`, owned by the handle; null when out of range.
 *
 * # Safety
 * `h` must be null or a live handle.
 */
const char *tp_predictor_joint_name(const struct TpPredictor *h, size_t index);

/**
 * Predicts `heads * future_len` points from `n_past` observed points and,
 * when the model uses poses, the pose at the last observed frame.
 *
 * # Safety
 * `past` must hold `2 * n_past` values, `joints` `n_joint_coords` values (or
 * be null with 0) and `out` `2 * heads * future_len` values.
 */
enum TpStatus tp_predictor_predict(const struct TpPredictor *h,
                                   const double *past,
                                   size_t n_past,
                                   double dt,
                                   const double *joints,
                                   size_t n_joint_coords,
                                   double *out,
                                   size_t out_len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TRAJPLAUS_H */
