#ifndef LAYERPAINT_H
#define LAYERPAINT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LpStatus {
  LP_STATUS_OK = 0,
  LP_STATUS_NULL_POINTER = 1,
  LP_STATUS_INVALID_UTF8 = 2,
  LP_STATUS_INVALID_ARGUMENT = 3,
  LP_STATUS_INPUT_ERROR = 4,
  LP_STATUS_OUTPUT_ERROR = 5,
  LP_STATUS_OUT_OF_RANGE = 6,
  LP_STATUS_PANIC = 7,
} LpStatus;

typedef enum LpDepthConvention {
  LP_DEPTH_CONVENTION_NEARER_HIGH = 0,
  LP_DEPTH_CONVENTION_NEARER_LOW = 1,
} LpDepthConvention;

/**
 * An ordered stroke plan.
 */
typedef struct LpPlan LpPlan;

/**
 * Target image, depth map and segmentation.
 */
typedef struct LpScene LpScene;

/**
 * A two-arm drawing schedule.
 */
typedef struct LpSchedule LpSchedule;

/**
 * Planning and stroke parameters. Obtain defaults from
 * [`lp_plan_options_default`].
 */
typedef struct LpPlanOptions {
  uint64_t strokes;
  /**
   * Palette size; 0 leaves colors unrestricted.
   */
  uint32_t colors;
  uint32_t width_px;
  uint32_t bins;
  uint32_t grid_rows;
  uint32_t grid_cols;
  /**
   * Depth smoothing sigma; negative selects diagonal / 200.
   */
  double sigma;
  /**
   * Non-zero selects equal-population bins.
   */
  uint8_t equal_population;
  uint32_t min_points;
  uint32_t max_points;
  double color_tolerance;
  /**
   * Non-zero renders with coverage blending.
   */
  uint8_t antialias;
  uint64_t rng_seed;
  uint32_t kmeans_iters;
} LpPlanOptions;

typedef struct LpTiming {
  double pen_speed_mm_s;
  double travel_speed_mm_s;
  double tool_change_s;
} LpTiming;

typedef struct LpStrokeInfo {
  uint32_t prediction_id;
  uint32_t bin_index;
  uint32_t frame_index;
  uint32_t width_px;
  uint8_t r;
  uint8_t g;
  uint8_t b;
  /**
   * Palette index, or -1 for unrestricted color.
   */
  int32_t color_index;
  size_t point_count;
} LpStrokeInfo;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or null. The pointer
 * stays valid until the next call on the same thread.
 */
const char *lp_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *lp_version(void);

struct LpPlanOptions lp_plan_options_default(void);

struct LpTiming lp_timing_default(void);

/**
 * Loads a scene from a PNG image, a 16-bit PGM depth map, a label PNG and
 * its JSON metadata.
 *
 * # Safety
 * Path arguments must be null or NUL-terminated strings; `out` must be null
 * or point to writable storage for one pointer.
 */
enum LpStatus lp_scene_load(const char *image_path,
                            const char *depth_path,
                            const char *labels_path,
                            const char *meta_path,
                            enum LpDepthConvention convention,
                            struct LpScene **out);

/**
 * # Safety
 * `scene` must be null or a handle from [`lp_scene_load`] not yet freed.
 */
void lp_scene_free(struct LpScene *scene);

/**
 * Width and height of a scene.
 *
 * # Safety
 * `scene` must be a live handle; `width` and `height` must be writable.
 */
enum LpStatus lp_scene_size(const struct LpScene *scene, uint32_t *width, uint32_t *height);

/**
 * Plans and grows strokes for a scene.
 *
 * # Safety
 * `scene` must be a live handle, `options` null or a valid pointer (null
 * selects defaults), and `out` writable.
 */
enum LpStatus lp_plan_create(const struct LpScene *scene,
                             const struct LpPlanOptions *options,
                             struct LpPlan **out);

/**
 * # Safety
 * `plan` must be null or a handle from [`lp_plan_create`] not yet freed.
 */
void lp_plan_free(struct LpPlan *plan);

/**
 * Number of strokes in a plan, 0 for a null handle.
 *
 * # Safety
 * `plan` must be null or a live handle.
 */
size_t lp_plan_stroke_count(const struct LpPlan *plan);

/**
 * Describes stroke `index`.
 *
 * # Safety
 * `plan` must be a live handle and `info` writable.
 */
enum LpStatus lp_plan_stroke(const struct LpPlan *plan, size_t index, struct LpStrokeInfo *info);

/**
 * Copies up to `capacity` points of stroke `index` as interleaved `x, y`
 * pairs into `xy` (which must hold `2 * capacity` doubles) and stores the
 * number copied in `written`.
 *
 * # Safety
 * `plan` must be a live handle, `xy` valid for `2 * capacity` writes and
 * `written` writable.
 */
enum LpStatus lp_plan_stroke_points(const struct LpPlan *plan,
                                    size_t index,
                                    double *xy,
                                    size_t capacity,
                                    size_t *written);

/**
 * Writes the plan as JSON Lines.
 *
 * # Safety
 * `plan` must be a live handle and `path` a NUL-terminated string.
 */
enum LpStatus lp_plan_write_jsonl(const struct LpPlan *plan, const char *path);

/**
 * Renders `painting.png`, `frames.txt` and a `frameNNNN.png` snapshot for
 * each of the `count` ascending stroke counts in `snapshots`.
 *
 * # Safety
 * `plan` must be a live handle, `snapshots` valid for `count` reads (or
 * null when `count` is 0) and `out_dir` a NUL-terminated string.
 */
enum LpStatus lp_plan_render(const struct LpPlan *plan,
                             const size_t *snapshots,
                             size_t count,
                             const char *out_dir,
                             uint8_t antialias);

/**
 * Maps a plan onto a `width_mm` x `height_mm` canvas and schedules both arms.
 *
 * # Safety
 * `plan` must be a live handle, `timing` null (defaults) or valid, and
 * `out` writable.
 */
enum LpStatus lp_schedule_create(const struct LpPlan *plan,
                                 double width_mm,
                                 double height_mm,
                                 double margin_mm,
                                 const struct LpTiming *timing,
                                 struct LpSchedule **out);

/**
 * # Safety
 * `schedule` must be null or a handle from [`lp_schedule_create`] not yet freed.
 */
void lp_schedule_free(struct LpSchedule *schedule);

/**
 * Makespan in seconds, or a negative value for a null handle.
 *
 * # Safety
 * `schedule` must be null or a live handle.
 */
double lp_schedule_makespan(const struct LpSchedule *schedule);

/**
 * Tool changes of one arm (0 = left, otherwise right).
 *
 * # Safety
 * `schedule` must be null or a live handle.
 */
size_t lp_schedule_tool_changes(const struct LpSchedule *schedule, uint32_t arm);

/**
 * Writes the schedule as JSON Lines with a trailing summary record.
 *
 * # Safety
 * `schedule` must be a live handle and `path` a NUL-terminated string.
 */
enum LpStatus lp_schedule_export(const struct LpSchedule *schedule, const char *path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LAYERPAINT_H */
