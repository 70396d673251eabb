#ifndef CANDLESEG_H
#define CANDLESEG_H

/* Generated by cbindgen from candleseg-ffi. Do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes for every fallible FFI call.
 */
typedef enum {
  CsStatus_Ok = 0,
  CsStatus_NullArgument = 1,
  CsStatus_InvalidUtf8 = 2,
  CsStatus_FileMissing = 3,
  CsStatus_UnsupportedFormat = 4,
  CsStatus_CorruptHeader = 5,
  CsStatus_Io = 6,
  CsStatus_InvalidShape = 7,
  CsStatus_OutOfBounds = 8,
  CsStatus_DimensionMismatch = 9,
  CsStatus_InfeasibleK = 10,
  CsStatus_InvalidConfig = 11,
  CsStatus_DomainError = 12,
  CsStatus_Internal = 13,
} CsStatus;

/**
 * Feature planes used for clustering.
 */
typedef enum {
  CsFeatureMode_Lab = 0,
  CsFeatureMode_Ab = 1,
} CsFeatureMode;

/**
 * Region retained for the grayscale phase.
 */
typedef enum {
  CsRetain_Background = 0,
  CsRetain_Egg = 1,
  CsRetain_Yolk = 2,
  CsRetain_All = 3,
} CsRetain;

/**
 * Intensity scale for the MSE metric.
 */
typedef enum {
  CsMseScale_Unit = 0,
  CsMseScale_Byte = 1,
} CsMseScale;

/**
 * Optional pipeline stages.
 */
typedef enum {
  CsStage_He = 0,
  CsStage_Clahe = 1,
  CsStage_Dilate = 2,
  CsStage_Thicken = 3,
  CsStage_Edges = 4,
} CsStage;

/**
 * Opaque pipeline configuration handle.
 */
typedef struct CsConfig CsConfig;

/**
 * Opaque RGB image handle.
 */
typedef struct CsImage CsImage;

/**
 * Metrics summary returned by pipeline and comparison calls.
 */
typedef struct {
  double mse;
  double mssim;
  double ssim_min;
  double ssim_max;
  uint64_t window_count;
} CsMetricsReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *cs_version(void);

/**
 * Description of the most recent failure on this thread. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *cs_last_error_message(void);

/**
 * Load a PNG or binary PNM image.
 *
 * # Safety
 * `path` must be NUL-terminated; `out` must be a valid destination.
 */
CsStatus cs_image_load(const char *path, CsImage **out);

/**
 * Build an image from an interleaved RGB8 buffer of `width * height * 3`
 * bytes.
 *
 * # Safety
 * `pixels` must point to at least `width * height * 3` readable bytes.
 */
CsStatus cs_image_from_rgb8(uint32_t width, uint32_t height, const uint8_t *pixels, CsImage **out);

/**
 * Image width in pixels; 0 for a null handle.
 *
 * # Safety
 * `image` must be null or a live handle from this library.
 */
uint32_t cs_image_width(const CsImage *image);

/**
 * Image height in pixels; 0 for a null handle.
 *
 * # Safety
 * `image` must be null or a live handle from this library.
 */
uint32_t cs_image_height(const CsImage *image);

/**
 * Copy the interleaved RGB8 pixels into `buf` (`buf_len` must be at least
 * `width * height * 3`).
 *
 * # Safety
 * `buf` must point to `buf_len` writable bytes.
 */
CsStatus cs_image_copy_rgb8(const CsImage *image, uint8_t *buf, uintptr_t buf_len);

/**
 * Save the image; the format follows the path extension (.png/.ppm).
 *
 * # Safety
 * `path` must be NUL-terminated.
 */
CsStatus cs_image_save(const CsImage *image, const char *path);

/**
 * Release an image handle. Null is a no-op.
 *
 * # Safety
 * `image` must have been returned by this library and not freed before.
 */
void cs_image_free(CsImage *image);

/**
 * Generate the deterministic synthetic egg phantom.
 *
 * # Safety
 * `out` must be a valid destination.
 */
CsStatus cs_phantom_generate(uint32_t width, uint32_t height, CsImage **out);

/**
 * New configuration with every parameter at its default.
 */
CsConfig *cs_config_new(void);

/**
 * Release a configuration handle. Null is a no-op.
 *
 * # Safety
 * `config` must have been returned by [`cs_config_new`] and not freed.
 */
void cs_config_free(CsConfig *config);

/**
 * Set the cluster count (k >= 2).
 *
 * # Safety
 * `config` must be a live handle from [`cs_config_new`].
 */
CsStatus cs_config_set_k(CsConfig *config, uint32_t k);

/**
 * Set the PRNG seed for centroid initialization.
 *
 * # Safety
 * `config` must be a live handle from [`cs_config_new`].
 */
CsStatus cs_config_set_seed(CsConfig *config, uint64_t seed);

/**
 * Set the crop window applied before segmentation.
 *
 * # Safety
 * `config` must be a live handle from [`cs_config_new`].
 */
CsStatus cs_config_set_crop(CsConfig *config, uint32_t x0, uint32_t y0, uint32_t w, uint32_t h);

/**
 * Choose the feature planes used for clustering.
 *
 * # Safety
 * `config` must be a live handle from [`cs_config_new`].
 */
CsStatus cs_config_set_feature_mode(CsConfig *config, CsFeatureMode mode);

/**
 * Choose the region retained for the grayscale phase.
 *
 * # Safety
 * `config` must be a live handle from [`cs_config_new`].
 */
CsStatus cs_config_set_retain(CsConfig *config, CsRetain retain);

/**
 * Set the CLAHE tile grid, clip factor (0-100) and maximum slope.
 *
 * # Safety
 * `config` must be a live handle from [`cs_config_new`].
 */
CsStatus cs_config_set_clahe(CsConfig *config,
                             uint32_t tiles_x,
                             uint32_t tiles_y,
                             double clip_alpha,
                             double s_max);

/**
 * Set the line structuring element used by dilation.
 *
 * # Safety
 * `config` must be a live handle from [`cs_config_new`].
 */
CsStatus cs_config_set_strel(CsConfig *config, uint32_t length, double angle_degrees);

/**
 * Set the number of thickening passes.
 *
 * # Safety
 * `config` must be a live handle from [`cs_config_new`].
 */
CsStatus cs_config_set_thicken_passes(CsConfig *config, uint64_t passes);

/**
 * Set Canny parameters: blur sigma, relative thresholds and the minimum
 * kept component size.
 *
 * # Safety
 * `config` must be a live handle from [`cs_config_new`].
 */
CsStatus cs_config_set_canny(CsConfig *config,
                             double sigma,
                             double low_ratio,
                             double high_ratio,
                             uint64_t min_edge_size);

/**
 * Set the MSE intensity scale.
 *
 * # Safety
 * `config` must be a live handle from [`cs_config_new`].
 */
CsStatus cs_config_set_mse_scale(CsConfig *config, CsMseScale scale);

/**
 * Enable or disable an optional stage.
 *
 * # Safety
 * `config` must be a live handle from [`cs_config_new`].
 */
CsStatus cs_config_set_stage_enabled(CsConfig *config, CsStage stage, bool enabled);

/**
 * Run the full pipeline on `input`, writing stage artifacts and
 * report.json into `output_dir`. `report` may be null.
 *
 * # Safety
 * Handles and strings must be valid; `report`, when non-null, must point
 * to writable memory.
 */
CsStatus cs_pipeline_run(const CsConfig *config,
                         const char *input,
                         const char *output_dir,
                         CsMetricsReport *report);

/**
 * Compare two image files (converted to grayscale) with MSE and SSIM at
 * default SSIM parameters.
 *
 * # Safety
 * Paths must be NUL-terminated; `report`, when non-null, must be writable.
 */
CsStatus cs_metrics_compare_files(const char *path_a,
                                  const char *path_b,
                                  CsMseScale scale,
                                  CsMetricsReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CANDLESEG_H */
