#ifndef BINAURAL_DOA_H
#define BINAURAL_DOA_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

/**
 * Result of every call.
 */
typedef enum BdStatus {
  BD_STATUS_OK = 0,
  BD_STATUS_NULL_POINTER = 1,
  BD_STATUS_INVALID_ARGUMENT = 2,
  BD_STATUS_SHAPE_MISMATCH = 3,
  BD_STATUS_BUFFER_TOO_SMALL = 4,
  BD_STATUS_IO = 5,
  BD_STATUS_FORMAT = 6,
  BD_STATUS_CODEC = 7,
  BD_STATUS_MISSING_DIRECTION = 8,
  BD_STATUS_PANIC = 9,
} BdStatus;

/**
 * Codec configuration used for round trips.
 */
typedef struct BdCodec BdCodec;

/**
 * HRIR set.
 */
typedef struct BdHrirs BdHrirs;

/**
 * SRP-PHAT localiser over the 72 five-degree sectors.
 */
typedef struct BdSrp BdSrp;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, a static nul-terminated string.
 */
const char *bd_version(void);

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next call into the library from this thread.
 */
const char *bd_last_error_message(void);

/**
 * Loads an HRIR set from its JSON manifest.
 *
 * # Safety
 * `manifest_path` must be a nul-terminated string; `out` must be writable.
 */
enum BdStatus bd_hrirs_load(const char *manifest_path, struct BdHrirs **out);

/**
 * Analytic rigid-sphere HRIRs of the six-microphone array on a horizontal
 * grid of `step_deg`, 16 kHz.
 *
 * # Safety
 * `out` must be writable.
 */
enum BdStatus bd_hrirs_spherical_head(double step_deg, size_t ir_length, struct BdHrirs **out);

/**
 * Number of directions, or 0 for NULL.
 *
 * # Safety
 * `hrirs` must be NULL or a live handle.
 */
size_t bd_hrirs_n_directions(const struct BdHrirs *hrirs);

/**
 * Number of channels, or 0 for NULL.
 *
 * # Safety
 * `hrirs` must be NULL or a live handle.
 */
size_t bd_hrirs_n_channels(const struct BdHrirs *hrirs);

/**
 * # Safety
 * `hrirs` must be NULL or a handle not yet freed.
 */
void bd_hrirs_free(struct BdHrirs *hrirs);

/**
 * Number of STFT frames (512-sample window, 160-sample hop) in `n_samples`.
 */
size_t bd_stft_frame_count(size_t n_samples);

/**
 * Builds an SRP-PHAT localiser. The HRIR set must contain every sector
 * direction (0, 5, ..., 355 degrees azimuth).
 *
 * # Safety
 * `hrirs` must be a live handle; `out` must be writable.
 */
enum BdStatus bd_srp_new(const struct BdHrirs *hrirs, struct BdSrp **out);

/**
 * SRP-PHAT sector scores, row-major `[frame][sector]` with 72 sectors.
 * `*n_frames` receives the frame count even when `capacity` is too small.
 *
 * # Safety
 * `samples` must hold `n_channels * n_samples` values, `scores` `capacity`.
 */
enum BdStatus bd_srp_scores(const struct BdSrp *srp,
                            const double *samples,
                            size_t n_channels,
                            size_t n_samples,
                            double *scores,
                            size_t capacity,
                            size_t *n_frames);

/**
 * # Safety
 * `srp` must be NULL or a handle not yet freed.
 */
void bd_srp_free(struct BdSrp *srp);

/**
 * The `k` highest-scoring sectors of each frame, best first; ties go to the
 * lower sector. `estimates` receives `n_frames * k` values.
 *
 * # Safety
 * `scores` must hold `n_frames * 72` values and `estimates` `n_frames * k`.
 */
enum BdStatus bd_decode_topk(const double *scores, size_t n_frames, size_t k, uint32_t *estimates);

/**
 * Number of feature frames produced for a segment of `n_samples`.
 */
size_t bd_feature_frame_count(size_t n_samples);

/**
 * Network input features of six-channel 16 kHz audio, laid out
 * `[frame][feature (sin, cos, magnitude)][channel][bin]` with 257 bins.
 * `*n_frames` receives the frame count even when `capacity` is too small.
 *
 * # Safety
 * `samples` must hold `n_channels * n_samples` values, `features` `capacity`.
 */
enum BdStatus bd_features(const double *samples,
                          size_t n_channels,
                          size_t n_samples,
                          float *features,
                          size_t capacity,
                          size_t *n_frames);

/**
 * Built-in reference lossy codec at `bitrate_bps` per channel (10 ms
 * frames, 16 kHz). A bitrate of 0 selects the bit-exact identity codec.
 *
 * # Safety
 * `out` must be writable.
 */
enum BdStatus bd_codec_new(uint32_t bitrate_bps, struct BdCodec **out);

/**
 * Encodes and decodes one 16 kHz channel; `output` is time-aligned with
 * `input` and has the same length. The buffers may not overlap.
 *
 * # Safety
 * `input` and `output` must each hold `n_samples` values.
 */
enum BdStatus bd_codec_roundtrip(const struct BdCodec *codec,
                                 const double *input_samples,
                                 double *output_samples,
                                 size_t n_samples);

/**
 * Passes six-channel audio through an exchange topology in place:
 * `"none"`, `"encode-3"` (= `"encode-3-right"`), `"encode-3-left"` or
 * `"encode-6"`. The side named by `encode-3` is the processing device; the
 * other ear's three channels are coded.
 *
 * # Safety
 * `topology` must be a nul-terminated string and `samples` must hold
 * `n_channels * n_samples` values.
 */
enum BdStatus bd_codec_apply_topology(const struct BdCodec *codec,
                                      const char *topology,
                                      double *samples,
                                      size_t n_channels,
                                      size_t n_samples);

/**
 * # Safety
 * `codec` must be NULL or a handle not yet freed.
 */
void bd_codec_free(struct BdCodec *codec);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BINAURAL_DOA_H */
