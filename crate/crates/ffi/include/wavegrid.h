#ifndef WAVEGRID_H
#define WAVEGRID_H

#include <stddef.h>
#include <stdint.h>

typedef enum WgCodec {
  WG_CODEC_CSR = 0,
  WG_CODEC_LZ = 1,
} WgCodec;

typedef enum WgScheme {
  WG_SCHEME_TRANSPORT = 0,
  WG_SCHEME_SWE = 1,
} WgScheme;

typedef enum WgStatus {
  WG_STATUS_OK = 0,
  WG_STATUS_NULL_POINTER = 1,
  WG_STATUS_INVALID_ARGUMENT = 2,
  WG_STATUS_CONFIG = 3,
  WG_STATUS_NUMERICAL = 4,
  WG_STATUS_CORRUPT = 5,
  WG_STATUS_IO = 6,
  WG_STATUS_FINISHED = 7,
  WG_STATUS_PANIC = 99,
} WgStatus;

typedef enum WgThresholdMode {
  WG_THRESHOLD_MODE_CONSTANT = 0,
  WG_THRESHOLD_MODE_CAPPED = 1,
  WG_THRESHOLD_MODE_ACCUMULATION = 2,
} WgThresholdMode;

typedef struct WgPatch WgPatch;

typedef struct WgSimulation WgSimulation;

/**
 * Compression settings shared by patches and simulations. `chunk_size` is
 * only read for the LZ codec; 0 selects the default.
 */
typedef struct WgCompression {
  uint32_t levels;
  enum WgThresholdMode mode;
  double threshold;
  enum WgCodec codec;
  size_t chunk_size;
} WgCompression;

typedef struct WgSimConfig {
  enum WgScheme scheme;
  size_t nx;
  size_t splits_x;
  size_t splits_y;
  double cfl;
  double t_end;
  double alpha;
  double beta;
  double g;
  /**
   * Zero disables the compression cycle.
   */
  uint8_t compress;
  struct WgCompression compression;
  /**
   * Zero uses every core.
   */
  size_t threads;
} WgSimConfig;

typedef struct WgStepMetrics {
  size_t step;
  double time;
  size_t dense_bytes;
  size_t compressed_bytes;
  double ratio;
  size_t nnz;
  size_t zeroed;
  double global_mass;
  /**
   * NaN for the shallow-water scheme.
   */
  double l2_error;
} WgStepMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *wg_last_error(void);

/**
 * Static, nul-terminated library version.
 */
const char *wg_version(void);

/**
 * Forward transform of a row-major array of shape `dims[0..ndim]` into
 * `output` (corner layout). Both buffers hold the product of `dims` values
 * and may alias.
 */
enum WgStatus wg_dwt(const size_t *dims,
                     size_t ndim,
                     uint32_t levels,
                     const double *input,
                     double *output);

/**
 * Inverse of [`wg_dwt`].
 */
enum WgStatus wg_idwt(const size_t *dims,
                      size_t ndim,
                      uint32_t levels,
                      const double *input,
                      double *output);

/**
 * Zeroes small details of a corner-layout coefficient array in place.
 * `zeroed` may be null.
 */
enum WgStatus wg_threshold(const size_t *dims,
                           size_t ndim,
                           uint32_t levels,
                           enum WgThresholdMode mode,
                           double threshold,
                           double *coeffs,
                           size_t *zeroed);

/**
 * Transforms, thresholds and encodes `components` arrays of shape `dims`,
 * stored one after another in `data`.
 */
enum WgStatus wg_patch_compress(const size_t *dims,
                                size_t ndim,
                                size_t components,
                                const double *data,
                                const struct WgCompression *settings,
                                struct WgPatch **out);

/**
 * Decodes and inverse-transforms every component into `output`, which must
 * hold `len` values (components times cells).
 */
enum WgStatus wg_patch_decompress(const struct WgPatch *patch, double *output, size_t len);

/**
 * Size queries. Any output pointer may be null.
 */
enum WgStatus wg_patch_info(const struct WgPatch *patch,
                            size_t *values,
                            size_t *dense_bytes,
                            size_t *compressed_bytes);

/**
 * Serializes the patch container. Release the buffer with
 * [`wg_bytes_free`].
 */
enum WgStatus wg_patch_serialize(const struct WgPatch *patch, uint8_t **bytes, size_t *len);

enum WgStatus wg_patch_deserialize(const uint8_t *bytes, size_t len, struct WgPatch **out);

void wg_patch_free(struct WgPatch *patch);

void wg_bytes_free(uint8_t *bytes, size_t len);

/**
 * Fills `out` with the defaults of `scheme`.
 */
enum WgStatus wg_sim_config_default(enum WgScheme scheme, struct WgSimConfig *out);

enum WgStatus wg_simulation_new(const struct WgSimConfig *config, struct WgSimulation **out);

/**
 * Advances one step. Returns [`WgStatus::Finished`] once `t_end` is
 * reached. `metrics` may be null.
 */
enum WgStatus wg_simulation_step(struct WgSimulation *sim, struct WgStepMetrics *metrics);

/**
 * Simulated time, or NaN for a null handle.
 */
double wg_simulation_time(const struct WgSimulation *sim);

/**
 * 1 once `t_end` is reached, 0 before, -1 for a null handle.
 */
int32_t wg_simulation_finished(const struct WgSimulation *sim);

/**
 * Copies the assembled `nx * nx` logical grid of one component.
 */
enum WgStatus wg_simulation_copy_field(const struct WgSimulation *sim,
                                       size_t component,
                                       double *output,
                                       size_t len);

void wg_simulation_free(struct WgSimulation *sim);

/**
 * Number of components of `scheme` (1 or 3).
 */
size_t wg_scheme_components(enum WgScheme scheme);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WAVEGRID_H */
