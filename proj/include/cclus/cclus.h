/*
 * cclus: center-clustering instance segmentation for crowded piglet scenes.
 *
 * C interface to the shared library. Every object is an opaque handle created
 * by a *_create or *_load function and released by the matching *_destroy.
 * Functions returning cclus_status leave a human-readable message for the
 * calling thread in cclus_last_error() when they fail. Distinct handles may be
 * used from different threads; a single handle must not be used concurrently.
 *
 * Strings returned through char** out-parameters are owned by the caller and
 * released with cclus_string_free().
 */
#ifndef CCLUS_CCLUS_H
#define CCLUS_CCLUS_H

#include <stddef.h>
#include <stdint.h>

#if defined(CCLUS_BUILDING_LIBRARY)
#define CCLUS_API __attribute__((visibility("default")))
#else
#define CCLUS_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cclus_status {
  CCLUS_OK = 0,
  CCLUS_INVALID_ARGUMENT = 1, /* bad parameter value or null handle */
  CCLUS_FORMAT = 2,           /* malformed file or buffer */
  CCLUS_DIMENSION = 3,        /* grids that must agree do not */
  CCLUS_IO = 4,               /* file could not be opened, read or written */
  CCLUS_INFEASIBLE = 5,       /* synthetic scene constraints unsatisfiable */
  CCLUS_RUNTIME = 6           /* anything else */
} cclus_status;

typedef struct cclus_config cclus_config;
typedef struct cclus_semantic cclus_semantic;
typedef struct cclus_offsets cclus_offsets;
typedef struct cclus_frame cclus_frame;
typedef struct cclus_tracker cclus_tracker;
typedef struct cclus_evaluator cclus_evaluator;
typedef struct cclus_scene cclus_scene;

CCLUS_API const char* cclus_version(void);
CCLUS_API const char* cclus_status_name(cclus_status status);
/* Message of the last failure on this thread; "" if none. */
CCLUS_API const char* cclus_last_error(void);
CCLUS_API void cclus_string_free(char* s);

/* ---- pipeline configuration (key=value, see README) ---- */
CCLUS_API cclus_status cclus_config_create(cclus_config** out);
CCLUS_API cclus_status cclus_config_load(const char* path, cclus_config** out);
CCLUS_API cclus_status cclus_config_set(cclus_config* config, const char* key, const char* value);
/* Re-checks every value; cclus_config_set checks only the key and syntax. */
CCLUS_API cclus_status cclus_config_validate(const cclus_config* config);
CCLUS_API cclus_status cclus_config_format(const cclus_config* config, char** text);
CCLUS_API void cclus_config_destroy(cclus_config* config);

/* ---- per-pixel network outputs ---- */
CCLUS_API cclus_status cclus_semantic_create(uint32_t width, uint32_t height,
                                             const uint8_t* labels, cclus_semantic** out);
CCLUS_API cclus_status cclus_semantic_load(const char* path, cclus_semantic** out);
CCLUS_API cclus_status cclus_semantic_save(const cclus_semantic* map, const char* path);
CCLUS_API cclus_status cclus_semantic_dims(const cclus_semantic* map, uint32_t* width,
                                           uint32_t* height);
CCLUS_API void cclus_semantic_destroy(cclus_semantic* map);

/* `xy` holds interleaved (dx, dy) pairs, row-major. */
CCLUS_API cclus_status cclus_offsets_create(uint32_t width, uint32_t height, const float* xy,
                                            cclus_offsets** out);
CCLUS_API cclus_status cclus_offsets_load(const char* path, cclus_offsets** out);
CCLUS_API cclus_status cclus_offsets_save(const cclus_offsets* map, const char* path);
CCLUS_API cclus_status cclus_offsets_dims(const cclus_offsets* map, uint32_t* width,
                                          uint32_t* height);
CCLUS_API void cclus_offsets_destroy(cclus_offsets* map);

/* ---- segmentation results ---- */
typedef struct cclus_instance_info {
  int cls; /* 1 piglet, 2 sow */
  double score;
  double center_x;
  double center_y;
  size_t area;
} cclus_instance_info;

typedef struct cclus_timings {
  double generate, filter, cluster, c2m, rc2m, sow, total; /* seconds */
} cclus_timings;

CCLUS_API cclus_status cclus_segment(const cclus_config* config, const cclus_semantic* semantic,
                                     const cclus_offsets* offsets, cclus_frame** out);
CCLUS_API cclus_status cclus_frame_load_manifest(const char* path, cclus_frame** out);
CCLUS_API cclus_status cclus_frame_save_manifest(const cclus_frame* frame, const char* frame_id,
                                                 const char* path);
CCLUS_API cclus_status cclus_frame_dims(const cclus_frame* frame, uint32_t* width,
                                        uint32_t* height);
CCLUS_API size_t cclus_frame_instance_count(const cclus_frame* frame);
CCLUS_API cclus_status cclus_frame_instance(const cclus_frame* frame, size_t index,
                                            cclus_instance_info* out);
/* Copies up to `capacity` ascending pixel indices; *count receives the area. */
CCLUS_API cclus_status cclus_frame_instance_pixels(const cclus_frame* frame, size_t index,
                                                   uint32_t* pixels, size_t capacity,
                                                   size_t* count);
/* Zero for frames read from a manifest. */
CCLUS_API cclus_status cclus_frame_timings(const cclus_frame* frame, cclus_timings* out);
CCLUS_API void cclus_frame_destroy(cclus_frame* frame);

/* ---- tracking ---- */
typedef struct cclus_track_metrics {
  int track_id;
  double movement_px;
  double avg_speed_px_s;
  double body_pixel_size;
  double space_usage;
} cclus_track_metrics;

/* Uses the config's min_iou and fps. */
CCLUS_API cclus_status cclus_tracker_create(const cclus_config* config, uint32_t width,
                                            uint32_t height, cclus_tracker** out);
CCLUS_API cclus_status cclus_tracker_update(cclus_tracker* tracker, size_t frame_index,
                                            const cclus_frame* frame);
CCLUS_API size_t cclus_tracker_track_count(const cclus_tracker* tracker);
CCLUS_API cclus_status cclus_tracker_metrics(const cclus_tracker* tracker, size_t index,
                                             cclus_track_metrics* out);
CCLUS_API cclus_status cclus_tracker_write_tracks(const cclus_tracker* tracker, const char* path);
CCLUS_API cclus_status cclus_tracker_write_metrics(const cclus_tracker* tracker,
                                                   const char* path);
/* Writes <prefix>track_<id>.pgm and <prefix>track_<id>.csv for every track. */
CCLUS_API cclus_status cclus_tracker_write_heatmaps(const cclus_tracker* tracker,
                                                    const char* prefix);
CCLUS_API void cclus_tracker_destroy(cclus_tracker* tracker);

/* ---- mask mAP ---- */
CCLUS_API cclus_status cclus_evaluator_create(cclus_evaluator** out);
/* Frames are paired in the order they are added. */
CCLUS_API cclus_status cclus_evaluator_add(cclus_evaluator* evaluator, const cclus_frame* pred,
                                           const cclus_frame* gt);
CCLUS_API cclus_status cclus_evaluator_result(const cclus_evaluator* evaluator, double* map,
                                              double* ap50);
CCLUS_API cclus_status cclus_evaluator_report(const cclus_evaluator* evaluator, char** text);
CCLUS_API void cclus_evaluator_destroy(cclus_evaluator* evaluator);

/* ---- synthetic scenes (key=value, see README) ---- */
CCLUS_API cclus_status cclus_scene_create(cclus_scene** out);
CCLUS_API cclus_status cclus_scene_load(const char* path, cclus_scene** out);
CCLUS_API cclus_status cclus_scene_set(cclus_scene* scene, const char* key, const char* value);
/* For each frame k writes <prefix>_<kkkk>.ccsm, .ccof and _gt.json. The maps
 * carry the scene's noise model; the ground truth is always noise-free. */
CCLUS_API cclus_status cclus_scene_write(const cclus_scene* scene, size_t n_frames,
                                         const char* prefix);
CCLUS_API void cclus_scene_destroy(cclus_scene* scene);

/* ---- diagnostics ---- */
/* Clustering benchmark over blobbed clouds of the given sizes plus per-stage
 * pipeline timings; the report is CSV-like text. */
CCLUS_API cclus_status cclus_bench_run(const cclus_config* config, const size_t* sizes,
                                       size_t n_sizes, size_t repeats, size_t scene_frames,
                                       char** report);
/* Finite-difference check of the loss gradients. `corrupt` != 0 injects a
 * wrong gradient entry so the check must fail. */
CCLUS_API cclus_status cclus_gradcheck_run(size_t cases, uint64_t seed, int corrupt,
                                           int* passed, char** report);

#ifdef __cplusplus
}
#endif

#endif /* CCLUS_CCLUS_H */
