#include "cclus/cclus.h"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <new>
#include <sstream>
#include <string>

#include "cclus/bench.hpp"
#include "cclus/config.hpp"
#include "cclus/eval.hpp"
#include "cclus/io.hpp"
#include "cclus/losses.hpp"
#include "cclus/synth.hpp"
#include "cclus/track.hpp"

struct cclus_config {
  cclus::PipelineConfig value;
};
struct cclus_semantic {
  cclus::SemanticMap value;
};
struct cclus_offsets {
  cclus::OffsetMap value;
};
struct cclus_frame {
  cclus::GridDims dims;
  std::vector<cclus::Instance> instances;
  cclus::StageTimings timings;
};
struct cclus_tracker {
  cclus::TrackState state;
};
struct cclus_evaluator {
  std::vector<std::vector<cclus::Detection>> detections;
  std::vector<std::vector<cclus::GroundTruth>> gts;
};
struct cclus_scene {
  cclus::SceneSpec spec;
};

namespace {

thread_local std::string g_last_error;

cclus_status fail(cclus_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Runs fn and translates exceptions into status codes.
template <class Fn>
cclus_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return CCLUS_OK;
  } catch (const cclus::FormatError& e) {
    return fail(CCLUS_FORMAT, e.what());
  } catch (const cclus::DimensionError& e) {
    return fail(CCLUS_DIMENSION, e.what());
  } catch (const cclus::IoError& e) {
    return fail(CCLUS_IO, e.what());
  } catch (const cclus::InfeasibleError& e) {
    return fail(CCLUS_INFEASIBLE, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(CCLUS_INVALID_ARGUMENT, e.what());
  } catch (const std::out_of_range& e) {
    return fail(CCLUS_INVALID_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(CCLUS_RUNTIME, "out of memory");
  } catch (const std::exception& e) {
    return fail(CCLUS_RUNTIME, e.what());
  } catch (...) {
    return fail(CCLUS_RUNTIME, "unknown error");
  }
}

struct NullArgument : std::invalid_argument {
  explicit NullArgument(const char* what) : std::invalid_argument(std::string("null ") + what) {}
};

template <class T>
T& need(T* p, const char* what) {
  if (p == nullptr) throw NullArgument(what);
  return *p;
}

const char* text_arg(const char* p, const char* what) {
  if (p == nullptr) throw NullArgument(what);
  return p;
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void put_dims(cclus::GridDims d, uint32_t* width, uint32_t* height) {
  if (width) *width = d.width;
  if (height) *height = d.height;
}

const cclus::Instance& instance_at(const cclus_frame& f, size_t index) {
  if (index >= f.instances.size()) {
    throw std::out_of_range("instance index " + std::to_string(index) + " out of range (" +
                            std::to_string(f.instances.size()) + " instances)");
  }
  return f.instances[index];
}

std::string frame_name(const std::string& prefix, size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "_%04zu", k);
  return prefix + buf;
}

}  // namespace

extern "C" {

const char* cclus_version(void) { return "0.1.0"; }

const char* cclus_status_name(cclus_status status) {
  switch (status) {
    case CCLUS_OK:
      return "ok";
    case CCLUS_INVALID_ARGUMENT:
      return "invalid argument";
    case CCLUS_FORMAT:
      return "format error";
    case CCLUS_DIMENSION:
      return "dimension mismatch";
    case CCLUS_IO:
      return "i/o error";
    case CCLUS_INFEASIBLE:
      return "infeasible";
    case CCLUS_RUNTIME:
      return "runtime error";
  }
  return "unknown status";
}

const char* cclus_last_error(void) { return g_last_error.c_str(); }

void cclus_string_free(char* s) { std::free(s); }

// ---- config ----

cclus_status cclus_config_create(cclus_config** out) {
  return guarded([&] { need(out, "out") = new cclus_config{}; });
}

cclus_status cclus_config_load(const char* path, cclus_config** out) {
  return guarded([&] {
    need(out, "out") = nullptr;
    const std::string p = text_arg(path, "path");
    auto c = cclus::parse_config(cclus::io::read_text_file(p), p);
    *out = new cclus_config{c};
  });
}

cclus_status cclus_config_set(cclus_config* config, const char* key, const char* value) {
  return guarded([&] {
    cclus::set_config_value(need(config, "config").value, text_arg(key, "key"), text_arg(value, "value"));
  });
}

cclus_status cclus_config_validate(const cclus_config* config) {
  return guarded([&] { cclus::validate(need(config, "config").value); });
}

cclus_status cclus_config_format(const cclus_config* config, char** text) {
  return guarded([&] {
    need(text, "text") = copy_string(cclus::format_config(need(config, "config").value));
  });
}

void cclus_config_destroy(cclus_config* config) { delete config; }

// ---- maps ----

cclus_status cclus_semantic_create(uint32_t width, uint32_t height, const uint8_t* labels,
                                   cclus_semantic** out) {
  return guarded([&] {
    need(out, "out") = nullptr;
    const cclus::GridDims dims{width, height};
    cclus::validate_dims(dims);
    const uint8_t* l = &need(labels, "labels");
    *out = new cclus_semantic{
        cclus::SemanticMap(dims, std::vector<std::uint8_t>(l, l + dims.pixel_count()))};
  });
}

cclus_status cclus_semantic_load(const char* path, cclus_semantic** out) {
  return guarded([&] {
    need(out, "out") = nullptr;
    *out = new cclus_semantic{cclus::io::load_semantic(text_arg(path, "path"))};
  });
}

cclus_status cclus_semantic_save(const cclus_semantic* map, const char* path) {
  return guarded([&] { cclus::io::save_semantic(text_arg(path, "path"), need(map, "map").value); });
}

cclus_status cclus_semantic_dims(const cclus_semantic* map, uint32_t* width, uint32_t* height) {
  return guarded([&] { put_dims(need(map, "map").value.dims(), width, height); });
}

void cclus_semantic_destroy(cclus_semantic* map) { delete map; }

cclus_status cclus_offsets_create(uint32_t width, uint32_t height, const float* xy,
                                  cclus_offsets** out) {
  return guarded([&] {
    need(out, "out") = nullptr;
    const cclus::GridDims dims{width, height};
    cclus::validate_dims(dims);
    const float* v = &need(xy, "xy");
    std::vector<cclus::Offset> vectors(dims.pixel_count());
    for (std::size_t p = 0; p < vectors.size(); ++p) vectors[p] = {v[2 * p], v[2 * p + 1]};
    *out = new cclus_offsets{cclus::OffsetMap(dims, std::move(vectors))};
  });
}

cclus_status cclus_offsets_load(const char* path, cclus_offsets** out) {
  return guarded([&] {
    need(out, "out") = nullptr;
    *out = new cclus_offsets{cclus::io::load_offsets(text_arg(path, "path"))};
  });
}

cclus_status cclus_offsets_save(const cclus_offsets* map, const char* path) {
  return guarded([&] { cclus::io::save_offsets(text_arg(path, "path"), need(map, "map").value); });
}

cclus_status cclus_offsets_dims(const cclus_offsets* map, uint32_t* width, uint32_t* height) {
  return guarded([&] { put_dims(need(map, "map").value.dims(), width, height); });
}

void cclus_offsets_destroy(cclus_offsets* map) { delete map; }

// ---- segmentation ----

cclus_status cclus_segment(const cclus_config* config, const cclus_semantic* semantic,
                           const cclus_offsets* offsets, cclus_frame** out) {
  return guarded([&] {
    need(out, "out") = nullptr;
    const auto& cfg = need(config, "config").value;
    cclus::validate(cfg);
    auto result = cclus::segment_frame(need(semantic, "semantic").value,
                                       need(offsets, "offsets").value, cfg.segment);
    *out = new cclus_frame{result.dims, std::move(result.instances), result.timings};
  });
}

cclus_status cclus_frame_load_manifest(const char* path, cclus_frame** out) {
  return guarded([&] {
    need(out, "out") = nullptr;
    auto m = cclus::io::load_manifest(text_arg(path, "path"));
    *out = new cclus_frame{m.dims, std::move(m.instances), {}};
  });
}

cclus_status cclus_frame_save_manifest(const cclus_frame* frame, const char* frame_id,
                                       const char* path) {
  return guarded([&] {
    const auto& f = need(frame, "frame");
    cclus::io::save_manifest(text_arg(path, "path"),
                             {text_arg(frame_id, "frame_id"), f.dims, f.instances});
  });
}

cclus_status cclus_frame_dims(const cclus_frame* frame, uint32_t* width, uint32_t* height) {
  return guarded([&] { put_dims(need(frame, "frame").dims, width, height); });
}

size_t cclus_frame_instance_count(const cclus_frame* frame) {
  return frame ? frame->instances.size() : 0;
}

cclus_status cclus_frame_instance(const cclus_frame* frame, size_t index,
                                  cclus_instance_info* out) {
  return guarded([&] {
    const auto& inst = instance_at(need(frame, "frame"), index);
    need(out, "out") = {static_cast<int>(inst.cls), inst.confidence, inst.predicted_center.x,
                        inst.predicted_center.y, inst.mask.area()};
  });
}

cclus_status cclus_frame_instance_pixels(const cclus_frame* frame, size_t index, uint32_t* pixels,
                                         size_t capacity, size_t* count) {
  return guarded([&] {
    const auto px = instance_at(need(frame, "frame"), index).mask.pixels();
    if (count) *count = px.size();
    if (capacity > 0) {
      need(pixels, "pixels");
      std::memcpy(pixels, px.data(), std::min(capacity, px.size()) * sizeof(uint32_t));
    }
  });
}

cclus_status cclus_frame_timings(const cclus_frame* frame, cclus_timings* out) {
  return guarded([&] {
    const auto& t = need(frame, "frame").timings;
    need(out, "out") = {t.generate, t.filter, t.cluster, t.c2m, t.rc2m, t.sow, t.total};
  });
}

void cclus_frame_destroy(cclus_frame* frame) { delete frame; }

// ---- tracking ----

cclus_status cclus_tracker_create(const cclus_config* config, uint32_t width, uint32_t height,
                                  cclus_tracker** out) {
  return guarded([&] {
    need(out, "out") = nullptr;
    *out = new cclus_tracker{
        cclus::TrackState({width, height}, need(config, "config").value.tracking)};
  });
}

cclus_status cclus_tracker_update(cclus_tracker* tracker, size_t frame_index,
                                  const cclus_frame* frame) {
  return guarded([&] {
    const auto& f = need(frame, "frame");
    auto& t = need(tracker, "tracker");
    cclus::require_same_dims(f.dims, t.state.dims(), "frame vs tracker grid");
    t.state.update(frame_index, f.instances);
  });
}

size_t cclus_tracker_track_count(const cclus_tracker* tracker) {
  return tracker ? tracker->state.tracks().size() : 0;
}

cclus_status cclus_tracker_metrics(const cclus_tracker* tracker, size_t index,
                                   cclus_track_metrics* out) {
  return guarded([&] {
    const auto& s = need(tracker, "tracker").state;
    if (index >= s.tracks().size()) throw std::out_of_range("track index out of range");
    const auto m = cclus::track_metrics(s.tracks()[index], s.dims(), s.options().fps);
    need(out, "out") = {m.track_id, m.movement_px, m.avg_speed_px_s, m.body_pixel_size,
                        m.space_usage};
  });
}

cclus_status cclus_tracker_write_tracks(const cclus_tracker* tracker, const char* path) {
  return guarded([&] {
    std::ostringstream o;
    cclus::io::write_tracks_csv(o, cclus::io::track_rows(need(tracker, "tracker").state));
    cclus::io::write_text_file(text_arg(path, "path"), o.str());
  });
}

cclus_status cclus_tracker_write_metrics(const cclus_tracker* tracker, const char* path) {
  return guarded([&] {
    const auto& s = need(tracker, "tracker").state;
    std::vector<cclus::TrackMetrics> rows;
    for (const auto& t : s.tracks()) rows.push_back(cclus::track_metrics(t, s.dims(), s.options().fps));
    std::ostringstream o;
    cclus::io::write_metrics_csv(o, rows);
    cclus::io::write_text_file(text_arg(path, "path"), o.str());
  });
}

cclus_status cclus_tracker_write_heatmaps(const cclus_tracker* tracker, const char* prefix) {
  return guarded([&] {
    const auto& s = need(tracker, "tracker").state;
    const std::string base = text_arg(prefix, "prefix");
    for (const auto& t : s.tracks()) {
      const auto counts = cclus::heatmap(t);
      const std::string stem = base + "track_" + std::to_string(t.id);
      std::ostringstream pgm;
      cclus::io::write_pgm(pgm, s.dims(), counts);
      cclus::io::write_text_file(stem + ".pgm", pgm.str());
      std::ostringstream csv;
      cclus::io::write_counts_csv(csv, s.dims(), counts);
      cclus::io::write_text_file(stem + ".csv", csv.str());
    }
  });
}

void cclus_tracker_destroy(cclus_tracker* tracker) { delete tracker; }

// ---- evaluation ----

cclus_status cclus_evaluator_create(cclus_evaluator** out) {
  return guarded([&] { need(out, "out") = new cclus_evaluator{}; });
}

cclus_status cclus_evaluator_add(cclus_evaluator* evaluator, const cclus_frame* pred,
                                 const cclus_frame* gt) {
  return guarded([&] {
    auto& e = need(evaluator, "evaluator");
    const auto& p = need(pred, "pred");
    const auto& g = need(gt, "gt");
    const std::string what = "prediction vs ground truth, frame " + std::to_string(e.gts.size());
    cclus::require_same_dims(p.dims, g.dims, what.c_str());
    e.detections.push_back(cclus::to_detections(p.instances));
    e.gts.push_back(cclus::to_ground_truth(g.instances));
  });
}

cclus_status cclus_evaluator_result(const cclus_evaluator* evaluator, double* map, double* ap50) {
  return guarded([&] {
    const auto& e = need(evaluator, "evaluator");
    const auto r = cclus::map_eval(e.detections, e.gts);
    if (map) *map = r.map;
    if (ap50) *ap50 = r.ap_at(0.5);
  });
}

cclus_status cclus_evaluator_report(const cclus_evaluator* evaluator, char** text) {
  return guarded([&] {
    const auto& e = need(evaluator, "evaluator");
    need(text, "text") = copy_string(cclus::format_report(cclus::map_eval(e.detections, e.gts)));
  });
}

void cclus_evaluator_destroy(cclus_evaluator* evaluator) { delete evaluator; }

// ---- synthetic scenes ----

cclus_status cclus_scene_create(cclus_scene** out) {
  return guarded([&] { need(out, "out") = new cclus_scene{}; });
}

cclus_status cclus_scene_load(const char* path, cclus_scene** out) {
  return guarded([&] {
    need(out, "out") = nullptr;
    const std::string p = text_arg(path, "path");
    *out = new cclus_scene{cclus::parse_scene_spec(cclus::io::read_text_file(p), p)};
  });
}

cclus_status cclus_scene_set(cclus_scene* scene, const char* key, const char* value) {
  return guarded([&] {
    cclus::set_scene_value(need(scene, "scene").spec, text_arg(key, "key"), text_arg(value, "value"));
  });
}

cclus_status cclus_scene_write(const cclus_scene* scene, size_t n_frames, const char* prefix) {
  return guarded([&] {
    const auto& spec = need(scene, "scene").spec;
    const std::string base = text_arg(prefix, "prefix");
    const auto frames = cclus::gen_sequence(spec, n_frames);
    for (const auto& f : frames) {
      const std::string stem = frame_name(base, f.index);
      const auto maps = cclus::perturb(f, spec.noise, cclus::frame_seed(spec.seed, f.index));
      cclus::io::save_semantic(stem + ".ccsm", maps.semantic);
      cclus::io::save_offsets(stem + ".ccof", maps.offsets);
      cclus::io::save_manifest(stem + "_gt.json",
                               {stem.substr(stem.find_last_of('/') + 1), spec.dims,
                                cclus::ground_truth_instances(f)});
    }
  });
}

void cclus_scene_destroy(cclus_scene* scene) { delete scene; }

// ---- diagnostics ----

cclus_status cclus_bench_run(const cclus_config* config, const size_t* sizes, size_t n_sizes,
                             size_t repeats, size_t scene_frames, char** report) {
  return guarded([&] {
    const auto& cfg = need(config, "config").value;
    cclus::validate(cfg);
    cclus::BenchOptions options;
    if (n_sizes > 0) options.sizes.assign(&need(sizes, "sizes"), sizes + n_sizes);
    options.repeats = repeats;
    options.scene_frames = scene_frames;
    options.seed = cfg.seed;
    options.dbscan = cfg.segment.dbscan;
    options.mean_shift = cfg.segment.mean_shift;
    options.segment = cfg.segment;
    const auto r = cclus::run_bench(options);
    need(report, "report") = copy_string(cclus::format_bench(r));
  });
}

cclus_status cclus_gradcheck_run(size_t cases, uint64_t seed, int corrupt, int* passed,
                                 char** report) {
  return guarded([&] {
    cclus::GradCheckOptions options;
    options.cases = cases;
    options.seed = seed;
    options.corrupt = corrupt != 0;
    const auto r = cclus::gradient_check(options);
    if (passed) *passed = r.passed ? 1 : 0;
    if (report) *report = copy_string(cclus::format_report(r, options.tolerance));
  });
}

}  // extern "C"
