// cclus command-line front end. Everything goes through the C interface of
// libcclus; exit codes are 0 on success, 1 on runtime failure, 2 on bad input.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "cclus/cclus.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitBadInput = 2;

struct Failure {
  int code;
  std::string message;
};

int exit_code_for(cclus_status s, bool writing) {
  switch (s) {
    case CCLUS_OK:
      return kExitOk;
    case CCLUS_IO:
      return writing ? kExitRuntime : kExitBadInput;
    case CCLUS_RUNTIME:
      return kExitRuntime;
    default:
      return kExitBadInput;
  }
}

// Throws Failure carrying the library's message, prefixed by `context`.
void check(cclus_status s, const std::string& context, bool writing = false) {
  if (s == CCLUS_OK) return;
  std::string msg = cclus_last_error();
  throw Failure{exit_code_for(s, writing), context.empty() ? msg : context + ": " + msg};
}

template <class T, void (*Destroy)(T*)>
struct Deleter {
  void operator()(T* p) const { Destroy(p); }
};
using ConfigPtr = std::unique_ptr<cclus_config, Deleter<cclus_config, cclus_config_destroy>>;
using SemanticPtr = std::unique_ptr<cclus_semantic, Deleter<cclus_semantic, cclus_semantic_destroy>>;
using OffsetsPtr = std::unique_ptr<cclus_offsets, Deleter<cclus_offsets, cclus_offsets_destroy>>;
using FramePtr = std::unique_ptr<cclus_frame, Deleter<cclus_frame, cclus_frame_destroy>>;
using TrackerPtr = std::unique_ptr<cclus_tracker, Deleter<cclus_tracker, cclus_tracker_destroy>>;
using EvaluatorPtr =
    std::unique_ptr<cclus_evaluator, Deleter<cclus_evaluator, cclus_evaluator_destroy>>;
using ScenePtr = std::unique_ptr<cclus_scene, Deleter<cclus_scene, cclus_scene_destroy>>;

struct OwnedString {
  char* s = nullptr;
  ~OwnedString() { cclus_string_free(s); }
};

// Pipeline flags shared by the subcommands; each mirrors a config key.
struct ConfigFlags {
  std::string file;
  std::vector<std::pair<std::string, std::string>> overrides;
  std::string eps, min_pts, t, min_neighbors, filter, rc2m, algo, min_iou, fps, seed;

  void attach(CLI::App* app) {
    app->add_option("--config", file, "key=value pipeline config file");
    app->add_option("--eps", eps, "DBSCAN radius");
    app->add_option("--min-pts", min_pts, "DBSCAN core threshold");
    app->add_option("--t", t, "outlier filter radius");
    app->add_option("--min-neighbors", min_neighbors, "outlier filter neighbor count");
    app->add_option("--filter", filter, "density | offset-magnitude");
    app->add_option("--rc2m", rc2m, "on | off");
    app->add_option("--algo", algo, "dbscan | dbscan-naive | mean-shift");
    app->add_option("--min-iou", min_iou, "tracking pairing threshold");
    app->add_option("--fps", fps, "frame rate for speeds");
    app->add_option("--seed", seed, "random seed");
  }

  ConfigPtr build() const {
    cclus_config* raw = nullptr;
    if (file.empty()) {
      check(cclus_config_create(&raw), "");
    } else {
      check(cclus_config_load(file.c_str(), &raw), "");
    }
    ConfigPtr config(raw);
    const std::pair<const char*, const std::string*> flags[] = {
        {"eps", &eps},         {"min_pts", &min_pts}, {"t", &t},
        {"min_neighbors", &min_neighbors},           {"filter", &filter},
        {"rc2m", &rc2m},       {"algo", &algo},       {"min_iou", &min_iou},
        {"fps", &fps},         {"seed", &seed}};
    for (const auto& [key, value] : flags) {
      if (!value->empty()) check(cclus_config_set(config.get(), key, value->c_str()), std::string("--") + key);
    }
    check(cclus_config_validate(config.get()), "config");
    return config;
  }
};

std::size_t worker_count(std::size_t jobs) {
  std::size_t n = std::max(1U, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("CCLUS_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) n = static_cast<std::size_t>(v);
  }
  return std::max<std::size_t>(1, std::min(n, jobs));
}

// Runs job(i) for i in [0, count) on a small pool; rethrows the failure of the
// lowest failing index so diagnostics do not depend on scheduling.
template <class Job>
void parallel_for(std::size_t count, Job&& job) {
  std::vector<std::optional<Failure>> failures(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        job(i);
      } catch (const Failure& f) {
        failures[i] = f;
      }
    }
  };
  std::vector<std::thread> pool;
  const std::size_t n = worker_count(count);
  for (std::size_t k = 1; k < n; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& f : failures) {
    if (f) throw *f;
  }
}

std::string stem_of(const std::string& path) { return std::filesystem::path(path).stem().string(); }

FramePtr load_frame(const std::string& path, const std::string& context) {
  cclus_frame* raw = nullptr;
  check(cclus_frame_load_manifest(path.c_str(), &raw), context);
  return FramePtr(raw);
}

int cmd_segment(const ConfigFlags& flags, const std::vector<std::string>& semantic,
                const std::vector<std::string>& offsets, const std::vector<std::string>& out,
                bool timings) {
  if (semantic.size() != offsets.size() || semantic.size() != out.size()) {
    throw Failure{kExitBadInput, "need the same number of --semantic, --offsets and --out files"};
  }
  const auto config = flags.build();
  std::vector<cclus_timings> t(semantic.size());
  std::vector<std::size_t> counts(semantic.size());
  parallel_for(semantic.size(), [&](std::size_t i) {
    cclus_semantic* s = nullptr;
    check(cclus_semantic_load(semantic[i].c_str(), &s), "");
    SemanticPtr sem(s);
    cclus_offsets* o = nullptr;
    check(cclus_offsets_load(offsets[i].c_str(), &o), "");
    OffsetsPtr off(o);
    cclus_frame* f = nullptr;
    check(cclus_segment(config.get(), sem.get(), off.get(), &f), semantic[i] + " + " + offsets[i]);
    FramePtr frame(f);
    check(cclus_frame_save_manifest(frame.get(), stem_of(out[i]).c_str(), out[i].c_str()), "", true);
    check(cclus_frame_timings(frame.get(), &t[i]), "");
    counts[i] = cclus_frame_instance_count(frame.get());
  });
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::printf("%s: %zu instances\n", out[i].c_str(), counts[i]);
    if (timings) {
      std::printf("  generate=%.6f filter=%.6f cluster=%.6f c2m=%.6f rc2m=%.6f sow=%.6f total=%.6f\n",
                  t[i].generate, t[i].filter, t[i].cluster, t[i].c2m, t[i].rc2m, t[i].sow,
                  t[i].total);
    }
  }
  return kExitOk;
}

int cmd_track(const ConfigFlags& flags, const std::vector<std::string>& manifests,
              const std::string& out_dir, bool heatmaps) {
  if (manifests.empty()) throw Failure{kExitBadInput, "no frames"};
  const auto config = flags.build();
  std::filesystem::create_directories(out_dir);
  TrackerPtr tracker;
  for (std::size_t k = 0; k < manifests.size(); ++k) {
    const auto frame = load_frame(manifests[k], "frame " + std::to_string(k));
    if (!tracker) {
      std::uint32_t w = 0, h = 0;
      check(cclus_frame_dims(frame.get(), &w, &h), "");
      cclus_tracker* raw = nullptr;
      check(cclus_tracker_create(config.get(), w, h, &raw), "");
      tracker.reset(raw);
    }
    check(cclus_tracker_update(tracker.get(), k, frame.get()), "frame " + std::to_string(k));
  }
  const std::string base = (std::filesystem::path(out_dir) / "").string();
  check(cclus_tracker_write_tracks(tracker.get(), (base + "tracks.csv").c_str()), "", true);
  check(cclus_tracker_write_metrics(tracker.get(), (base + "metrics.csv").c_str()), "", true);
  if (heatmaps) {
    std::filesystem::create_directories(base + "heatmaps");
    check(cclus_tracker_write_heatmaps(tracker.get(), (base + "heatmaps/").c_str()), "", true);
  }
  std::printf("%zu frames, %zu tracks -> %s\n", manifests.size(),
              cclus_tracker_track_count(tracker.get()), out_dir.c_str());
  return kExitOk;
}

int cmd_eval(const std::vector<std::string>& pred, const std::vector<std::string>& gt) {
  if (pred.size() != gt.size()) {
    throw Failure{kExitBadInput, "misaligned frame lists: " + std::to_string(pred.size()) +
                                     " prediction vs " + std::to_string(gt.size()) +
                                     " ground-truth manifests"};
  }
  std::vector<FramePtr> p(pred.size());
  std::vector<FramePtr> g(gt.size());
  parallel_for(pred.size(), [&](std::size_t i) {
    p[i] = load_frame(pred[i], "frame " + std::to_string(i));
    g[i] = load_frame(gt[i], "frame " + std::to_string(i));
  });
  cclus_evaluator* raw = nullptr;
  check(cclus_evaluator_create(&raw), "");
  EvaluatorPtr ev(raw);
  for (std::size_t i = 0; i < p.size(); ++i) {
    check(cclus_evaluator_add(ev.get(), p[i].get(), g[i].get()), "frame " + std::to_string(i));
  }
  OwnedString report;
  check(cclus_evaluator_report(ev.get(), &report.s), "");
  std::fputs(report.s, stdout);
  return kExitOk;
}

int cmd_bench(const ConfigFlags& flags, const std::vector<std::size_t>& sizes, std::size_t repeats,
              std::size_t frames) {
  const auto config = flags.build();
  OwnedString report;
  check(cclus_bench_run(config.get(), sizes.data(), sizes.size(), repeats, frames, &report.s), "");
  std::fputs(report.s, stdout);
  return kExitOk;
}

int cmd_gradcheck(std::size_t cases, std::uint64_t seed, bool corrupt) {
  int passed = 0;
  OwnedString report;
  check(cclus_gradcheck_run(cases, seed, corrupt ? 1 : 0, &passed, &report.s), "");
  std::fputs(report.s, stdout);
  return passed ? kExitOk : kExitRuntime;
}

int cmd_synth(const std::string& spec_file, std::size_t frames, const std::string& prefix,
              const std::string& seed) {
  cclus_scene* raw = nullptr;
  check(cclus_scene_load(spec_file.c_str(), &raw), "");
  ScenePtr scene(raw);
  if (!seed.empty()) check(cclus_scene_set(scene.get(), "seed", seed.c_str()), "--seed");
  const auto parent = std::filesystem::path(prefix).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  check(cclus_scene_write(scene.get(), frames, prefix.c_str()), spec_file);
  std::printf("wrote %zu frame(s) with prefix %s\n", frames, prefix.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cclus: center-clustering instance segmentation, tracking and evaluation"};
  app.set_version_flag("--version", std::string(cclus_version()));
  app.require_subcommand(1);

  ConfigFlags seg_flags;
  std::vector<std::string> seg_sem, seg_off, seg_out;
  bool seg_timings = false;
  auto* seg = app.add_subcommand("segment", "semantic + offset maps -> instance manifest");
  seg->add_option("--semantic", seg_sem, "CCSM file(s)")->required();
  seg->add_option("--offsets", seg_off, "CCOF file(s)")->required();
  seg->add_option("--out", seg_out, "manifest JSON file(s)")->required();
  seg->add_flag("--timings", seg_timings, "print per-stage wall times");
  seg_flags.attach(seg);

  ConfigFlags track_flags;
  std::vector<std::string> track_in;
  std::string track_out;
  bool no_heatmaps = false;
  auto* track = app.add_subcommand("track", "ordered manifests -> tracks, metrics, heat maps");
  track->add_option("manifests", track_in, "manifest JSON files in frame order");
  track->add_option("--out-dir", track_out, "output directory")->required();
  track->add_flag("--no-heatmaps", no_heatmaps, "skip heat map images");
  track_flags.attach(track);

  std::vector<std::string> eval_pred, eval_gt;
  auto* eval = app.add_subcommand("eval", "mask mAP of predictions against ground truth");
  eval->add_option("--pred", eval_pred, "prediction manifests")->required();
  eval->add_option("--gt", eval_gt, "ground-truth manifests")->required();

  ConfigFlags bench_flags;
  std::vector<std::size_t> bench_sizes{0, 5000, 20000, 50000};
  std::size_t bench_repeats = 1;
  std::size_t bench_frames = 3;
  auto* bench = app.add_subcommand("bench", "DBSCAN vs mean-shift timing and stage breakdown");
  bench->add_option("--sizes", bench_sizes, "cloud sizes")->delimiter(',');
  bench->add_option("--repeats", bench_repeats, "timed runs per size");
  bench->add_option("--frames", bench_frames, "synthetic frames for stage timings");
  bench_flags.attach(bench);

  std::size_t gc_cases = 50;
  std::uint64_t gc_seed = 1;
  bool gc_corrupt = false;
  auto* gc = app.add_subcommand("gradcheck", "finite-difference check of the loss gradients");
  gc->add_option("--cases", gc_cases, "random inputs");
  gc->add_option("--seed", gc_seed, "random seed");
  gc->add_flag("--corrupt", gc_corrupt, "inject a wrong gradient (must fail)");

  std::string synth_spec, synth_prefix, synth_seed;
  std::size_t synth_frames = 1;
  auto* synth = app.add_subcommand("synth", "synthetic scene -> maps and ground truth");
  synth->add_option("spec", synth_spec, "key=value scene file")->required();
  synth->add_option("--frames", synth_frames, "sequence length");
  synth->add_option("--out-prefix", synth_prefix, "output path prefix")->required();
  synth->add_option("--seed", synth_seed, "override the scene seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitBadInput;
  }

  try {
    if (*seg) return cmd_segment(seg_flags, seg_sem, seg_off, seg_out, seg_timings);
    if (*track) return cmd_track(track_flags, track_in, track_out, !no_heatmaps);
    if (*eval) return cmd_eval(eval_pred, eval_gt);
    if (*bench) return cmd_bench(bench_flags, bench_sizes, bench_repeats, bench_frames);
    if (*gc) return cmd_gradcheck(gc_cases, gc_seed, gc_corrupt);
    if (*synth) return cmd_synth(synth_spec, synth_frames, synth_prefix, synth_seed);
  } catch (const Failure& f) {
    std::fprintf(stderr, "cclus: %s\n", f.message.c_str());
    return f.code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "cclus: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitBadInput;
}
