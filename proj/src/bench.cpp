#include "cclus/bench.hpp"

#include <chrono>
#include <cstdio>
#include <random>
#include <sstream>

#include "cclus/synth.hpp"

namespace cclus {

namespace {

template <class Fn>
double seconds(Fn&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::vector<Vec2> blob_cloud(const BlobCloudSpec& spec) {
  if (spec.blobs == 0 && spec.n > 0) throw std::invalid_argument("blob cloud needs at least one blob");
  if (!(spec.sigma >= 0.0)) throw std::invalid_argument("blob sigma must be >= 0");
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> ux(0.0, spec.dims.width);
  std::uniform_real_distribution<double> uy(0.0, spec.dims.height);
  std::vector<Vec2> means(spec.blobs);
  for (auto& m : means) m = {ux(rng), uy(rng)};
  std::normal_distribution<double> g(0.0, spec.sigma);
  std::vector<Vec2> points(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const Vec2 m = means[i % spec.blobs];
    points[i] = {m.x + g(rng), m.y + g(rng)};
  }
  return points;
}

BenchRow bench_clustering(std::size_t n, const BenchOptions& options) {
  const std::size_t repeats = std::max<std::size_t>(options.repeats, 1);
  const auto points = blob_cloud({n, options.blobs, options.sigma, {512, 384}, options.seed});
  BenchRow row;
  row.n = n;
  for (std::size_t r = 0; r < repeats; ++r) {
    ClusterLabels a;
    ClusterLabels b;
    row.dbscan_s += seconds([&] { a = dbscan(points, options.dbscan); });
    row.mean_shift_s += seconds([&] { b = mean_shift(points, options.mean_shift); });
    row.dbscan_groups = a.group_count;
    row.mean_shift_groups = b.group_count;
  }
  row.dbscan_s /= static_cast<double>(repeats);
  row.mean_shift_s /= static_cast<double>(repeats);
  if (n > 0 && row.dbscan_s > 0.0) row.speedup = row.mean_shift_s / row.dbscan_s;
  return row;
}

BenchReport run_bench(const BenchOptions& options) {
  BenchReport report;
  for (const auto n : options.sizes) report.rows.push_back(bench_clustering(n, options));

  SceneSpec spec;
  spec.noise = {0.02, 1.5};
  for (std::size_t k = 0; k < options.scene_frames; ++k) {
    spec.seed = options.seed + k;
    const auto frame = gen_frame(spec, 0);
    const auto noisy = perturb(frame, spec.noise, frame_seed(spec.seed, 0));
    const auto t = segment_frame(noisy.semantic, noisy.offsets, options.segment).timings;
    report.stages.generate += t.generate;
    report.stages.filter += t.filter;
    report.stages.cluster += t.cluster;
    report.stages.c2m += t.c2m;
    report.stages.rc2m += t.rc2m;
    report.stages.sow += t.sow;
    report.stages.total += t.total;
  }
  report.scene_frames = options.scene_frames;
  if (report.scene_frames > 0) {
    const auto k = static_cast<double>(report.scene_frames);
    auto& s = report.stages;
    for (double* v : {&s.generate, &s.filter, &s.cluster, &s.c2m, &s.rc2m, &s.sow, &s.total}) *v /= k;
  }
  return report;
}

std::string format_bench(const BenchReport& report) {
  std::ostringstream o;
  o << "clustering (blobbed clouds)\n";
  o << "n,dbscan_s,mean_shift_s,dbscan_groups,mean_shift_groups,speedup\n";
  for (const auto& r : report.rows) {
    o << r.n << ',' << fixed(r.dbscan_s, 6) << ',' << fixed(r.mean_shift_s, 6) << ','
      << r.dbscan_groups << ',' << r.mean_shift_groups << ','
      << (r.speedup ? fixed(*r.speedup, 2) : std::string("n/a")) << '\n';
  }
  if (report.scene_frames > 0) {
    const auto& s = report.stages;
    o << "\npipeline stages (mean over " << report.scene_frames << " synthetic frames, seconds)\n";
    o << "stage,seconds\n";
    o << "generate," << fixed(s.generate, 6) << '\n'
      << "filter," << fixed(s.filter, 6) << '\n'
      << "cluster," << fixed(s.cluster, 6) << '\n'
      << "c2m," << fixed(s.c2m, 6) << '\n'
      << "rc2m," << fixed(s.rc2m, 6) << '\n'
      << "sow," << fixed(s.sow, 6) << '\n'
      << "total," << fixed(s.total, 6) << '\n';
  }
  return o.str();
}

}  // namespace cclus
