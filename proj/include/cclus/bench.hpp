#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cclus/assemble.hpp"
#include "cclus/cluster.hpp"

namespace cclus {

/// Isotropic Gaussian blobs with uniformly placed means, points dealt to blobs
/// round-robin. Shaped like the vote cloud of a frame full of piglets.
struct BlobCloudSpec {
  std::size_t n = 50000;
  std::size_t blobs = 25;
  double sigma = 2.0;
  GridDims dims{512, 384};
  std::uint64_t seed = 1;
};

std::vector<Vec2> blob_cloud(const BlobCloudSpec& spec);

struct BenchOptions {
  std::vector<std::size_t> sizes{0, 5000, 20000, 50000};
  std::size_t repeats = 1;
  std::size_t blobs = 25;
  double sigma = 2.0;
  std::uint64_t seed = 1;
  DbscanParams dbscan;
  MeanShiftParams mean_shift;
  SegmentConfig segment;     ///< used for the per-stage pipeline timings
  std::size_t scene_frames = 3;
};

struct BenchRow {
  std::size_t n = 0;
  double dbscan_s = 0.0;      ///< mean wall time over repeats
  double mean_shift_s = 0.0;
  int dbscan_groups = 0;
  int mean_shift_groups = 0;
  /// mean-shift time over DBSCAN time; empty when n = 0.
  std::optional<double> speedup;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  StageTimings stages;  ///< mean over scene_frames synthetic frames
  std::size_t scene_frames = 0;
};

BenchRow bench_clustering(std::size_t n, const BenchOptions& options);
BenchReport run_bench(const BenchOptions& options);
std::string format_bench(const BenchReport& report);

}  // namespace cclus
