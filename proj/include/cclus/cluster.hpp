#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cclus/core.hpp"

namespace cclus {

/// Per-point group labels: 0 = noise, 1..group_count = groups.
struct ClusterLabels {
  std::vector<int> labels;
  int group_count = 0;

  friend bool operator==(const ClusterLabels&, const ClusterLabels&) = default;
};

/// Cell coordinate floor(v) clamped to a range that packs into 32 bits; points
/// beyond it share the outermost cells, which only costs extra distance checks.
inline std::int64_t clamped_cell(double v) {
  constexpr double kLimit = 1073741823.0;
  return static_cast<std::int64_t>(std::clamp(std::floor(v), -kLimit, kLimit));
}

/// Uniform grid over a point set with cell size equal to the query radius, so a
/// closed-ball query only touches the 3x3 block of cells around the query.
class GridIndex {
 public:
  GridIndex(std::span<const Vec2> points, double cell_size);

  double cell_size() const { return cell_size_; }
  std::size_t size() const { return points_.size(); }
  std::span<const Vec2> points() const { return points_; }

  /// Calls fn(index) for every point with squared distance <= r^2 to `query`,
  /// where r is the cell size. Visit order is unspecified.
  template <class Fn>
  void for_each_neighbor(Vec2 query, Fn&& fn) const {
    const double r2 = cell_size_ * cell_size_;
    const auto cx = cell_coord(query.x);
    const auto cy = cell_coord(query.y);
    for (std::int64_t dy = -1; dy <= 1; ++dy) {
      for (std::int64_t dx = -1; dx <= 1; ++dx) {
        const auto it = cells_.find(cell_key(cx + dx, cy + dy));
        if (it == cells_.end()) continue;
        for (std::uint32_t k = starts_[it->second]; k < starts_[it->second + 1]; ++k) {
          const std::uint32_t i = order_[k];
          if (squared_distance(points_[i], query) <= r2) fn(i);
        }
      }
    }
  }

  /// Number of points within the cell-size radius, counting stops at `stop_at`.
  std::size_t count_neighbors(Vec2 query, std::size_t stop_at) const;

 private:
  std::int64_t cell_coord(double v) const {
    return clamped_cell(v / cell_size_);
  }
  static std::uint64_t cell_key(std::int64_t cx, std::int64_t cy) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(cx)) << 32) |
           static_cast<std::uint32_t>(cy);
  }

  double cell_size_;
  std::vector<Vec2> points_;
  std::vector<std::uint32_t> order_;   // point indices grouped by cell
  std::vector<std::uint32_t> starts_;  // cell c owns order_[starts_[c], starts_[c+1])
  std::unordered_map<std::uint64_t, std::uint32_t> cells_;
};

/// Indices (ascending) of the points within distance r of `query`, boundary
/// included. Throws std::invalid_argument if r differs from the cell size.
std::vector<std::uint32_t> radius_neighbors(const GridIndex& index, Vec2 query, double r);

struct DbscanParams {
  double eps = 2.5;
  std::size_t min_pts = 50;
};

/// DBSCAN over a uniform grid index. A point is core iff at least min_pts
/// points (itself included) lie within eps. Points are scanned in ascending
/// index order and each cluster is expanded to completion before the next
/// starts, so a border point belongs to the first cluster that reaches it.
ClusterLabels dbscan(std::span<const Vec2> points, const DbscanParams& params);

/// Exhaustive O(n^2) reference with the same contract; output is identical to
/// dbscan() for every input.
ClusterLabels dbscan_naive(std::span<const Vec2> points, const DbscanParams& params);

struct MeanShiftParams {
  double bandwidth = 10.0;
  int max_iter = 300;
  double shift_tol = 1e-3;
  double merge_radius = 5.0;
};

/// Flat-kernel mean shift. Every point climbs to a mode by repeatedly moving to
/// the mean of the input points within `bandwidth` (grid-indexed window search); modes
/// within merge_radius of an earlier group's mode join that group. No point is
/// labelled noise.
ClusterLabels mean_shift(std::span<const Vec2> points, const MeanShiftParams& params);

enum class ClusterAlgorithm { dbscan, dbscan_naive, mean_shift };

std::string_view to_string(ClusterAlgorithm algo);
/// Accepts "dbscan", "dbscan-naive", "mean-shift"; throws std::invalid_argument.
ClusterAlgorithm parse_cluster_algorithm(std::string_view name);

}  // namespace cclus
