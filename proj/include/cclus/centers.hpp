#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cclus/core.hpp"

namespace cclus {

/// One center vote cast by a piglet pixel.
struct CenterPoint {
  std::uint32_t source_pixel = 0;
  Vec2 position;
  int group = 0;  ///< 0 = unclassified / noise
  bool filtered = false;

  friend bool operator==(const CenterPoint&, const CenterPoint&) = default;
};

/// Votes of every piglet pixel, ordered by ascending source pixel.
struct CenterCloud {
  GridDims dims;
  std::vector<CenterPoint> points;

  std::vector<Vec2> positions() const;
  std::size_t filtered_count() const;
};

/// One vote per piglet pixel at pixel + offset. Positions may fall outside the
/// grid. Throws DimensionError if the maps disagree in size.
CenterCloud generate_centers(const SemanticMap& semantic, const OffsetMap& offsets);

enum class FilterStrategy {
  /// Keep a vote iff at least `min_neighbors` other votes lie within radius_t.
  density,
  /// Keep a vote iff its offset magnitude is at most radius_t.
  offset_magnitude,
};

struct FilterParams {
  FilterStrategy strategy = FilterStrategy::density;
  double radius_t = 20.0;
  std::size_t min_neighbors = 10;
};

/// Flags outliers without removing them: a filtered point gets group 0 and
/// `filtered = true`, so RC2M can reclaim it later. Throws
/// std::invalid_argument if radius_t <= 0.
CenterCloud filter_centers(CenterCloud cloud, const FilterParams& params);

inline CenterCloud filter_centers(CenterCloud cloud, double radius_t, std::size_t min_neighbors) {
  return filter_centers(std::move(cloud), FilterParams{FilterStrategy::density, radius_t,
                                                       min_neighbors});
}

}  // namespace cclus
