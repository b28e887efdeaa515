#include "cclus/centers.hpp"

#include "cclus/cluster.hpp"

namespace cclus {

std::vector<Vec2> CenterCloud::positions() const {
  std::vector<Vec2> out;
  out.reserve(points.size());
  for (const auto& c : points) out.push_back(c.position);
  return out;
}

std::size_t CenterCloud::filtered_count() const {
  std::size_t n = 0;
  for (const auto& c : points) n += c.filtered ? 1 : 0;
  return n;
}

CenterCloud generate_centers(const SemanticMap& semantic, const OffsetMap& offsets) {
  require_same_dims(semantic.dims(), offsets.dims(), "semantic map vs offset map");
  const GridDims dims = semantic.dims();
  CenterCloud cloud{dims, {}};
  const auto labels = semantic.labels();
  for (std::uint32_t p = 0; p < labels.size(); ++p) {
    if (labels[p] != static_cast<std::uint8_t>(PixelClass::piglet)) continue;
    const Offset& o = offsets.at(p);
    const Vec2 pixel = dims.position(p);
    cloud.points.push_back({p, {pixel.x + o.dx, pixel.y + o.dy}, 0, false});
  }
  return cloud;
}

CenterCloud filter_centers(CenterCloud cloud, const FilterParams& params) {
  if (!(params.radius_t > 0.0) || !std::isfinite(params.radius_t)) {
    throw std::invalid_argument("filter radius t must be positive");
  }
  std::vector<char> keep(cloud.points.size(), 1);
  if (params.strategy == FilterStrategy::density) {
    if (params.min_neighbors > 0 && !cloud.points.empty()) {
      const auto positions = cloud.positions();
      const GridIndex index(positions, params.radius_t);
      // The query point itself is always inside its own ball, hence the +1.
      const std::size_t needed = params.min_neighbors + 1;
      for (std::size_t i = 0; i < positions.size(); ++i) {
        keep[i] = index.count_neighbors(positions[i], needed) >= needed;
      }
    }
  } else {
    const double t2 = params.radius_t * params.radius_t;
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
      const auto& c = cloud.points[i];
      keep[i] = squared_distance(c.position, cloud.dims.position(c.source_pixel)) <= t2;
    }
  }
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    if (!keep[i]) {
      cloud.points[i].filtered = true;
      cloud.points[i].group = 0;
    }
  }
  return cloud;
}

}  // namespace cclus
