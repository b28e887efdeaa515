#include "cclus/assemble.hpp"

#include <algorithm>
#include <chrono>
#include <limits>

namespace cclus {

std::string_view to_string(InstanceClass cls) {
  return cls == InstanceClass::sow ? "sow" : "piglet";
}

InstanceClass parse_instance_class(std::string_view name) {
  if (name == "piglet") return InstanceClass::piglet;
  if (name == "sow") return InstanceClass::sow;
  throw std::invalid_argument("unknown instance class '" + std::string(name) + "'");
}

namespace {

void check_labels(const CenterCloud& cloud, const ClusterLabels& labels) {
  if (labels.labels.size() != cloud.points.size()) {
    throw std::invalid_argument("cluster labels cover " + std::to_string(labels.labels.size()) +
                                " points, cloud has " + std::to_string(cloud.points.size()));
  }
  for (const int l : labels.labels) {
    if (l < 0 || l > labels.group_count) {
      throw std::invalid_argument("cluster label " + std::to_string(l) + " outside [0, " +
                                  std::to_string(labels.group_count) + "]");
    }
  }
}

std::vector<Vec2> group_means(const CenterCloud& cloud, const ClusterLabels& labels,
                              std::vector<std::size_t>& sizes) {
  const auto m = static_cast<std::size_t>(labels.group_count);
  std::vector<Vec2> sums(m);
  sizes.assign(m, 0);
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const int l = labels.labels[i];
    if (l == 0) continue;
    sums[l - 1] = sums[l - 1] + cloud.points[i].position;
    ++sizes[l - 1];
  }
  for (std::size_t g = 0; g < m; ++g) {
    if (sizes[g] > 0) sums[g] = sums[g] * (1.0 / static_cast<double>(sizes[g]));
  }
  return sums;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

std::vector<Instance> c2m(const CenterCloud& cloud, const ClusterLabels& labels) {
  check_labels(cloud, labels);
  const auto m = static_cast<std::size_t>(labels.group_count);
  std::vector<std::size_t> sizes;
  const auto means = group_means(cloud, labels, sizes);
  std::vector<std::vector<std::uint32_t>> pixels(m);
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const int l = labels.labels[i];
    if (l != 0) pixels[l - 1].push_back(cloud.points[i].source_pixel);
  }
  const std::size_t largest = sizes.empty() ? 0 : *std::max_element(sizes.begin(), sizes.end());
  std::vector<Instance> out;
  out.reserve(m);
  for (std::size_t g = 0; g < m; ++g) {
    if (sizes[g] == 0) continue;
    Instance inst;
    // Votes are ordered by source pixel, so each group's pixels are already sorted.
    inst.mask = BinaryMask::from_sorted(cloud.dims, std::move(pixels[g]));
    inst.predicted_center = means[g];
    inst.cls = InstanceClass::piglet;
    inst.confidence = static_cast<double>(sizes[g]) / static_cast<double>(largest);
    out.push_back(std::move(inst));
  }
  return out;
}

std::optional<Instance> sow_instance(const SemanticMap& semantic) {
  std::vector<std::uint32_t> pixels;
  const auto labels = semantic.labels();
  for (std::uint32_t p = 0; p < labels.size(); ++p) {
    if (labels[p] == static_cast<std::uint8_t>(PixelClass::sow)) pixels.push_back(p);
  }
  if (pixels.empty()) return std::nullopt;
  Instance inst;
  inst.mask = BinaryMask::from_sorted(semantic.dims(), std::move(pixels));
  inst.predicted_center = inst.mask.centroid();
  inst.cls = InstanceClass::sow;
  inst.confidence = 1.0;
  return inst;
}

ClusterLabels rc2m(const CenterCloud& cloud, const ClusterLabels& labels) {
  check_labels(cloud, labels);
  if (labels.group_count == 0) return labels;
  std::vector<std::size_t> sizes;
  const auto means = group_means(cloud, labels, sizes);
  ClusterLabels out = labels;
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    if (out.labels[i] != 0) continue;
    const Vec2 c = cloud.points[i].position;
    double best = std::numeric_limits<double>::infinity();
    int best_id = 0;
    for (std::size_t g = 0; g < means.size(); ++g) {
      if (sizes[g] == 0) continue;
      const double d = squared_distance(c, means[g]);
      if (d < best) {
        best = d;
        best_id = static_cast<int>(g) + 1;
      }
    }
    out.labels[i] = best_id;
  }
  return out;
}

ClusterLabels cluster_cloud(const CenterCloud& cloud, const SegmentConfig& config) {
  std::vector<Vec2> kept;
  std::vector<std::size_t> where;
  kept.reserve(cloud.points.size());
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    if (cloud.points[i].filtered) continue;
    kept.push_back(cloud.points[i].position);
    where.push_back(i);
  }
  ClusterLabels sub;
  switch (config.algorithm) {
    case ClusterAlgorithm::dbscan:
      sub = dbscan(kept, config.dbscan);
      break;
    case ClusterAlgorithm::dbscan_naive:
      sub = dbscan_naive(kept, config.dbscan);
      break;
    case ClusterAlgorithm::mean_shift:
      sub = mean_shift(kept, config.mean_shift);
      break;
  }
  ClusterLabels out;
  out.group_count = sub.group_count;
  out.labels.assign(cloud.points.size(), 0);
  for (std::size_t k = 0; k < where.size(); ++k) out.labels[where[k]] = sub.labels[k];
  return out;
}

FrameResult segment_frame(const SemanticMap& semantic, const OffsetMap& offsets,
                          const SegmentConfig& config) {
  const auto start = Clock::now();
  FrameResult result;
  result.dims = semantic.dims();

  auto t = Clock::now();
  CenterCloud cloud = generate_centers(semantic, offsets);
  result.timings.generate = seconds_since(t);

  t = Clock::now();
  cloud = filter_centers(std::move(cloud), config.filter);
  result.timings.filter = seconds_since(t);

  t = Clock::now();
  ClusterLabels labels = cluster_cloud(cloud, config);
  result.timings.cluster = seconds_since(t);
  result.group_count = labels.group_count;

  t = Clock::now();
  std::vector<Instance> piglets = c2m(cloud, labels);
  result.timings.c2m = seconds_since(t);

  if (config.rc2m && labels.group_count > 0) {
    t = Clock::now();
    const ClusterLabels full = rc2m(cloud, labels);
    std::vector<Instance> grown = c2m(cloud, full);
    // Centers and confidences stay with the clustered consensus; RC2M only
    // grows the masks.
    for (std::size_t k = 0; k < grown.size(); ++k) {
      grown[k].predicted_center = piglets[k].predicted_center;
      grown[k].confidence = piglets[k].confidence;
    }
    piglets = std::move(grown);
    labels = full;
    result.timings.rc2m = seconds_since(t);
  }
  result.unassigned_pixel_count = static_cast<std::size_t>(
      std::count(labels.labels.begin(), labels.labels.end(), 0));

  t = Clock::now();
  result.instances = std::move(piglets);
  if (auto sow = sow_instance(semantic)) result.instances.push_back(std::move(*sow));
  result.timings.sow = seconds_since(t);

  result.timings.total = seconds_since(start);
  return result;
}

}  // namespace cclus
