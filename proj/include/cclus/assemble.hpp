#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "cclus/centers.hpp"
#include "cclus/cluster.hpp"
#include "cclus/core.hpp"

namespace cclus {

enum class InstanceClass : std::uint8_t { piglet = 1, sow = 2 };

std::string_view to_string(InstanceClass cls);
InstanceClass parse_instance_class(std::string_view name);

struct Instance {
  BinaryMask mask;
  Vec2 predicted_center;
  InstanceClass cls = InstanceClass::piglet;
  double confidence = 1.0;

  friend bool operator==(const Instance&, const Instance&) = default;
};

/// Wall time of each pipeline stage, in seconds.
struct StageTimings {
  double generate = 0.0;
  double filter = 0.0;
  double cluster = 0.0;
  double c2m = 0.0;
  double rc2m = 0.0;
  double sow = 0.0;
  double total = 0.0;
};

struct FrameResult {
  GridDims dims;
  std::vector<Instance> instances;  ///< piglets first (by group ID), then the sow
  std::size_t unassigned_pixel_count = 0;
  int group_count = 0;
  StageTimings timings;
};

/// Centers-to-mask: one instance per group 1..M whose mask holds the source
/// pixels of that group's votes. Predicted center is the mean vote position;
/// confidence is group size over the largest group size.
std::vector<Instance> c2m(const CenterCloud& cloud, const ClusterLabels& labels);

/// The whole sow-labelled region as a single instance, if there is one.
std::optional<Instance> sow_instance(const SemanticMap& semantic);

/// Remain-centers-to-mask: each group-0 vote takes the label of the nearest
/// group mean (means computed once, before any reassignment; ties go to the
/// lower group ID). Labelled votes are untouched. With no groups the labels
/// come back unchanged.
ClusterLabels rc2m(const CenterCloud& cloud, const ClusterLabels& labels);

struct SegmentConfig {
  FilterParams filter;
  ClusterAlgorithm algorithm = ClusterAlgorithm::dbscan;
  DbscanParams dbscan;
  MeanShiftParams mean_shift;
  bool rc2m = true;
};

/// Clusters the unfiltered votes and maps the result back onto the whole
/// cloud; filtered votes stay in group 0.
ClusterLabels cluster_cloud(const CenterCloud& cloud, const SegmentConfig& config);

/// generate -> filter -> cluster -> C2M -> (RC2M -> C2M) -> sow.
FrameResult segment_frame(const SemanticMap& semantic, const OffsetMap& offsets,
                          const SegmentConfig& config);

}  // namespace cclus
