#pragma once

#include <span>
#include <string>
#include <vector>

#include "cclus/assemble.hpp"
#include "cclus/core.hpp"

namespace cclus {

struct Detection {
  BinaryMask mask;
  double score = 1.0;
  InstanceClass cls = InstanceClass::piglet;
};

struct GroundTruth {
  BinaryMask mask;
  InstanceClass cls = InstanceClass::piglet;
};

/// |a ∩ b| / |a ∪ b|, 0 when both are empty. Throws DimensionError on a grid
/// mismatch.
double mask_iou(const BinaryMask& a, const BinaryMask& b);

/// Single-frame, single-class AP. Detections are taken in descending score
/// order and each one claims the unmatched GT of highest IoU when that IoU
/// reaches `iou_thresh`. AP is the area under the precision/recall curve with
/// precision made monotone non-increasing. No GTs: 1.0 if there are also no
/// detections, else 0.0.
double average_precision(std::span<const Detection> detections,
                         std::span<const BinaryMask> gts, double iou_thresh);

std::vector<double> coco_iou_thresholds();

struct EvalOptions {
  std::vector<double> iou_thresholds = coco_iou_thresholds();
};

struct MatchRecord {
  std::size_t frame = 0;
  std::size_t detection = 0;  ///< index within the frame's detections
  long gt = -1;               ///< index within the frame's GTs, -1 for a false positive
  double iou = 0.0;
};

struct ClassAP {
  InstanceClass cls = InstanceClass::piglet;
  std::size_t gt_count = 0;
  std::size_t detection_count = 0;
  std::vector<double> ap;  ///< per threshold
  double mean = 0.0;
};

struct APResult {
  std::vector<double> thresholds;
  std::vector<double> ap;  ///< per threshold, averaged over evaluated classes
  std::vector<ClassAP> classes;
  double map = 0.0;
  std::vector<std::string> warnings;
  /// matches[t] lists every detection's outcome at thresholds[t].
  std::vector<std::vector<MatchRecord>> matches;

  /// AP at the threshold closest to `thresh` (e.g. 0.5).
  double ap_at(double thresh) const;
};

/// Pools detections across frames per class, computes AP at every threshold
/// and averages over thresholds and the classes that have ground truth.
/// Throws std::invalid_argument if the frame lists differ in length.
APResult map_eval(std::span<const std::vector<Detection>> detections,
                  std::span<const std::vector<GroundTruth>> gts, const EvalOptions& options = {});

/// Per-threshold AP, per-class AP and mAP with three decimals, then warnings.
std::string format_report(const APResult& result);

std::vector<Detection> to_detections(std::span<const Instance> instances);
std::vector<GroundTruth> to_ground_truth(std::span<const Instance> instances);

}  // namespace cclus
