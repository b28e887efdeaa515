#include "cclus/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace cclus {

double mask_iou(const BinaryMask& a, const BinaryMask& b) {
  require_same_dims(a.dims(), b.dims(), "mask IoU");
  const std::size_t inter = intersection_area(a, b);
  const std::size_t uni = a.area() + b.area() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<double> coco_iou_thresholds() {
  std::vector<double> t;
  for (int k = 0; k < 10; ++k) t.push_back(0.5 + 0.05 * k);
  return t;
}

double APResult::ap_at(double thresh) const {
  if (thresholds.empty()) return 0.0;
  std::size_t best = 0;
  for (std::size_t i = 1; i < thresholds.size(); ++i) {
    if (std::abs(thresholds[i] - thresh) < std::abs(thresholds[best] - thresh)) best = i;
  }
  return ap[best];
}

namespace {

// One class's detections and GTs, pooled over frames, with IoUs precomputed.
struct Pool {
  struct Det {
    std::size_t frame;
    std::size_t index;  // index in the caller's frame list
    double score;
  };
  std::vector<Det> ranked;  // descending score, stable by (frame, index)
  std::vector<std::vector<std::size_t>> gt_index;  // per frame: caller GT indices
  std::vector<std::vector<double>> ious;           // per ranked det: IoU with each frame GT
  std::size_t gt_total = 0;
};

template <class DetAt, class GtAt>
Pool build_pool(std::size_t frames, DetAt&& det_list, GtAt&& gt_list, InstanceClass cls) {
  Pool pool;
  pool.gt_index.resize(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    const auto& gts = gt_list(f);
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (gts[g].cls == cls) pool.gt_index[f].push_back(g);
    }
    pool.gt_total += pool.gt_index[f].size();
    const auto& dets = det_list(f);
    for (std::size_t d = 0; d < dets.size(); ++d) {
      if (dets[d].cls == cls) pool.ranked.push_back({f, d, dets[d].score});
    }
  }
  std::stable_sort(pool.ranked.begin(), pool.ranked.end(),
                   [](const Pool::Det& a, const Pool::Det& b) { return a.score > b.score; });
  pool.ious.reserve(pool.ranked.size());
  for (const auto& d : pool.ranked) {
    const auto& det = det_list(d.frame)[d.index];
    const auto& gts = gt_list(d.frame);
    std::vector<double> row;
    row.reserve(pool.gt_index[d.frame].size());
    for (const auto g : pool.gt_index[d.frame]) row.push_back(mask_iou(det.mask, gts[g].mask));
    pool.ious.push_back(std::move(row));
  }
  return pool;
}

double pooled_ap(const Pool& pool, double thresh, std::vector<MatchRecord>* matches) {
  std::vector<std::vector<char>> taken(pool.gt_index.size());
  for (std::size_t f = 0; f < taken.size(); ++f) taken[f].assign(pool.gt_index[f].size(), 0);

  std::vector<char> is_tp(pool.ranked.size(), 0);
  for (std::size_t k = 0; k < pool.ranked.size(); ++k) {
    const auto& d = pool.ranked[k];
    const auto& row = pool.ious[k];
    long best = -1;
    double best_iou = -1.0;
    for (std::size_t g = 0; g < row.size(); ++g) {
      if (!taken[d.frame][g] && row[g] > best_iou) {
        best_iou = row[g];
        best = static_cast<long>(g);
      }
    }
    MatchRecord rec{d.frame, d.index, -1, best < 0 ? 0.0 : best_iou};
    if (best >= 0 && best_iou >= thresh) {
      taken[d.frame][best] = 1;
      is_tp[k] = 1;
      rec.gt = static_cast<long>(pool.gt_index[d.frame][best]);
    }
    if (matches) matches->push_back(rec);
  }

  if (pool.gt_total == 0) return pool.ranked.empty() ? 1.0 : 0.0;

  const std::size_t n = pool.ranked.size();
  std::vector<double> precision(n);
  std::vector<double> recall(n);
  std::size_t tp = 0;
  for (std::size_t k = 0; k < n; ++k) {
    tp += is_tp[k];
    precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
    recall[k] = static_cast<double>(tp) / static_cast<double>(pool.gt_total);
  }
  for (std::size_t k = n; k-- > 1;) precision[k - 1] = std::max(precision[k - 1], precision[k]);
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    ap += (recall[k] - prev_recall) * precision[k];
    prev_recall = recall[k];
  }
  return ap;
}

}  // namespace

double average_precision(std::span<const Detection> detections, std::span<const BinaryMask> gts,
                         double iou_thresh) {
  std::vector<Detection> dets(detections.begin(), detections.end());
  for (auto& d : dets) d.cls = InstanceClass::piglet;
  std::vector<GroundTruth> truth;
  truth.reserve(gts.size());
  for (const auto& m : gts) truth.push_back({m, InstanceClass::piglet});
  const Pool pool = build_pool(
      1, [&](std::size_t) -> const std::vector<Detection>& { return dets; },
      [&](std::size_t) -> const std::vector<GroundTruth>& { return truth; },
      InstanceClass::piglet);
  return pooled_ap(pool, iou_thresh, nullptr);
}

APResult map_eval(std::span<const std::vector<Detection>> detections,
                  std::span<const std::vector<GroundTruth>> gts, const EvalOptions& options) {
  if (detections.size() != gts.size()) {
    throw std::invalid_argument("evaluation frame lists are misaligned: " +
                                std::to_string(detections.size()) + " prediction frames vs " +
                                std::to_string(gts.size()) + " ground-truth frames");
  }
  if (options.iou_thresholds.empty()) throw std::invalid_argument("no IoU thresholds given");

  APResult result;
  result.thresholds = options.iou_thresholds;
  result.ap.assign(result.thresholds.size(), 0.0);
  result.matches.resize(result.thresholds.size());

  std::size_t any_detections = 0;
  for (const InstanceClass cls : {InstanceClass::piglet, InstanceClass::sow}) {
    const Pool pool = build_pool(
        detections.size(),
        [&](std::size_t f) -> const std::vector<Detection>& { return detections[f]; },
        [&](std::size_t f) -> const std::vector<GroundTruth>& { return gts[f]; }, cls);
    any_detections += pool.ranked.size();
    if (pool.gt_total == 0) {
      if (!pool.ranked.empty()) {
        result.warnings.push_back(std::string(to_string(cls)) + ": " +
                                  std::to_string(pool.ranked.size()) +
                                  " detections but no ground truth; class not averaged");
      }
      continue;
    }
    ClassAP c;
    c.cls = cls;
    c.gt_count = pool.gt_total;
    c.detection_count = pool.ranked.size();
    for (std::size_t t = 0; t < result.thresholds.size(); ++t) {
      c.ap.push_back(pooled_ap(pool, result.thresholds[t], &result.matches[t]));
    }
    c.mean = std::accumulate(c.ap.begin(), c.ap.end(), 0.0) / static_cast<double>(c.ap.size());
    result.classes.push_back(std::move(c));
  }

  if (result.classes.empty()) {
    if (any_detections == 0) {
      result.warnings.push_back("empty evaluation set (no ground truth, no detections); mAP := 1");
      result.ap.assign(result.thresholds.size(), 1.0);
      result.map = 1.0;
    } else {
      result.warnings.push_back("no ground truth but detections present; mAP := 0");
      result.map = 0.0;
    }
    return result;
  }

  for (std::size_t t = 0; t < result.thresholds.size(); ++t) {
    double s = 0.0;
    for (const auto& c : result.classes) s += c.ap[t];
    result.ap[t] = s / static_cast<double>(result.classes.size());
  }
  result.map = std::accumulate(result.ap.begin(), result.ap.end(), 0.0) /
               static_cast<double>(result.ap.size());
  return result;
}

std::vector<Detection> to_detections(std::span<const Instance> instances) {
  std::vector<Detection> out;
  out.reserve(instances.size());
  for (const auto& i : instances) out.push_back({i.mask, i.confidence, i.cls});
  return out;
}

std::vector<GroundTruth> to_ground_truth(std::span<const Instance> instances) {
  std::vector<GroundTruth> out;
  out.reserve(instances.size());
  for (const auto& i : instances) out.push_back({i.mask, i.cls});
  return out;
}

std::string format_report(const APResult& result) {
  char buf[96];
  std::string out = "threshold,AP\n";
  for (std::size_t t = 0; t < result.thresholds.size(); ++t) {
    std::snprintf(buf, sizeof buf, "%.2f,%.3f\n", result.thresholds[t], result.ap[t]);
    out += buf;
  }
  out += "class,gt,detections,AP\n";
  for (const auto& c : result.classes) {
    std::snprintf(buf, sizeof buf, "%s,%zu,%zu,%.3f\n", std::string(to_string(c.cls)).c_str(),
                  c.gt_count, c.detection_count, c.mean);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "mAP,%.3f\n", result.map);
  out += buf;
  for (const auto& w : result.warnings) out += "warning: " + w + "\n";
  return out;
}

}  // namespace cclus
