#include "cclus/track.hpp"

#include <algorithm>
#include <functional>

#include "cclus/eval.hpp"

namespace cclus {

PairResult pair_frames(std::span<const Instance> prev, std::span<const Instance> cur,
                       double min_iou) {
  if (!(min_iou >= 0.0)) throw std::invalid_argument("min_iou must be >= 0");
  struct Candidate {
    double iou;
    std::size_t prev;
    std::size_t cur;
  };
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < prev.size(); ++i) {
    for (std::size_t j = 0; j < cur.size(); ++j) {
      if (prev[i].cls != cur[j].cls) continue;
      const double iou = mask_iou(prev[i].mask, cur[j].mask);
      if (iou > min_iou) candidates.push_back({iou, i, j});
    }
  }
  // Walking candidates in (IoU desc, prev asc, cur asc) order and skipping
  // bound objects is the same as repeatedly taking the global maximum.
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.iou != b.iou) return a.iou > b.iou;
    if (a.prev != b.prev) return a.prev < b.prev;
    return a.cur < b.cur;
  });
  std::vector<char> prev_used(prev.size(), 0);
  std::vector<char> cur_used(cur.size(), 0);
  PairResult out;
  for (const auto& c : candidates) {
    if (prev_used[c.prev] || cur_used[c.cur]) continue;
    prev_used[c.prev] = 1;
    cur_used[c.cur] = 1;
    out.pairs.push_back({c.prev, c.cur, c.iou});
  }
  for (std::size_t j = 0; j < cur.size(); ++j) {
    if (!cur_used[j]) out.fresh.push_back(j);
  }
  for (std::size_t i = 0; i < prev.size(); ++i) {
    if (!prev_used[i]) out.dropped.push_back(i);
  }
  return out;
}

TrackState::TrackState(GridDims dims, TrackerOptions options) : dims_(dims), options_(options) {
  validate_dims(dims_);
  if (!(options_.fps > 0.0)) throw std::invalid_argument("fps must be positive");
  if (!(options_.min_iou >= 0.0)) throw std::invalid_argument("min_iou must be >= 0");
}

namespace {

void observe(Track& track, std::size_t frame, const Instance& inst, double paired_iou,
             GridDims dims) {
  if (!track.records.empty()) {
    track.movement += distance(track.records.back().center, inst.predicted_center);
  }
  track.records.push_back({frame, inst.predicted_center, inst.mask.area(), paired_iou});
  auto& top = track.top_areas;
  top.insert(std::upper_bound(top.begin(), top.end(), inst.mask.area(), std::greater<>()),
             inst.mask.area());
  if (top.size() > 5) top.pop_back();
  if (track.occupancy.empty()) track.occupancy.assign(dims.pixel_count(), 0);
  for (const auto p : inst.mask.pixels()) ++track.occupancy[p];
}

}  // namespace

PairResult TrackState::update(std::size_t frame_index, std::span<const Instance> instances) {
  for (const auto& inst : instances) {
    require_same_dims(inst.mask.dims(), dims_, "instance mask vs tracker grid");
  }
  if (frames_seen_ > 0 && frame_index <= last_frame_) {
    throw std::invalid_argument("frame index " + std::to_string(frame_index) +
                                " does not follow " + std::to_string(last_frame_));
  }
  PairResult pr = pair_frames(previous_, instances, options_.min_iou);

  std::vector<std::size_t> next_active(instances.size());
  for (const auto& pair : pr.pairs) {
    const std::size_t t = active_[pair.prev];
    observe(tracks_[t], frame_index, instances[pair.cur], pair.iou, dims_);
    next_active[pair.cur] = t;
  }
  for (const auto i : pr.dropped) tracks_[active_[i]].active = false;
  for (const auto j : pr.fresh) {
    Track track;
    track.id = next_id_++;
    track.cls = instances[j].cls;
    tracks_.push_back(std::move(track));
    observe(tracks_.back(), frame_index, instances[j], 0.0, dims_);
    next_active[j] = tracks_.size() - 1;
  }

  active_ = std::move(next_active);
  previous_.assign(instances.begin(), instances.end());
  last_frame_ = frame_index;
  ++frames_seen_;
  return pr;
}

std::vector<int> TrackState::active_ids() const {
  std::vector<int> ids;
  ids.reserve(active_.size());
  for (const auto t : active_) ids.push_back(tracks_[t].id);
  return ids;
}

TrackMetrics track_metrics(const Track& track, GridDims dims, double fps, const BinaryMask* pen) {
  if (track.records.empty()) throw std::invalid_argument("track has no records");
  if (!(fps > 0.0)) throw std::invalid_argument("fps must be positive");
  TrackMetrics m;
  m.track_id = track.id;
  m.movement_px = track.movement;
  const auto gaps = static_cast<double>(track.records.size() - 1);
  m.avg_speed_px_s = gaps == 0.0 ? 0.0 : track.movement / (gaps / fps);
  if (!track.top_areas.empty()) {
    double sum = 0.0;
    for (const auto a : track.top_areas) sum += static_cast<double>(a);
    m.body_pixel_size = sum / static_cast<double>(track.top_areas.size());
  }
  std::size_t used = 0;
  if (pen != nullptr) {
    require_same_dims(pen->dims(), dims, "pen mask vs frame");
    for (const auto p : pen->pixels()) used += track.occupancy.empty() ? 0 : track.occupancy[p] > 0;
    m.space_usage = pen->empty() ? 0.0 : static_cast<double>(used) / static_cast<double>(pen->area());
  } else {
    for (const auto c : track.occupancy) used += c > 0;
    m.space_usage = static_cast<double>(used) / static_cast<double>(dims.pixel_count());
  }
  return m;
}

std::vector<std::uint32_t> heatmap(const Track& track) { return track.occupancy; }

}  // namespace cclus
