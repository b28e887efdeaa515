#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "cclus/assemble.hpp"
#include "cclus/core.hpp"

namespace cclus {

struct PairResult {
  struct Pair {
    std::size_t prev = 0;
    std::size_t cur = 0;
    double iou = 0.0;
  };
  std::vector<Pair> pairs;             ///< in acceptance order (non-increasing IoU)
  std::vector<std::size_t> fresh;      ///< unpaired current instances, ascending
  std::vector<std::size_t> dropped;    ///< unpaired previous instances, ascending
};

/// Greedy IoU association: repeatedly binds the still-unpaired (prev, cur) pair
/// of highest IoU while that IoU exceeds `min_iou`. Ties go to the lower prev
/// index, then the lower cur index. Only instances of the same class pair.
PairResult pair_frames(std::span<const Instance> prev, std::span<const Instance> cur,
                       double min_iou);

struct TrackRecord {
  std::size_t frame = 0;
  Vec2 center;
  std::size_t area = 0;
  double paired_iou = 0.0;  ///< IoU with the previous record's mask, 0 for the first
};

struct Track {
  int id = 0;
  InstanceClass cls = InstanceClass::piglet;
  std::vector<TrackRecord> records;
  double movement = 0.0;                ///< sum of consecutive center distances
  std::vector<std::size_t> top_areas;   ///< up to five largest areas, descending
  std::vector<std::uint32_t> occupancy; ///< per-pixel visit counts
  bool active = true;
};

struct TrackerOptions {
  double fps = 7.0;
  double min_iou = 0.0;
};

/// Cross-frame identity table. Advanced by a single writer, one frame at a time.
class TrackState {
 public:
  TrackState(GridDims dims, TrackerOptions options = {});

  /// Pairs `instances` against the previous frame: pairs keep their ID, new
  /// instances open tracks with fresh IDs, unpaired old tracks close for good.
  /// Locations come from the instances' predicted centers. Throws
  /// DimensionError for masks on another grid and std::invalid_argument when
  /// frame indices do not increase.
  PairResult update(std::size_t frame_index, std::span<const Instance> instances);

  const GridDims& dims() const { return dims_; }
  const TrackerOptions& options() const { return options_; }
  /// Every track ever opened, ordered by ID.
  const std::vector<Track>& tracks() const { return tracks_; }
  std::vector<int> active_ids() const;
  int next_id() const { return next_id_; }
  std::size_t frames_seen() const { return frames_seen_; }

 private:
  GridDims dims_;
  TrackerOptions options_;
  std::vector<Track> tracks_;
  std::vector<std::size_t> active_;    // tracks_ index per previous-frame instance
  std::vector<Instance> previous_;
  int next_id_ = 1;
  std::size_t frames_seen_ = 0;
  std::size_t last_frame_ = 0;
};

inline TrackState update_tracks(TrackState state, std::size_t frame_index,
                                const FrameResult& frame) {
  state.update(frame_index, frame.instances);
  return state;
}

struct TrackMetrics {
  int track_id = 0;
  double movement_px = 0.0;
  double avg_speed_px_s = 0.0;
  double body_pixel_size = 0.0;
  double space_usage = 0.0;

  friend bool operator==(const TrackMetrics&, const TrackMetrics&) = default;
};

/// Movement, average speed (movement over track-local elapsed time), mean of
/// the top-5 areas, and the fraction of the frame (or of `pen`, when given)
/// the track ever occupied.
TrackMetrics track_metrics(const Track& track, GridDims dims, double fps,
                           const BinaryMask* pen = nullptr);

/// Per-pixel visit counts of one track.
std::vector<std::uint32_t> heatmap(const Track& track);

}  // namespace cclus
