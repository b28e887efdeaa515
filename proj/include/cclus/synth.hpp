#pragma once

// Deterministic synthetic farrowing-pen scenes: piglets are ellipses, the sow
// is a rounded rectangle, crate bars are straight occluding strips. Each frame
// comes with ground-truth instances and the two maps a perfect network would
// output; perturb() degrades those maps to mimic an imperfect one.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "cclus/assemble.hpp"
#include "cclus/core.hpp"

namespace cclus {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

/// Rotated strip; `angle` is the direction of its long side, in radians.
struct OccluderBar {
  Vec2 center;
  double length = 0.0;
  double width = 0.0;
  double angle = 0.0;

  bool contains(double x, double y) const;
};

struct NoiseModel {
  double flip_rate = 0.0;     ///< probability a piglet/background label swaps
  double offset_sigma = 0.0;  ///< std-dev of Gaussian noise per offset component
};

/// What a perfect offset head outputs off the piglets.
enum class BackgroundOffsets {
  zero,
  /// Background pixels point at the center of the closest piglet body, so a
  /// mislabelled background pixel votes like a boundary pixel of that piglet.
  nearest_piglet,
};

struct SceneSpec {
  GridDims dims{512, 384};
  std::size_t piglets = 10;
  Range semi_major{24.0, 32.0};
  Range semi_minor{11.0, 15.0};
  bool sow = true;
  Range sow_length{170.0, 210.0};
  Range sow_breadth{70.0, 90.0};
  double sow_corner = 25.0;
  std::vector<OccluderBar> bars;  ///< fixed bars, in addition to the generated ones
  std::size_t bso_bars = 0;       ///< bars that split a chosen piglet in two
  std::size_t pmo_bars = 0;       ///< bars that hide one end of a chosen piglet
  double bar_width = 4.0;
  double max_speed = 0.0;  ///< per velocity component, px/frame
  double max_overlap = 0.1;
  std::size_t min_visible_area = 150;
  std::size_t horizon = 1;  ///< frames over which placement constraints are enforced
  NoiseModel noise;
  BackgroundOffsets background_offsets = BackgroundOffsets::nearest_piglet;
  std::uint64_t seed = 1;
  std::size_t max_attempts = 200;
};

/// Throws std::invalid_argument for out-of-range fields.
void validate(const SceneSpec& spec);

struct PigletBody {
  Vec2 start;
  Vec2 velocity;
  double semi_major = 0.0;
  double semi_minor = 0.0;
  double angle = 0.0;

  bool contains(Vec2 center, double x, double y) const;
};

struct SowBody {
  Vec2 center;
  double length = 0.0;
  double breadth = 0.0;
  double corner = 0.0;

  bool contains(double x, double y) const;
};

struct SceneLayout {
  std::vector<PigletBody> piglets;
  std::optional<SowBody> sow;
  std::vector<OccluderBar> bars;
  std::vector<std::size_t> bso_targets;
  std::vector<std::size_t> pmo_targets;
};

/// Rejection-samples a layout that satisfies the overlap and visibility
/// constraints over `spec.horizon` frames. Throws InfeasibleError naming the
/// constraint that kept failing.
SceneLayout sample_layout(const SceneSpec& spec);

/// Piglet center at a frame, moving at constant velocity and reflecting off
/// the borders.
Vec2 piglet_center(const SceneSpec& spec, const PigletBody& body, std::size_t frame);

struct GroundTruthInstance {
  int id = 0;  ///< stable across frames; the sow has id == piglet count
  InstanceClass cls = InstanceClass::piglet;
  BinaryMask full_mask;
  BinaryMask visible_mask;
  Vec2 center;
};

struct SyntheticFrame {
  std::size_t index = 0;
  std::vector<GroundTruthInstance> gt;  ///< instances with a non-empty visible mask
  SemanticMap semantic;
  OffsetMap offsets;
  BinaryMask occluders;
  std::vector<std::size_t> bso_targets;
  std::vector<std::size_t> pmo_targets;

  const GroundTruthInstance* find(int id) const;
};

SyntheticFrame render_frame(const SceneSpec& spec, const SceneLayout& layout,
                            std::size_t frame_index);

/// Noise-free frame; deterministic in (spec, frame_index).
SyntheticFrame gen_frame(const SceneSpec& spec, std::size_t frame_index);

/// Frames 0..n_frames-1 of one layout; frame k equals gen_frame(spec, k).
std::vector<SyntheticFrame> gen_sequence(const SceneSpec& spec, std::size_t n_frames);

struct NoisyMaps {
  SemanticMap semantic;
  OffsetMap offsets;
};

/// Independent label flips between piglet and background plus i.i.d. Gaussian
/// offset noise; deterministic in `seed`.
NoisyMaps perturb(const SyntheticFrame& frame, const NoiseModel& noise, std::uint64_t seed);

/// Noise seed of a frame, derived from the scene seed.
std::uint64_t frame_seed(std::uint64_t scene_seed, std::size_t frame_index);

/// Visible ground-truth masks as instances (score 1, center = true body center).
std::vector<Instance> ground_truth_instances(const SyntheticFrame& frame);

}  // namespace cclus
