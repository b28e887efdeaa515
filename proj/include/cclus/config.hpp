#pragma once

// Flat key=value configuration for the pipeline and for synthetic scenes.
// Blank lines and lines starting with '#' are ignored; unknown keys and bad
// values raise std::invalid_argument naming the source and line.

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cclus/assemble.hpp"
#include "cclus/synth.hpp"
#include "cclus/track.hpp"

namespace cclus {

struct PipelineConfig {
  SegmentConfig segment;
  TrackerOptions tracking;
  double lambda = 0.5;  ///< weight of the semantic loss in the total loss
  std::uint64_t seed = 1;
};

/// Keys: t, min_neighbors, filter (density|offset-magnitude), eps, min_pts,
/// rc2m (on|off), algo (dbscan|dbscan-naive|mean-shift), ms_bandwidth,
/// ms_max_iter, ms_shift_tol, ms_merge_radius, min_iou, fps, lambda, seed.
void set_config_value(PipelineConfig& config, std::string_view key, std::string_view value);

/// Throws std::invalid_argument for values outside the owning module's range.
void validate(const PipelineConfig& config);

PipelineConfig parse_config(std::string_view text, const std::string& source = "<config>");

/// Every key, one per line, in a form parse_config reads back to an equal config.
std::string format_config(const PipelineConfig& config);

/// Scene keys: width, height, piglets, semi_major and semi_minor ("lo,hi"),
/// sow (on|off), sow_length, sow_breadth ("lo,hi"), sow_corner, bso_bars,
/// pmo_bars, bar_width, bar ("x,y,length,width,angle_deg", repeatable),
/// max_speed, max_overlap, min_visible_area, horizon, flip_rate, offset_sigma,
/// background_offsets (zero|nearest-piglet), seed, max_attempts.
void set_scene_value(SceneSpec& spec, std::string_view key, std::string_view value);

SceneSpec parse_scene_spec(std::string_view text, const std::string& source = "<scene>");

/// Splits key=value lines; used by both parsers. Returns (line number, key, value).
struct ConfigEntry {
  std::size_t line = 0;
  std::string key;
  std::string value;
};
std::vector<ConfigEntry> split_config_lines(std::string_view text, const std::string& source);

bool parse_switch(std::string_view value);

}  // namespace cclus
