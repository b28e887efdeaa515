#pragma once

// Serialized forms of maps, instance manifests, track tables and heat maps.
//
// Binary maps are little-endian regardless of host order:
//   CCSM: "CCSM" u8(version=1) u32(width) u32(height) u8[width*height]
//   CCOF: "CCOF" u8(version=1) u32(width) u32(height) f32[2*width*height] as (dx, dy)
// Readers raise FormatError with the source name and byte offset of the first
// problem; the path-based helpers raise IoError when a file cannot be opened.

#include <iosfwd>
#include <string>
#include <vector>

#include "cclus/assemble.hpp"
#include "cclus/core.hpp"
#include "cclus/track.hpp"

namespace cclus::io {

inline constexpr std::uint8_t kFormatVersion = 1;

void write_semantic(std::ostream& out, const SemanticMap& map);
SemanticMap read_semantic(std::istream& in, const std::string& source = "<stream>");
void save_semantic(const std::string& path, const SemanticMap& map);
SemanticMap load_semantic(const std::string& path);

void write_offsets(std::ostream& out, const OffsetMap& map);
OffsetMap read_offsets(std::istream& in, const std::string& source = "<stream>");
void save_offsets(const std::string& path, const OffsetMap& map);
OffsetMap load_offsets(const std::string& path);

/// One frame of instances. Each instance's confidence is stored as its score.
struct Manifest {
  std::string frame_id;
  GridDims dims;
  std::vector<Instance> instances;

  friend bool operator==(const Manifest&, const Manifest&) = default;
};

/// JSON text: {"frame_id", "width", "height", "instances": [{"class", "score",
/// "predicted_center": [x, y], "rle": [...]}]}. Doubles print with enough
/// digits to read back bit-identically.
std::string manifest_to_json(const Manifest& manifest);
Manifest manifest_from_json(const std::string& text, const std::string& source = "<string>");
void save_manifest(const std::string& path, const Manifest& manifest);
Manifest load_manifest(const std::string& path);

struct TrackRow {
  std::size_t frame = 0;
  int track_id = 0;
  InstanceClass cls = InstanceClass::piglet;
  double center_x = 0.0;
  double center_y = 0.0;
  std::size_t area = 0;
  double paired_iou = 0.0;

  friend bool operator==(const TrackRow&, const TrackRow&) = default;
};

/// Rows of every track, ordered by frame and then track ID.
std::vector<TrackRow> track_rows(const TrackState& state);

inline constexpr const char* kTracksHeader = "frame,track_id,class,center_x,center_y,area,paired_iou";
inline constexpr const char* kMetricsHeader =
    "track_id,movement_px,avg_speed_px_s,body_pixel_size,space_usage";

void write_tracks_csv(std::ostream& out, const std::vector<TrackRow>& rows);
std::vector<TrackRow> read_tracks_csv(std::istream& in, const std::string& source = "<stream>");

void write_metrics_csv(std::ostream& out, const std::vector<TrackMetrics>& rows);
std::vector<TrackMetrics> read_metrics_csv(std::istream& in,
                                           const std::string& source = "<stream>");

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

/// Binary graymap, counts scaled linearly so the largest becomes 255 (all zero
/// when every count is zero).
void write_pgm(std::ostream& out, GridDims dims, const std::vector<std::uint32_t>& counts);

struct Graymap {
  GridDims dims;
  std::vector<std::uint8_t> pixels;
};
Graymap read_pgm(std::istream& in, const std::string& source = "<stream>");

/// Raw counts, one CSV line per row of the grid.
void write_counts_csv(std::ostream& out, GridDims dims, const std::vector<std::uint32_t>& counts);
std::vector<std::uint32_t> read_counts_csv(std::istream& in, GridDims dims,
                                           const std::string& source = "<stream>");

/// Whole-file helpers used by the front ends.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace cclus::io
