#pragma once

// Grid and mask primitives shared by every stage of the pipeline.
//
// Coordinates: origin at the top-left pixel, x is the column (rightward),
// y is the row (downward). Pixel index p = y * width + x. Offset vectors use
// the same frame, so a pixel at (x, y) with offset (dx, dy) votes for the
// point (x + dx, y + dy).

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cclus {

/// Malformed serialized input (bad magic, truncated payload, RLE sum mismatch).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two grids that must agree in size do not.
class DimensionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A synthetic scene could not satisfy its placement constraints.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
constexpr Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }

constexpr double squared_distance(Vec2 a, Vec2 b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

inline double distance(Vec2 a, Vec2 b) { return std::sqrt(squared_distance(a, b)); }

struct GridDims {
  std::uint32_t width = 0;
  std::uint32_t height = 0;

  constexpr std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * height;
  }
  constexpr std::uint32_t index(std::uint32_t x, std::uint32_t y) const { return y * width + x; }
  constexpr std::uint32_t x_of(std::uint32_t p) const { return p % width; }
  constexpr std::uint32_t y_of(std::uint32_t p) const { return p / width; }
  constexpr bool contains(std::int64_t x, std::int64_t y) const {
    return x >= 0 && y >= 0 && x < static_cast<std::int64_t>(width) &&
           y < static_cast<std::int64_t>(height);
  }
  /// Continuous position of a pixel (its integer coordinates).
  constexpr Vec2 position(std::uint32_t p) const {
    return {static_cast<double>(x_of(p)), static_cast<double>(y_of(p))};
  }

  friend constexpr bool operator==(const GridDims&, const GridDims&) = default;
};

/// Throws std::invalid_argument unless width, height >= 1 and the pixel count
/// fits a 32-bit pixel index.
void validate_dims(GridDims dims);

std::string to_string(GridDims dims);

/// Throws DimensionError naming `what` when a != b.
void require_same_dims(GridDims a, GridDims b, const char* what);

enum class PixelClass : std::uint8_t { background = 0, piglet = 1, sow = 2 };
inline constexpr std::size_t kPixelClassCount = 3;

/// Per-pixel class labels, optionally with the class-probability vectors the
/// labels were taken from.
class SemanticMap {
 public:
  SemanticMap() = default;
  SemanticMap(GridDims dims, std::vector<std::uint8_t> labels);
  /// `probs` holds kPixelClassCount entries per pixel; each vector must sum to
  /// one (1e-6) and its argmax must equal the label.
  SemanticMap(GridDims dims, std::vector<std::uint8_t> labels, std::vector<double> probs);

  static SemanticMap filled(GridDims dims, PixelClass cls);

  const GridDims& dims() const { return dims_; }
  std::span<const std::uint8_t> labels() const { return labels_; }
  PixelClass at(std::uint32_t p) const { return static_cast<PixelClass>(labels_[p]); }
  bool has_probs() const { return !probs_.empty(); }
  std::span<const double> probs() const { return probs_; }
  std::size_t count(PixelClass cls) const;

  friend bool operator==(const SemanticMap&, const SemanticMap&) = default;

 private:
  GridDims dims_;
  std::vector<std::uint8_t> labels_;
  std::vector<double> probs_;
};

struct Offset {
  float dx = 0.0F;
  float dy = 0.0F;

  friend constexpr bool operator==(const Offset&, const Offset&) = default;
};

/// Per-pixel displacement toward the center of the object the pixel belongs to.
class OffsetMap {
 public:
  OffsetMap() = default;
  OffsetMap(GridDims dims, std::vector<Offset> vectors);

  static OffsetMap zeros(GridDims dims);

  const GridDims& dims() const { return dims_; }
  std::span<const Offset> vectors() const { return vectors_; }
  const Offset& at(std::uint32_t p) const { return vectors_[p]; }

  friend bool operator==(const OffsetMap&, const OffsetMap&) = default;

 private:
  GridDims dims_;
  std::vector<Offset> vectors_;
};

/// A set of pixels on a grid, stored as strictly ascending pixel indices.
class BinaryMask {
 public:
  BinaryMask() = default;
  explicit BinaryMask(GridDims dims) : dims_(dims) {}
  /// Accepts indices in any order; duplicates are merged. Throws
  /// std::out_of_range for indices outside the grid.
  BinaryMask(GridDims dims, std::vector<std::uint32_t> pixels);

  /// `pixels` must already be strictly ascending and in bounds.
  static BinaryMask from_sorted(GridDims dims, std::vector<std::uint32_t> pixels);

  const GridDims& dims() const { return dims_; }
  std::span<const std::uint32_t> pixels() const { return pixels_; }
  std::size_t area() const { return pixels_.size(); }
  bool empty() const { return pixels_.empty(); }
  bool contains(std::uint32_t p) const;
  /// Mean pixel coordinate; (0, 0) for an empty mask.
  Vec2 centroid() const;

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  GridDims dims_;
  std::vector<std::uint32_t> pixels_;
};

std::size_t intersection_area(const BinaryMask& a, const BinaryMask& b);
BinaryMask mask_union(const BinaryMask& a, const BinaryMask& b);
bool is_subset(const BinaryMask& inner, const BinaryMask& outer);

/// Number of connected components (8-connectivity by default).
std::size_t count_components(const BinaryMask& mask, bool eight_connected = true);

using RunLengthCounts = std::vector<std::uint32_t>;

/// Alternating run lengths over row-major order, starting with the unset run
/// (which may be zero). Counts sum to width * height.
RunLengthCounts rle_encode(const BinaryMask& mask);

/// Inverse of rle_encode. Throws FormatError when the counts do not sum to
/// width * height.
BinaryMask rle_decode(std::span<const std::uint32_t> counts, GridDims dims);

}  // namespace cclus
