#include "cclus/core.hpp"

#include <algorithm>
#include <limits>

namespace cclus {

void validate_dims(GridDims dims) {
  if (dims.width == 0 || dims.height == 0) {
    throw std::invalid_argument("grid dimensions must be positive, got " + to_string(dims));
  }
  if (dims.pixel_count() > std::numeric_limits<std::uint32_t>::max()) {
    throw std::invalid_argument("grid " + to_string(dims) + " exceeds 32-bit pixel indexing");
  }
}

std::string to_string(GridDims dims) {
  return std::to_string(dims.width) + "x" + std::to_string(dims.height);
}

void require_same_dims(GridDims a, GridDims b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string("dimension mismatch: ") + what + " (" + to_string(a) +
                         " vs " + to_string(b) + ")");
  }
}

SemanticMap::SemanticMap(GridDims dims, std::vector<std::uint8_t> labels)
    : dims_(dims), labels_(std::move(labels)) {
  validate_dims(dims_);
  if (labels_.size() != dims_.pixel_count()) {
    throw DimensionError("semantic map: " + std::to_string(labels_.size()) +
                         " labels for grid " + to_string(dims_));
  }
  for (std::size_t p = 0; p < labels_.size(); ++p) {
    if (labels_[p] >= kPixelClassCount) {
      throw std::invalid_argument("semantic map: label " + std::to_string(labels_[p]) +
                                  " at pixel " + std::to_string(p) + " is not a known class");
    }
  }
}

SemanticMap::SemanticMap(GridDims dims, std::vector<std::uint8_t> labels,
                         std::vector<double> probs)
    : SemanticMap(dims, std::move(labels)) {
  if (probs.size() != labels_.size() * kPixelClassCount) {
    throw DimensionError("semantic map: probability vector count does not match grid");
  }
  for (std::size_t p = 0; p < labels_.size(); ++p) {
    const double* v = probs.data() + p * kPixelClassCount;
    double sum = 0.0;
    std::size_t arg = 0;
    for (std::size_t c = 0; c < kPixelClassCount; ++c) {
      if (!std::isfinite(v[c]) || v[c] < 0.0) {
        throw std::invalid_argument("semantic map: invalid probability at pixel " +
                                    std::to_string(p));
      }
      sum += v[c];
      if (v[c] > v[arg]) arg = c;
    }
    if (std::abs(sum - 1.0) > 1e-6) {
      throw std::invalid_argument("semantic map: probabilities at pixel " + std::to_string(p) +
                                  " do not sum to 1");
    }
    if (arg != labels_[p]) {
      throw std::invalid_argument("semantic map: label at pixel " + std::to_string(p) +
                                  " is not the probability argmax");
    }
  }
  probs_ = std::move(probs);
}

SemanticMap SemanticMap::filled(GridDims dims, PixelClass cls) {
  validate_dims(dims);
  return SemanticMap(dims,
                     std::vector<std::uint8_t>(dims.pixel_count(), static_cast<std::uint8_t>(cls)));
}

std::size_t SemanticMap::count(PixelClass cls) const {
  return static_cast<std::size_t>(
      std::count(labels_.begin(), labels_.end(), static_cast<std::uint8_t>(cls)));
}

OffsetMap::OffsetMap(GridDims dims, std::vector<Offset> vectors)
    : dims_(dims), vectors_(std::move(vectors)) {
  validate_dims(dims_);
  if (vectors_.size() != dims_.pixel_count()) {
    throw DimensionError("offset map: " + std::to_string(vectors_.size()) +
                         " vectors for grid " + to_string(dims_));
  }
  for (std::size_t p = 0; p < vectors_.size(); ++p) {
    if (!std::isfinite(vectors_[p].dx) || !std::isfinite(vectors_[p].dy)) {
      throw std::invalid_argument("offset map: non-finite vector at pixel " + std::to_string(p));
    }
  }
}

OffsetMap OffsetMap::zeros(GridDims dims) {
  validate_dims(dims);
  return OffsetMap(dims, std::vector<Offset>(dims.pixel_count()));
}

BinaryMask::BinaryMask(GridDims dims, std::vector<std::uint32_t> pixels)
    : dims_(dims), pixels_(std::move(pixels)) {
  std::sort(pixels_.begin(), pixels_.end());
  pixels_.erase(std::unique(pixels_.begin(), pixels_.end()), pixels_.end());
  if (!pixels_.empty() && pixels_.back() >= dims_.pixel_count()) {
    throw std::out_of_range("mask pixel " + std::to_string(pixels_.back()) + " outside grid " +
                            to_string(dims_));
  }
}

BinaryMask BinaryMask::from_sorted(GridDims dims, std::vector<std::uint32_t> pixels) {
  for (std::size_t i = 1; i < pixels.size(); ++i) {
    if (pixels[i] <= pixels[i - 1]) {
      throw std::invalid_argument("mask pixels are not strictly ascending");
    }
  }
  if (!pixels.empty() && pixels.back() >= dims.pixel_count()) {
    throw std::out_of_range("mask pixel " + std::to_string(pixels.back()) + " outside grid " +
                            to_string(dims));
  }
  BinaryMask m(dims);
  m.pixels_ = std::move(pixels);
  return m;
}

bool BinaryMask::contains(std::uint32_t p) const {
  return std::binary_search(pixels_.begin(), pixels_.end(), p);
}

Vec2 BinaryMask::centroid() const {
  if (pixels_.empty()) return {};
  double sx = 0.0;
  double sy = 0.0;
  for (const auto p : pixels_) {
    sx += dims_.x_of(p);
    sy += dims_.y_of(p);
  }
  const auto n = static_cast<double>(pixels_.size());
  return {sx / n, sy / n};
}

std::size_t intersection_area(const BinaryMask& a, const BinaryMask& b) {
  const auto pa = a.pixels();
  const auto pb = b.pixels();
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t n = 0;
  while (i < pa.size() && j < pb.size()) {
    if (pa[i] < pb[j]) {
      ++i;
    } else if (pb[j] < pa[i]) {
      ++j;
    } else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

BinaryMask mask_union(const BinaryMask& a, const BinaryMask& b) {
  require_same_dims(a.dims(), b.dims(), "mask union");
  std::vector<std::uint32_t> out;
  out.reserve(a.area() + b.area());
  std::set_union(a.pixels().begin(), a.pixels().end(), b.pixels().begin(), b.pixels().end(),
                 std::back_inserter(out));
  return BinaryMask::from_sorted(a.dims(), std::move(out));
}

bool is_subset(const BinaryMask& inner, const BinaryMask& outer) {
  return std::includes(outer.pixels().begin(), outer.pixels().end(), inner.pixels().begin(),
                       inner.pixels().end());
}

std::size_t count_components(const BinaryMask& mask, bool eight_connected) {
  const auto px = mask.pixels();
  const GridDims dims = mask.dims();
  std::vector<char> seen(px.size(), 0);
  std::vector<std::size_t> stack;
  auto find = [&](std::int64_t x, std::int64_t y) -> std::ptrdiff_t {
    if (!dims.contains(x, y)) return -1;
    const auto p = dims.index(static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y));
    const auto it = std::lower_bound(px.begin(), px.end(), p);
    return (it != px.end() && *it == p) ? it - px.begin() : -1;
  };
  std::size_t components = 0;
  for (std::size_t s = 0; s < px.size(); ++s) {
    if (seen[s]) continue;
    ++components;
    seen[s] = 1;
    stack.push_back(s);
    while (!stack.empty()) {
      const auto k = stack.back();
      stack.pop_back();
      const std::int64_t x = dims.x_of(px[k]);
      const std::int64_t y = dims.y_of(px[k]);
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        for (std::int64_t dx = -1; dx <= 1; ++dx) {
          if ((dx == 0 && dy == 0) || (!eight_connected && dx != 0 && dy != 0)) continue;
          const auto n = find(x + dx, y + dy);
          if (n >= 0 && !seen[static_cast<std::size_t>(n)]) {
            seen[static_cast<std::size_t>(n)] = 1;
            stack.push_back(static_cast<std::size_t>(n));
          }
        }
      }
    }
  }
  return components;
}

RunLengthCounts rle_encode(const BinaryMask& mask) {
  RunLengthCounts counts;
  const auto total = static_cast<std::uint32_t>(mask.dims().pixel_count());
  std::uint32_t cursor = 0;
  const auto px = mask.pixels();
  std::size_t i = 0;
  while (i < px.size()) {
    counts.push_back(px[i] - cursor);
    std::size_t j = i + 1;
    while (j < px.size() && px[j] == px[j - 1] + 1) ++j;
    const auto run = static_cast<std::uint32_t>(j - i);
    counts.push_back(run);
    cursor = px[i] + run;
    i = j;
  }
  if (cursor < total || counts.empty()) counts.push_back(total - cursor);
  return counts;
}

BinaryMask rle_decode(std::span<const std::uint32_t> counts, GridDims dims) {
  std::uint64_t sum = 0;
  for (const auto c : counts) sum += c;
  if (sum != dims.pixel_count()) {
    throw FormatError("run-length counts sum to " + std::to_string(sum) + ", expected " +
                      std::to_string(dims.pixel_count()) + " for grid " + to_string(dims));
  }
  std::vector<std::uint32_t> pixels;
  std::uint32_t cursor = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (k % 2 == 1) {
      for (std::uint32_t r = 0; r < counts[k]; ++r) pixels.push_back(cursor + r);
    }
    cursor += counts[k];
  }
  return BinaryMask::from_sorted(dims, std::move(pixels));
}

}  // namespace cclus
