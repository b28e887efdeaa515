#include <doctest.h>

#include <random>

#include "cclus/core.hpp"

using namespace cclus;

namespace {

// Reference encoder: walks the bitmap pixel by pixel.
std::vector<std::uint32_t> naive_rle(const std::vector<char>& bits) {
  std::vector<std::uint32_t> out{0};
  char current = 0;
  for (const char b : bits) {
    if (b != current) {
      out.push_back(0);
      current = b;
    }
    ++out.back();
  }
  return out;
}

BinaryMask mask_from_bits(GridDims dims, const std::vector<char>& bits) {
  std::vector<std::uint32_t> px;
  for (std::uint32_t p = 0; p < bits.size(); ++p) {
    if (bits[p]) px.push_back(p);
  }
  return BinaryMask::from_sorted(dims, px);
}

}  // namespace

TEST_CASE("grid dims index both ways") {
  const GridDims d{7, 5};
  for (std::uint32_t y = 0; y < d.height; ++y) {
    for (std::uint32_t x = 0; x < d.width; ++x) {
      const auto p = d.index(x, y);
      CHECK(p == y * 7 + x);
      CHECK(d.x_of(p) == x);
      CHECK(d.y_of(p) == y);
    }
  }
  CHECK_THROWS_AS(validate_dims({0, 3}), std::invalid_argument);
  CHECK_THROWS_AS(validate_dims({3, 0}), std::invalid_argument);
  CHECK_THROWS_AS(validate_dims({70000, 70000}), std::invalid_argument);
  CHECK_THROWS_AS(require_same_dims({2, 2}, {2, 3}, "x"), DimensionError);
}

TEST_CASE("semantic map validation") {
  CHECK_NOTHROW(SemanticMap({2, 1}, {0, 2}));
  CHECK_THROWS_AS(SemanticMap({2, 1}, {0, 3}), std::invalid_argument);
  CHECK_THROWS_AS(SemanticMap({2, 2}, {0, 1}), DimensionError);
  // Probabilities must sum to one and agree with the label.
  CHECK_NOTHROW(SemanticMap({1, 1}, {1}, {0.2, 0.7, 0.1}));
  CHECK_THROWS_AS(SemanticMap({1, 1}, {0}, {0.2, 0.7, 0.1}), std::invalid_argument);
  CHECK_THROWS_AS(SemanticMap({1, 1}, {1}, {0.2, 0.7, 0.2}), std::invalid_argument);
  const auto m = SemanticMap::filled({3, 3}, PixelClass::sow);
  CHECK(m.count(PixelClass::sow) == 9);
  CHECK(m.count(PixelClass::piglet) == 0);
}

TEST_CASE("offset map rejects non-finite vectors") {
  CHECK_THROWS_AS(OffsetMap({1, 1}, {{std::nanf(""), 0.0F}}), std::invalid_argument);
  CHECK_THROWS_AS(OffsetMap({1, 1}, {{0.0F, INFINITY}}), std::invalid_argument);
  CHECK_THROWS_AS(OffsetMap({2, 1}, {{0.0F, 0.0F}}), DimensionError);
}

TEST_CASE("binary mask basics") {
  const GridDims d{4, 4};
  const BinaryMask m(d, {5, 1, 5, 9});
  CHECK(m.area() == 3);
  CHECK(m.contains(5));
  CHECK_FALSE(m.contains(4));
  CHECK(m.centroid() == Vec2{1.0, 1.0});
  CHECK_THROWS_AS(BinaryMask(d, {16}), std::out_of_range);
  CHECK_THROWS_AS(BinaryMask::from_sorted(d, {3, 2}), std::invalid_argument);
  const BinaryMask other(d, {1, 2});
  CHECK(intersection_area(m, other) == 1);
  CHECK(mask_union(m, other).area() == 4);
  CHECK(is_subset(BinaryMask(d, {1}), m));
  CHECK_FALSE(is_subset(other, m));
}

TEST_CASE("rle encode examples") {
  // Row-major bits of pixels (1,0) and (0,1) on 2x2: 0 1 1 0.
  const BinaryMask diag({2, 2}, {1, 2});
  CHECK(rle_encode(diag) == RunLengthCounts{1, 2, 1});
  CHECK(rle_encode(BinaryMask({3, 3})) == RunLengthCounts{9});
  CHECK(rle_encode(BinaryMask({2, 2}, {0, 1, 2, 3})) == RunLengthCounts{0, 4});
}

TEST_CASE("rle decode examples") {
  CHECK(rle_decode(RunLengthCounts{9}, {3, 3}).empty());
  CHECK(rle_decode(RunLengthCounts{0, 4}, {2, 2}).area() == 4);
  // Zero-length runs are accepted on input.
  const auto m = rle_decode(RunLengthCounts{1, 1, 0, 1, 1}, {2, 2});
  CHECK(m == BinaryMask({2, 2}, {1, 2}));
  CHECK_THROWS_AS(rle_decode(RunLengthCounts{1, 2}, {2, 2}), FormatError);
  CHECK_THROWS_AS(rle_decode(RunLengthCounts{5}, {2, 2}), FormatError);
}

TEST_CASE("rle round trip on random masks against a pixel-walking encoder") {
  std::mt19937_64 rng(17);
  for (int k = 0; k < 1000; ++k) {
    const GridDims d{1 + static_cast<std::uint32_t>(rng() % 20),
                     1 + static_cast<std::uint32_t>(rng() % 20)};
    const double density = std::uniform_real_distribution<double>(0, 1)(rng);
    std::bernoulli_distribution bit(density);
    std::vector<char> bits(d.pixel_count());
    for (auto& b : bits) b = bit(rng);
    const auto mask = mask_from_bits(d, bits);
    const auto counts = rle_encode(mask);
    REQUIRE(counts == naive_rle(bits));
    REQUIRE(rle_decode(counts, d) == mask);
  }
}

TEST_CASE("connected components") {
  const GridDims d{5, 5};
  // Two 8-connected diagonal pixels and an isolated one.
  const BinaryMask m(d, {d.index(0, 0), d.index(1, 1), d.index(4, 4)});
  CHECK(count_components(m) == 2);
  CHECK(count_components(m, false) == 3);
  CHECK(count_components(BinaryMask(d)) == 0);
}
