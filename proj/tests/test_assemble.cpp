#include <doctest.h>

#include <random>

#include "cclus/assemble.hpp"
#include "cclus/synth.hpp"

using namespace cclus;

namespace {

CenterCloud make_cloud(GridDims d, const std::vector<std::pair<std::uint32_t, Vec2>>& votes) {
  CenterCloud c;
  c.dims = d;
  for (const auto& [pixel, pos] : votes) c.points.push_back({pixel, pos, 0, false});
  return c;
}

ClusterLabels labels_of(std::vector<int> l) {
  int m = 0;
  for (const int v : l) m = std::max(m, v);
  return {std::move(l), m};
}

BinaryMask piglet_union(const std::vector<Instance>& instances, GridDims d) {
  BinaryMask u(d);
  for (const auto& i : instances) {
    if (i.cls == InstanceClass::piglet) u = mask_union(u, i.mask);
  }
  return u;
}

BinaryMask piglet_pixels(const SemanticMap& sem) {
  std::vector<std::uint32_t> px;
  for (std::uint32_t p = 0; p < sem.dims().pixel_count(); ++p) {
    if (sem.at(p) == PixelClass::piglet) px.push_back(p);
  }
  return BinaryMask::from_sorted(sem.dims(), px);
}

// Random cloud with a random labelling that uses every group at least once.
std::pair<CenterCloud, ClusterLabels> random_case(std::mt19937_64& rng) {
  const GridDims d{16, 16};
  const int m = 1 + static_cast<int>(rng() % 5);
  std::uniform_real_distribution<double> u(-5, 20);
  std::vector<std::pair<std::uint32_t, Vec2>> votes;
  std::vector<int> l;
  for (std::uint32_t p = 0; p < d.pixel_count(); ++p) {
    if (rng() % 3 != 0) continue;
    votes.push_back({p, {u(rng), u(rng)}});
    l.push_back(static_cast<int>(rng() % static_cast<std::uint64_t>(m + 1)));
  }
  for (int g = 1; g <= m && static_cast<std::size_t>(g - 1) < l.size(); ++g) l[g - 1] = g;
  return {make_cloud(d, votes), labels_of(l)};
}

}  // namespace

TEST_CASE("c2m with no groups yields no instances") {
  const auto cloud = make_cloud({3, 3}, {{0, {1, 1}}, {4, {2, 2}}});
  CHECK(c2m(cloud, labels_of({0, 0})).empty());
}

TEST_CASE("c2m traces groups back to source pixels") {
  const GridDims d{3, 3};
  const auto cloud = make_cloud(d, {{0, {1, 1}}, {4, {1, 3}}, {8, {7, 7}}});
  const auto out = c2m(cloud, labels_of({1, 1, 2}));
  REQUIRE(out.size() == 2);
  CHECK(out[0].mask == BinaryMask(d, {0, 4}));
  CHECK(out[1].mask == BinaryMask(d, {8}));
  CHECK(out[0].predicted_center == Vec2{1, 2});
  CHECK(out[0].confidence == 1.0);
  CHECK(out[1].confidence == 0.5);
  CHECK(out[0].cls == InstanceClass::piglet);
}

TEST_CASE("coincident centers give that center") {
  const auto cloud = make_cloud({4, 4}, {{1, {5, 5}}, {2, {5, 5}}, {3, {5, 5}}});
  const auto out = c2m(cloud, labels_of({1, 1, 1}));
  REQUIRE(out.size() == 1);
  CHECK(out[0].predicted_center == Vec2{5, 5});
}

TEST_CASE("c2m rejects labels of the wrong length or range") {
  const auto cloud = make_cloud({2, 2}, {{0, {0, 0}}});
  CHECK_THROWS_AS(c2m(cloud, labels_of({1, 1})), std::invalid_argument);
  CHECK_THROWS_AS(c2m(cloud, ClusterLabels{{3}, 2}), std::invalid_argument);
}

TEST_CASE("sow instance") {
  CHECK_FALSE(sow_instance(SemanticMap::filled({4, 4}, PixelClass::piglet)).has_value());
  const GridDims d{5, 5};
  std::vector<std::uint8_t> labels(d.pixel_count(), 0);
  for (const auto p : {d.index(0, 0), d.index(1, 0), d.index(0, 1), d.index(1, 1)}) labels[p] = 2;
  const auto sow = sow_instance(SemanticMap(d, labels));
  REQUIRE(sow.has_value());
  CHECK(sow->mask.area() == 4);
  CHECK(sow->predicted_center == Vec2{0.5, 0.5});
  CHECK(sow->cls == InstanceClass::sow);
  CHECK(sow->confidence == 1.0);
  CHECK(sow_instance(SemanticMap::filled({7, 3}, PixelClass::sow))->mask.area() == 21);
}

TEST_CASE("rc2m examples") {
  const auto cloud = make_cloud({4, 4}, {{0, {5, 5}}, {1, {20, 20}}, {2, {6, 6}}, {3, {12.5, 12.5}}});
  const auto full = labels_of({1, 2, 1, 2});
  CHECK(rc2m(cloud, full) == full);
  const auto out = rc2m(cloud, labels_of({1, 2, 0, 0}));
  CHECK(out.labels == std::vector<int>{1, 2, 1, 1});  // (12.5,12.5) ties and goes to group 1
  CHECK(out.group_count == 2);
  const auto none = labels_of({0, 0, 0, 0});
  CHECK(rc2m(cloud, none) == none);
}

TEST_CASE("rc2m uses centroids frozen before reassignment") {
  // Group 1 at x=0, group 2 at x=10. Unlabelled points at x=4 then x=5.5.
  // If group 1's centroid drifted toward 4 after the first assignment, the
  // second point would flip to group 1.
  const auto cloud =
      make_cloud({4, 1}, {{0, {0, 0}}, {1, {10, 0}}, {2, {4, 0}}, {3, {5.5, 0}}});
  const auto out = rc2m(cloud, labels_of({1, 2, 0, 0}));
  CHECK(out.labels == std::vector<int>{1, 2, 1, 2});
}

TEST_CASE("rc2m properties on random clouds") {
  std::mt19937_64 rng(31);
  for (int k = 0; k < 200; ++k) {
    const auto [cloud, labels] = random_case(rng);
    const auto once = rc2m(cloud, labels);
    CHECK(rc2m(cloud, once) == once);
    CHECK(once.group_count == labels.group_count);
    for (std::size_t i = 0; i < labels.labels.size(); ++i) {
      if (labels.labels[i] != 0) REQUIRE(once.labels[i] == labels.labels[i]);
      REQUIRE(once.labels[i] != 0);
    }
    const auto before = c2m(cloud, labels);
    const auto after = c2m(cloud, once);
    REQUIRE(before.size() == after.size());
    std::size_t total = 0;
    for (std::size_t m = 0; m < after.size(); ++m) {
      CHECK(is_subset(before[m].mask, after[m].mask));
      total += after[m].mask.area();
    }
    // Disjoint masks whose areas sum to the vote count cover every vote once.
    CHECK(total == cloud.points.size());
  }
}

TEST_CASE("blank semantic map gives no instances") {
  const GridDims d{20, 10};
  const auto r = segment_frame(SemanticMap::filled(d, PixelClass::background), OffsetMap::zeros(d), {});
  CHECK(r.instances.empty());
  CHECK(r.unassigned_pixel_count == 0);
  CHECK(r.timings.total >= 0.0);
}

TEST_CASE("noise-free synthetic scenes reproduce every visible mask") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    SceneSpec spec;
    spec.seed = seed;
    spec.piglets = 4 + seed;
    spec.bso_bars = 1;
    spec.pmo_bars = 1;
    const auto frame = gen_frame(spec, 0);
    const auto r = segment_frame(frame.semantic, frame.offsets, {});
    const auto gt = ground_truth_instances(frame);
    REQUIRE(r.instances.size() == gt.size());
    for (const auto& g : gt) {
      bool found = false;
      for (const auto& inst : r.instances) found = found || (inst.cls == g.cls && inst.mask == g.mask);
      CHECK(found);
    }
    CHECK(r.unassigned_pixel_count == 0);
  }
}

TEST_CASE("segment_frame invariants with and without rc2m under noise") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    SceneSpec spec;
    spec.seed = seed;
    spec.piglets = 8;
    const auto frame = gen_frame(spec, 0);
    const auto noisy = perturb(frame, {0.03, 2.0}, seed);
    SegmentConfig on;
    SegmentConfig off;
    off.rc2m = false;
    const auto a = segment_frame(noisy.semantic, noisy.offsets, on);
    const auto b = segment_frame(noisy.semantic, noisy.offsets, off);
    const auto d = frame.semantic.dims();

    for (const auto* r : {&a, &b}) {
      for (std::size_t i = 0; i < r->instances.size(); ++i) {
        for (std::size_t j = i + 1; j < r->instances.size(); ++j) {
          REQUIRE(intersection_area(r->instances[i].mask, r->instances[j].mask) == 0);
        }
        CHECK(r->instances[i].mask.area() >= 1);
        CHECK(r->instances[i].confidence > 0.0);
        CHECK(r->instances[i].confidence <= 1.0);
      }
    }
    REQUIRE(a.instances.size() == b.instances.size());
    const auto cover_on = piglet_union(a.instances, d);
    CHECK(cover_on == piglet_pixels(noisy.semantic));
    CHECK(is_subset(piglet_union(b.instances, d), cover_on));
    CHECK(a.unassigned_pixel_count == 0);
    for (std::size_t m = 0; m < a.instances.size(); ++m) {
      CHECK(is_subset(b.instances[m].mask, a.instances[m].mask));
      CHECK(a.instances[m].predicted_center == b.instances[m].predicted_center);
    }
  }
}

TEST_CASE("votes with no cluster leave pixels unassigned") {
  const GridDims d{10, 10};
  std::vector<std::uint8_t> labels(d.pixel_count(), 0);
  labels[0] = labels[55] = 1;
  const auto r = segment_frame(SemanticMap(d, labels), OffsetMap::zeros(d), {});
  CHECK(r.instances.empty());
  CHECK(r.unassigned_pixel_count == 2);
  CHECK(r.group_count == 0);
}

TEST_CASE("instance class names") {
  CHECK(parse_instance_class("piglet") == InstanceClass::piglet);
  CHECK(to_string(InstanceClass::sow) == "sow");
  CHECK_THROWS_AS(parse_instance_class("boar"), std::invalid_argument);
}
