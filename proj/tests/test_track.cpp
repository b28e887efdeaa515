#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "cclus/eval.hpp"
#include "cclus/track.hpp"

using namespace cclus;

namespace {

const GridDims kDims{120, 40};

Instance box(double x0, double y0, std::uint32_t w, std::uint32_t h) {
  std::vector<std::uint32_t> px;
  const auto ix = static_cast<std::uint32_t>(x0);
  const auto iy = static_cast<std::uint32_t>(y0);
  for (std::uint32_t y = iy; y < iy + h; ++y) {
    for (std::uint32_t x = ix; x < ix + w; ++x) px.push_back(kDims.index(x, y));
  }
  Instance inst;
  inst.mask = BinaryMask(kDims, px);
  inst.predicted_center = {x0 + (w - 1) / 2.0, y0 + (h - 1) / 2.0};
  return inst;
}

}  // namespace

TEST_CASE("identical lists pair one to one") {
  const std::vector<Instance> a{box(0, 0, 5, 5), box(20, 0, 5, 5), box(40, 10, 6, 6)};
  const auto r = pair_frames(a, a, 0.0);
  REQUIRE(r.pairs.size() == 3);
  for (const auto& p : r.pairs) {
    CHECK(p.prev == p.cur);
    CHECK(p.iou == 1.0);
  }
  CHECK(r.fresh.empty());
  CHECK(r.dropped.empty());
}

TEST_CASE("two previous, one current overlapping the first") {
  const std::vector<Instance> prev{box(0, 0, 5, 5), box(50, 0, 5, 5)};
  const std::vector<Instance> cur{box(2, 0, 5, 5)};
  const auto r = pair_frames(prev, cur, 0.0);
  REQUIRE(r.pairs.size() == 1);
  CHECK(r.pairs[0].prev == 0);
  CHECK(r.pairs[0].cur == 0);
  CHECK(r.pairs[0].iou == doctest::Approx(15.0 / 35.0));
  CHECK(r.fresh.empty());
  CHECK(r.dropped == std::vector<std::size_t>{1});
}

TEST_CASE("empty previous makes everything new") {
  const std::vector<Instance> cur{box(0, 0, 2, 2), box(9, 9, 2, 2)};
  const auto r = pair_frames({}, cur, 0.0);
  CHECK(r.pairs.empty());
  CHECK(r.fresh == std::vector<std::size_t>{0, 1});
  CHECK_THROWS_AS(pair_frames({}, cur, -0.1), std::invalid_argument);
}

TEST_CASE("min_iou must be strictly exceeded") {
  const std::vector<Instance> prev{box(0, 0, 4, 4)};
  const std::vector<Instance> cur{box(2, 0, 4, 4)};  // IoU 8/24
  CHECK(pair_frames(prev, cur, 1.0 / 3.0).pairs.empty());
  CHECK(pair_frames(prev, cur, 0.3).pairs.size() == 1);
}

TEST_CASE("greedy pairing properties on random instance sets") {
  std::mt19937_64 rng(99);
  for (int k = 0; k < 300; ++k) {
    std::vector<Instance> prev, cur;
    for (std::size_t i = rng() % 7; i > 0; --i) prev.push_back(box(rng() % 100, rng() % 30, 4 + rng() % 12, 4 + rng() % 8));
    for (std::size_t i = rng() % 7; i > 0; --i) cur.push_back(box(rng() % 100, rng() % 30, 4 + rng() % 12, 4 + rng() % 8));
    const auto r = pair_frames(prev, cur, 0.0);
    CHECK(r.pairs.size() + r.fresh.size() == cur.size());
    CHECK(r.pairs.size() + r.dropped.size() == prev.size());

    // Each accepted pair beats every pair still open at acceptance time.
    std::vector<bool> used_p(prev.size()), used_c(cur.size());
    for (const auto& pair : r.pairs) {
      CHECK(pair.iou > 0.0);
      CHECK(pair.iou == mask_iou(prev[pair.prev].mask, cur[pair.cur].mask));
      for (std::size_t i = 0; i < prev.size(); ++i) {
        for (std::size_t j = 0; j < cur.size(); ++j) {
          if (used_p[i] || used_c[j]) continue;
          REQUIRE(pair.iou >= mask_iou(prev[i].mask, cur[j].mask));
        }
      }
      used_p[pair.prev] = used_c[pair.cur] = true;
    }
    // Nothing left over could still pair.
    for (const auto i : r.dropped) {
      for (const auto j : r.fresh) REQUIRE(mask_iou(prev[i].mask, cur[j].mask) == 0.0);
    }
  }
}

TEST_CASE("static scene keeps ids and zero movement") {
  TrackState state(kDims);
  const std::vector<Instance> frame{box(0, 0, 8, 8), box(30, 5, 8, 8), box(70, 20, 10, 6)};
  for (std::size_t f = 0; f < 10; ++f) state.update(f, frame);
  REQUIRE(state.tracks().size() == 3);
  CHECK(state.active_ids() == std::vector<int>{1, 2, 3});
  for (const auto& t : state.tracks()) {
    CHECK(t.records.size() == 10);
    CHECK(t.movement == 0.0);
    for (const auto c : heatmap(t)) CHECK((c == 0 || c == 10));
  }
}

TEST_CASE("translating object accumulates 21 px over 8 frames") {
  TrackState state(kDims);
  for (std::size_t f = 0; f < 8; ++f) {
    const std::vector<Instance> frame{box(5.0 + 3.0 * static_cast<double>(f), 10, 10, 10)};
    state.update(f, frame);
  }
  REQUIRE(state.tracks().size() == 1);
  const auto& t = state.tracks()[0];
  CHECK(t.movement == doctest::Approx(21.0).epsilon(1e-12));
  const auto m = track_metrics(t, kDims, 7.0);
  CHECK(m.movement_px == doctest::Approx(21.0));
  CHECK(m.avg_speed_px_s == doctest::Approx(21.0 / (7.0 / 7.0)));
  CHECK(m.body_pixel_size == 100.0);
}

TEST_CASE("movement is additive over a split timeline") {
  std::mt19937_64 rng(4);
  std::vector<std::vector<Instance>> frames;
  double x = 10;
  for (int f = 0; f < 12; ++f) {
    x += static_cast<double>(rng() % 4);
    frames.push_back({box(x, 10, 12, 10)});
  }
  auto run = [&](std::size_t a, std::size_t b) {
    TrackState s(kDims);
    for (std::size_t f = a; f <= b; ++f) s.update(f, frames[f]);
    REQUIRE(s.tracks().size() == 1);
    return s.tracks()[0].movement;
  };
  CHECK(run(0, 11) == doctest::Approx(run(0, 5) + run(5, 11)).epsilon(1e-12));
}

TEST_CASE("disappear then reappear issues a new id") {
  TrackState state(kDims);
  const std::vector<Instance> one{box(10, 10, 6, 6)};
  state.update(0, one);
  state.update(1, {});
  state.update(2, one);
  REQUIRE(state.tracks().size() == 2);
  CHECK_FALSE(state.tracks()[0].active);
  CHECK(state.active_ids() == std::vector<int>{2});
  CHECK(state.next_id() == 3);
}

TEST_CASE("tracker input validation") {
  TrackState state(kDims);
  Instance wrong;
  wrong.mask = BinaryMask({3, 3}, {0});
  const std::vector<Instance> bad{wrong};
  CHECK_THROWS_AS(state.update(0, bad), DimensionError);
  state.update(4, {});
  CHECK_THROWS_AS(state.update(4, {}), std::invalid_argument);
  CHECK_THROWS_AS(TrackState(kDims, {0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("metric formulas") {
  Track t;
  t.id = 7;
  for (std::size_t f = 0; f < 29; ++f) t.records.push_back({f, {0, 0}, 1, 0.0});
  t.movement = 155.0;
  t.top_areas = {10, 9, 8, 7, 6};
  t.occupancy.assign(kDims.pixel_count(), 0);
  for (std::size_t p = 0; p < 480; ++p) t.occupancy[p] = 1;
  const auto m = track_metrics(t, kDims, 7.0);
  CHECK(m.track_id == 7);
  CHECK(m.avg_speed_px_s == doctest::Approx(38.75).epsilon(1e-12));
  CHECK(m.body_pixel_size == 8.0);
  CHECK(m.space_usage == doctest::Approx(0.1));

  const BinaryMask pen(kDims, {0, 1, 1000, 1001});
  CHECK(track_metrics(t, kDims, 7.0, &pen).space_usage == 0.5);

  Track single;
  single.records.push_back({3, {4, 4}, 12, 0.0});
  single.top_areas = {12};
  const auto s = track_metrics(single, kDims, 7.0);
  CHECK(s.avg_speed_px_s == 0.0);
  CHECK(s.movement_px == 0.0);
  CHECK(s.body_pixel_size == 12.0);
  CHECK_THROWS_AS(track_metrics(Track{}, kDims, 7.0), std::invalid_argument);
}

TEST_CASE("top five areas from a six-frame track") {
  TrackState state(kDims);
  // Widths shrink so the square stays overlapping while areas go 10,9,...,5.
  for (std::uint32_t f = 0; f < 6; ++f) state.update(f, std::vector<Instance>{box(0, 0, 10 - f, 1)});
  REQUIRE(state.tracks().size() == 1);
  CHECK(state.tracks()[0].top_areas == std::vector<std::size_t>{10, 9, 8, 7, 6});
  CHECK(track_metrics(state.tracks()[0], kDims, 7.0).body_pixel_size == 8.0);
}

TEST_CASE("heatmap examples") {
  const GridDims small{4, 3};
  TrackState full(small);
  Instance whole;
  std::vector<std::uint32_t> all(small.pixel_count());
  std::iota(all.begin(), all.end(), 0);
  whole.mask = BinaryMask(small, all);
  for (std::size_t f = 0; f < 5; ++f) full.update(f, std::vector<Instance>{whole});
  for (const auto c : heatmap(full.tracks()[0])) CHECK(c == 5);

  Track disjoint;
  disjoint.occupancy.assign(kDims.pixel_count(), 0);
  const auto a = box(0, 0, 3, 3);
  const auto b = box(10, 10, 2, 4);
  for (const auto p : a.mask.pixels()) ++disjoint.occupancy[p];
  for (const auto p : b.mask.pixels()) ++disjoint.occupancy[p];
  const auto h = heatmap(disjoint);
  CHECK(std::accumulate(h.begin(), h.end(), 0U) == 17U);
  CHECK(*std::max_element(h.begin(), h.end()) == 1U);
  CHECK(h[kDims.index(50, 30)] == 0);
}
