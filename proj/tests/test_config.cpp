#include <doctest.h>

#include "cclus/config.hpp"

using namespace cclus;

TEST_CASE("defaults") {
  const PipelineConfig c;
  CHECK(c.segment.filter.radius_t == 20.0);
  CHECK(c.segment.filter.min_neighbors == 10);
  CHECK(c.segment.dbscan.eps == 2.5);
  CHECK(c.segment.dbscan.min_pts == 50);
  CHECK(c.segment.rc2m);
  CHECK(c.tracking.fps == 7.0);
  CHECK(c.tracking.min_iou == 0.0);
  CHECK(c.lambda == 0.5);
  CHECK_NOTHROW(validate(c));
}

TEST_CASE("parse with comments and whitespace") {
  const auto c = parse_config("# tuned\n eps = 3.5\n\nmin_pts=20\nrc2m = off\nalgo=mean-shift\n"
                              "filter=offset-magnitude\nfps=25\n");
  CHECK(c.segment.dbscan.eps == 3.5);
  CHECK(c.segment.dbscan.min_pts == 20);
  CHECK_FALSE(c.segment.rc2m);
  CHECK(c.segment.algorithm == ClusterAlgorithm::mean_shift);
  CHECK(c.segment.filter.strategy == FilterStrategy::offset_magnitude);
  CHECK(c.tracking.fps == 25.0);
}

TEST_CASE("format and parse round trip") {
  PipelineConfig c;
  set_config_value(c, "t", "12.5");
  set_config_value(c, "min_neighbors", "3");
  set_config_value(c, "ms_bandwidth", "7.25");
  set_config_value(c, "min_iou", "0.1");
  set_config_value(c, "lambda", "0.3");
  set_config_value(c, "seed", "99");
  set_config_value(c, "algo", "dbscan-naive");
  const auto text = format_config(c);
  const auto back = parse_config(text);
  CHECK(format_config(back) == text);
  CHECK(back.segment.filter.radius_t == 12.5);
  CHECK(back.seed == 99);
  CHECK(back.segment.algorithm == ClusterAlgorithm::dbscan_naive);
}

TEST_CASE("errors name source and line") {
  auto message = [](std::string_view text) {
    try {
      parse_config(text, "run.cfg");
    } catch (const std::invalid_argument& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("eps=1\nbogus=2\n").rfind("run.cfg:2:", 0) == 0);
  CHECK(message("eps=abc\n").rfind("run.cfg:1:", 0) == 0);
  CHECK(message("just text\n").rfind("run.cfg:1:", 0) == 0);
  CHECK(message("rc2m=maybe\n").rfind("run.cfg:1:", 0) == 0);
  CHECK_FALSE(message("eps=0\n").empty());
  CHECK_FALSE(message("lambda=2\n").empty());
  CHECK_FALSE(message("fps=0\n").empty());
  CHECK_FALSE(message("min_pts=-3\n").empty());
}

TEST_CASE("switch values") {
  for (const char* on : {"on", "true", "1"}) CHECK(parse_switch(on));
  for (const char* off : {"off", "false", "0"}) CHECK_FALSE(parse_switch(off));
  CHECK_THROWS_AS(parse_switch("yes"), std::invalid_argument);
}

TEST_CASE("scene spec parsing") {
  const auto s = parse_scene_spec(
      "width=256\nheight=192\npiglets=5\nsemi_major=20,24\nsow=off\nbso_bars=1\n"
      "bar=50,60,80,4,30\nmax_speed=2\nhorizon=12\nflip_rate=0.01\noffset_sigma=0.5\n"
      "background_offsets=zero\nseed=7\n");
  CHECK(s.dims == GridDims{256, 192});
  CHECK(s.piglets == 5);
  CHECK(s.semi_major.lo == 20.0);
  CHECK(s.semi_major.hi == 24.0);
  CHECK_FALSE(s.sow);
  CHECK(s.bso_bars == 1);
  REQUIRE(s.bars.size() == 1);
  CHECK(s.bars[0].center == Vec2{50, 60});
  CHECK(s.bars[0].length == 80.0);
  CHECK(s.bars[0].angle == doctest::Approx(30.0 * 3.14159265358979323846 / 180.0));
  CHECK(s.horizon == 12);
  CHECK(s.noise.flip_rate == 0.01);
  CHECK(s.background_offsets == BackgroundOffsets::zero);
  CHECK(s.seed == 7);
}

TEST_CASE("scene spec errors") {
  CHECK_THROWS_AS(parse_scene_spec("semi_major=20\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_scene_spec("bar=1,2,3\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_scene_spec("flip_rate=1.5\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_scene_spec("colour=pink\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_scene_spec("background_offsets=random\n"), std::invalid_argument);
}
