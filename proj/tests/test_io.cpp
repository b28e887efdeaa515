#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>

#include "cclus/io.hpp"

using namespace cclus;
namespace fs = std::filesystem;

namespace {

std::string semantic_bytes(const SemanticMap& m) {
  std::ostringstream out;
  io::write_semantic(out, m);
  return out.str();
}

SemanticMap semantic_from(const std::string& bytes) {
  std::istringstream in(bytes);
  return io::read_semantic(in, "m.ccsm");
}

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("semantic header layout") {
  const auto bytes = semantic_bytes(SemanticMap({3, 2}, {0, 1, 2, 2, 1, 0}));
  REQUIRE(bytes.size() == 13 + 6);
  CHECK(bytes.substr(0, 4) == "CCSM");
  CHECK(bytes[4] == 1);
  CHECK(static_cast<unsigned char>(bytes[5]) == 3);   // width, little endian
  CHECK(static_cast<unsigned char>(bytes[9]) == 2);   // height
  CHECK(bytes[13 + 2] == 2);
}

TEST_CASE("semantic and offset round trips") {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 50; ++k) {
    const GridDims d{1 + static_cast<std::uint32_t>(rng() % 30),
                     1 + static_cast<std::uint32_t>(rng() % 30)};
    std::vector<std::uint8_t> labels(d.pixel_count());
    std::vector<Offset> off(d.pixel_count());
    std::normal_distribution<float> g(0.0F, 10.0F);
    for (auto& l : labels) l = static_cast<std::uint8_t>(rng() % 3);
    for (auto& o : off) o = {g(rng), g(rng)};
    const SemanticMap sem(d, labels);
    const OffsetMap om(d, off);
    CHECK(semantic_from(semantic_bytes(sem)) == sem);
    std::stringstream buf;
    io::write_offsets(buf, om);
    CHECK(buf.str().size() == 13 + 8 * d.pixel_count());
    CHECK(io::read_offsets(buf) == om);
  }
}

TEST_CASE("semantic decode errors name the byte") {
  const auto good = semantic_bytes(SemanticMap({2, 2}, {0, 1, 2, 0}));
  auto bad_magic = good;
  bad_magic[0] = 'X';
  CHECK(error_of([&] { semantic_from(bad_magic); }).find("m.ccsm: byte 0") == 0);
  CHECK_THROWS_AS(semantic_from(bad_magic), FormatError);

  auto bad_version = good;
  bad_version[4] = 7;
  CHECK(error_of([&] { semantic_from(bad_version); }).find("byte 4") != std::string::npos);

  auto bad_class = good;
  bad_class[13 + 3] = 9;
  CHECK(error_of([&] { semantic_from(bad_class); }).find("byte 16") != std::string::npos);

  CHECK_THROWS_AS(semantic_from(good.substr(0, good.size() - 1)), FormatError);
  CHECK_THROWS_AS(semantic_from(good + "x"), FormatError);
  CHECK_THROWS_AS(semantic_from(good.substr(0, 7)), FormatError);

  auto zero_width = good;
  zero_width[5] = 0;
  CHECK_THROWS_AS(semantic_from(zero_width), FormatError);
}

TEST_CASE("offset decode rejects non-finite values and wrong magic") {
  std::stringstream buf;
  io::write_offsets(buf, OffsetMap::zeros({1, 1}));
  auto bytes = buf.str();
  const float nan = std::nanf("");
  std::memcpy(bytes.data() + 13, &nan, 4);
  std::istringstream in(bytes);
  CHECK_THROWS_AS(io::read_offsets(in), FormatError);
  std::istringstream wrong(semantic_bytes(SemanticMap({1, 1}, {0})));
  CHECK_THROWS_AS(io::read_offsets(wrong), FormatError);
}

TEST_CASE("file helpers report io errors") {
  CHECK_THROWS_AS(io::load_semantic("/nonexistent/dir/x.ccsm"), IoError);
  CHECK_THROWS_AS(io::save_offsets("/nonexistent/dir/x.ccof", OffsetMap::zeros({1, 1})), IoError);
  const auto dir = fs::temp_directory_path() / "cclus_test_io";
  fs::create_directories(dir);
  const auto path = (dir / "a.ccsm").string();
  const SemanticMap m({2, 1}, {1, 2});
  io::save_semantic(path, m);
  CHECK(io::load_semantic(path) == m);
  fs::remove_all(dir);
}

TEST_CASE("manifest json round trip and shape") {
  const GridDims d{4, 3};
  io::Manifest m{"frame_7", d, {}};
  Instance a;
  a.mask = BinaryMask(d, {1, 2, 5});
  a.predicted_center = {1.5, 0.25};
  a.confidence = 0.75;
  Instance s;
  s.mask = BinaryMask(d, {11});
  s.cls = InstanceClass::sow;
  s.predicted_center = {3, 2};
  m.instances = {a, s};
  const auto text = io::manifest_to_json(m);
  CHECK(text.find("\"frame_id\"") < text.find("\"width\""));
  CHECK(text.find("\"rle\"") != std::string::npos);
  CHECK(text.find("\"sow\"") != std::string::npos);
  CHECK(io::manifest_from_json(text) == m);
}

TEST_CASE("manifest errors") {
  CHECK_THROWS_AS(io::manifest_from_json("{", "x.json"), FormatError);
  CHECK(error_of([] { io::manifest_from_json("[]", "x.json"); }).rfind("x.json", 0) == 0);
  const std::string bad_rle =
      R"({"frame_id":"f","width":2,"height":2,"instances":[{"class":"piglet","score":1,"predicted_center":[0,0],"rle":[1,1]}]})";
  CHECK_THROWS_AS(io::manifest_from_json(bad_rle), FormatError);
  const std::string bad_class =
      R"({"frame_id":"f","width":2,"height":2,"instances":[{"class":"boar","score":1,"predicted_center":[0,0],"rle":[4]}]})";
  CHECK_THROWS_AS(io::manifest_from_json(bad_class), FormatError);
  const std::string zero =
      R"({"frame_id":"f","width":0,"height":2,"instances":[]})";
  CHECK_THROWS_AS(io::manifest_from_json(zero), FormatError);
}

TEST_CASE("tracks and metrics csv round trips") {
  std::vector<io::TrackRow> rows{{0, 1, InstanceClass::piglet, 10.125, 3.0, 240, 0.0},
                                 {1, 1, InstanceClass::piglet, 0.1, -2.5e-7, 238, 0.9125},
                                 {1, 2, InstanceClass::sow, 100, 200, 9000, 1.0 / 3.0}};
  std::stringstream buf;
  io::write_tracks_csv(buf, rows);
  CHECK(buf.str().rfind(io::kTracksHeader, 0) == 0);
  CHECK(io::read_tracks_csv(buf) == rows);

  std::vector<TrackMetrics> metrics{{1, 21.0, 3.0, 8.0, 0.125}, {2, 0.0, 0.0, 1e-3, 1.0 / 7.0}};
  std::stringstream mbuf;
  io::write_metrics_csv(mbuf, metrics);
  CHECK(io::read_metrics_csv(mbuf) == metrics);
}

TEST_CASE("csv errors give line numbers") {
  std::istringstream bad_header("frame,track\n");
  CHECK_THROWS_AS(io::read_tracks_csv(bad_header), FormatError);
  std::istringstream bad_cell(std::string(io::kTracksHeader) + "\n0,1,piglet,1,2,abc,0\n");
  CHECK(error_of([&] { io::read_tracks_csv(bad_cell, "t.csv"); }).find("t.csv: line 2") == 0);
  std::istringstream short_row(std::string(io::kMetricsHeader) + "\n1,2,3\n");
  CHECK_THROWS_AS(io::read_metrics_csv(short_row), FormatError);
}

TEST_CASE("format_double is shortest round trip") {
  CHECK(io::format_double(0.1) == "0.1");
  CHECK(io::format_double(21.0) == "21");
  CHECK(std::stod(io::format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("heat map outputs") {
  const GridDims d{3, 2};
  const std::vector<std::uint32_t> counts{0, 1, 2, 4, 0, 4};
  std::stringstream pgm;
  io::write_pgm(pgm, d, counts);
  const auto g = io::read_pgm(pgm);
  CHECK(g.dims == d);
  CHECK(g.pixels == std::vector<std::uint8_t>{0, 64, 128, 255, 0, 255});

  std::stringstream csv;
  io::write_counts_csv(csv, d, counts);
  CHECK(io::read_counts_csv(csv, d) == counts);
  CHECK_THROWS_AS(io::write_pgm(pgm, {2, 2}, counts), DimensionError);

  std::stringstream blank;
  io::write_pgm(blank, d, std::vector<std::uint32_t>(6, 0));
  CHECK(io::read_pgm(blank).pixels == std::vector<std::uint8_t>(6, 0));
}
