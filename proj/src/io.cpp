#include "cclus/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

namespace cclus::io {

namespace {

using Bytes = std::vector<unsigned char>;

[[noreturn]] void format_fail(const std::string& source, std::size_t offset, const std::string& what) {
  throw FormatError(source + ": byte " + std::to_string(offset) + ": " + what);
}

Bytes slurp(std::istream& in) {
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void put_u32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                     static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
  out.write(b, 4);
}

std::uint32_t get_u32(const Bytes& b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

void put_f32(std::ostream& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

void write_header(std::ostream& out, const char* magic, GridDims dims) {
  out.write(magic, 4);
  out.put(static_cast<char>(kFormatVersion));
  put_u32(out, dims.width);
  put_u32(out, dims.height);
}

constexpr std::size_t kHeaderSize = 13;

GridDims read_header(const Bytes& b, const char* magic, std::size_t bytes_per_pixel,
                     const std::string& source) {
  if (b.size() < 4 || std::memcmp(b.data(), magic, 4) != 0) {
    format_fail(source, 0, std::string("expected magic \"") + magic + "\"");
  }
  if (b.size() < 5) format_fail(source, 4, "truncated before version byte");
  if (b[4] != kFormatVersion) {
    format_fail(source, 4, "unsupported version " + std::to_string(b[4]));
  }
  if (b.size() < kHeaderSize) format_fail(source, b.size(), "truncated header");
  const GridDims dims{get_u32(b, 5), get_u32(b, 9)};
  if (dims.width == 0 || dims.height == 0) format_fail(source, 5, "zero width or height");
  const std::uint64_t payload = static_cast<std::uint64_t>(dims.width) * dims.height * bytes_per_pixel;
  if (static_cast<std::uint64_t>(dims.width) * dims.height > 0xFFFFFFFFULL) {
    format_fail(source, 5, "grid " + to_string(dims) + " too large");
  }
  const std::uint64_t have = b.size() - kHeaderSize;
  if (have < payload) {
    format_fail(source, b.size(), "truncated payload: " + std::to_string(have) + " of " +
                                      std::to_string(payload) + " bytes");
  }
  if (have > payload) format_fail(source, kHeaderSize + payload, "trailing bytes after payload");
  return dims;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

// Line-oriented CSV reading with positions for diagnostics.
class CsvReader {
 public:
  CsvReader(std::istream& in, std::string source) : source_(std::move(source)) {
    const Bytes b = slurp(in);
    text_.assign(b.begin(), b.end());
  }

  bool next(std::vector<std::string_view>& fields) {
    if (pos_ >= text_.size()) return false;
    line_start_ = pos_;
    std::size_t end = text_.find('\n', pos_);
    if (end == std::string::npos) end = text_.size();
    std::string_view line(text_.data() + pos_, end - pos_);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos_ = end + 1;
    ++line_no_;
    fields.clear();
    std::size_t s = 0;
    while (true) {
      const std::size_t c = line.find(',', s);
      fields.push_back(line.substr(s, c == std::string_view::npos ? std::string_view::npos : c - s));
      if (c == std::string_view::npos) break;
      s = c + 1;
    }
    return true;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw FormatError(source_ + ": line " + std::to_string(line_no_) + " (byte " +
                      std::to_string(line_start_) + "): " + what);
  }

  template <class T>
  T number(std::string_view field, const char* column) const {
    T v{};
    const auto* first = field.data();
    const auto* last = field.data() + field.size();
    const auto [p, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || p != last || field.empty()) {
      fail(std::string("bad ") + column + " value '" + std::string(field) + "'");
    }
    return v;
  }

  void expect_header(const char* header) {
    std::vector<std::string_view> f;
    if (!next(f)) fail("missing header");
    std::string line;
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (i) line += ',';
      line += f[i];
    }
    if (line != header) fail(std::string("expected header '") + header + "'");
  }

 private:
  std::string source_;
  std::string text_;
  std::size_t pos_ = 0;
  std::size_t line_start_ = 0;
  std::size_t line_no_ = 0;
};

}  // namespace

void write_semantic(std::ostream& out, const SemanticMap& map) {
  write_header(out, "CCSM", map.dims());
  const auto labels = map.labels();
  out.write(reinterpret_cast<const char*>(labels.data()), static_cast<std::streamsize>(labels.size()));
}

SemanticMap read_semantic(std::istream& in, const std::string& source) {
  const Bytes b = slurp(in);
  const GridDims dims = read_header(b, "CCSM", 1, source);
  std::vector<std::uint8_t> labels(b.begin() + kHeaderSize, b.end());
  for (std::size_t p = 0; p < labels.size(); ++p) {
    if (labels[p] >= kPixelClassCount) {
      format_fail(source, kHeaderSize + p, "unknown class byte " + std::to_string(labels[p]));
    }
  }
  return SemanticMap(dims, std::move(labels));
}

void save_semantic(const std::string& path, const SemanticMap& map) {
  auto out = open_out(path);
  write_semantic(out, map);
  finish(out, path);
}

SemanticMap load_semantic(const std::string& path) {
  auto in = open_in(path);
  return read_semantic(in, path);
}

void write_offsets(std::ostream& out, const OffsetMap& map) {
  write_header(out, "CCOF", map.dims());
  for (const auto& o : map.vectors()) {
    put_f32(out, o.dx);
    put_f32(out, o.dy);
  }
}

OffsetMap read_offsets(std::istream& in, const std::string& source) {
  const Bytes b = slurp(in);
  const GridDims dims = read_header(b, "CCOF", 8, source);
  std::vector<Offset> v(dims.pixel_count());
  for (std::size_t p = 0; p < v.size(); ++p) {
    const std::size_t at = kHeaderSize + 8 * p;
    v[p].dx = std::bit_cast<float>(get_u32(b, at));
    v[p].dy = std::bit_cast<float>(get_u32(b, at + 4));
    if (!std::isfinite(v[p].dx) || !std::isfinite(v[p].dy)) {
      format_fail(source, at, "non-finite offset at pixel " + std::to_string(p));
    }
  }
  return OffsetMap(dims, std::move(v));
}

void save_offsets(const std::string& path, const OffsetMap& map) {
  auto out = open_out(path);
  write_offsets(out, map);
  finish(out, path);
}

OffsetMap load_offsets(const std::string& path) {
  auto in = open_in(path);
  return read_offsets(in, path);
}

std::string manifest_to_json(const Manifest& manifest) {
  nlohmann::ordered_json j;
  j["frame_id"] = manifest.frame_id;
  j["width"] = manifest.dims.width;
  j["height"] = manifest.dims.height;
  j["instances"] = nlohmann::ordered_json::array();
  for (const auto& inst : manifest.instances) {
    require_same_dims(inst.mask.dims(), manifest.dims, "instance mask vs manifest");
    nlohmann::ordered_json e;
    e["class"] = std::string(to_string(inst.cls));
    e["score"] = inst.confidence;
    e["predicted_center"] = {inst.predicted_center.x, inst.predicted_center.y};
    e["rle"] = rle_encode(inst.mask);
    j["instances"].push_back(std::move(e));
  }
  return j.dump(1) + "\n";
}

Manifest manifest_from_json(const std::string& text, const std::string& source) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    format_fail(source, e.byte, "invalid JSON");
  }
  Manifest m;
  try {
    m.frame_id = j.at("frame_id").get<std::string>();
    m.dims = {j.at("width").get<std::uint32_t>(), j.at("height").get<std::uint32_t>()};
    if (m.dims.width == 0 || m.dims.height == 0) {
      throw FormatError(source + ": zero width or height");
    }
    for (const auto& e : j.at("instances")) {
      Instance inst;
      inst.cls = parse_instance_class(e.at("class").get<std::string>());
      inst.confidence = e.at("score").get<double>();
      const auto& c = e.at("predicted_center");
      if (!c.is_array() || c.size() != 2) throw FormatError(source + ": predicted_center must be [x, y]");
      inst.predicted_center = {c[0].get<double>(), c[1].get<double>()};
      const auto counts = e.at("rle").get<std::vector<std::uint32_t>>();
      inst.mask = rle_decode(counts, m.dims);
      m.instances.push_back(std::move(inst));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(source + ": malformed manifest: " + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(source + ": " + e.what());
  } catch (const FormatError& e) {
    const std::string what = e.what();
    if (what.rfind(source, 0) == 0) throw;
    throw FormatError(source + ": " + what);
  }
  return m;
}

void save_manifest(const std::string& path, const Manifest& manifest) {
  write_text_file(path, manifest_to_json(manifest));
}

Manifest load_manifest(const std::string& path) {
  return manifest_from_json(read_text_file(path), path);
}

std::string format_double(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::vector<TrackRow> track_rows(const TrackState& state) {
  std::vector<TrackRow> rows;
  for (const auto& t : state.tracks()) {
    for (const auto& r : t.records) {
      rows.push_back({r.frame, t.id, t.cls, r.center.x, r.center.y, r.area, r.paired_iou});
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const TrackRow& a, const TrackRow& b) {
    return a.frame != b.frame ? a.frame < b.frame : a.track_id < b.track_id;
  });
  return rows;
}

void write_tracks_csv(std::ostream& out, const std::vector<TrackRow>& rows) {
  out << kTracksHeader << '\n';
  for (const auto& r : rows) {
    out << r.frame << ',' << r.track_id << ',' << to_string(r.cls) << ',' << format_double(r.center_x)
        << ',' << format_double(r.center_y) << ',' << r.area << ',' << format_double(r.paired_iou)
        << '\n';
  }
}

std::vector<TrackRow> read_tracks_csv(std::istream& in, const std::string& source) {
  CsvReader csv(in, source);
  csv.expect_header(kTracksHeader);
  std::vector<TrackRow> rows;
  std::vector<std::string_view> f;
  while (csv.next(f)) {
    if (f.size() == 1 && f[0].empty()) continue;
    if (f.size() != 7) csv.fail("expected 7 fields, got " + std::to_string(f.size()));
    TrackRow r;
    r.frame = csv.number<std::size_t>(f[0], "frame");
    r.track_id = csv.number<int>(f[1], "track_id");
    try {
      r.cls = parse_instance_class(f[2]);
    } catch (const std::invalid_argument& e) {
      csv.fail(e.what());
    }
    r.center_x = csv.number<double>(f[3], "center_x");
    r.center_y = csv.number<double>(f[4], "center_y");
    r.area = csv.number<std::size_t>(f[5], "area");
    r.paired_iou = csv.number<double>(f[6], "paired_iou");
    rows.push_back(r);
  }
  return rows;
}

void write_metrics_csv(std::ostream& out, const std::vector<TrackMetrics>& rows) {
  out << kMetricsHeader << '\n';
  for (const auto& m : rows) {
    out << m.track_id << ',' << format_double(m.movement_px) << ','
        << format_double(m.avg_speed_px_s) << ',' << format_double(m.body_pixel_size) << ','
        << format_double(m.space_usage) << '\n';
  }
}

std::vector<TrackMetrics> read_metrics_csv(std::istream& in, const std::string& source) {
  CsvReader csv(in, source);
  csv.expect_header(kMetricsHeader);
  std::vector<TrackMetrics> rows;
  std::vector<std::string_view> f;
  while (csv.next(f)) {
    if (f.size() == 1 && f[0].empty()) continue;
    if (f.size() != 5) csv.fail("expected 5 fields, got " + std::to_string(f.size()));
    rows.push_back({csv.number<int>(f[0], "track_id"), csv.number<double>(f[1], "movement_px"),
                    csv.number<double>(f[2], "avg_speed_px_s"),
                    csv.number<double>(f[3], "body_pixel_size"),
                    csv.number<double>(f[4], "space_usage")});
  }
  return rows;
}

void write_pgm(std::ostream& out, GridDims dims, const std::vector<std::uint32_t>& counts) {
  if (counts.size() != dims.pixel_count()) {
    throw DimensionError("heat map: " + std::to_string(counts.size()) + " counts for grid " +
                         to_string(dims));
  }
  const std::uint32_t peak = counts.empty() ? 0 : *std::max_element(counts.begin(), counts.end());
  out << "P5\n" << dims.width << ' ' << dims.height << "\n255\n";
  std::string px(counts.size(), '\0');
  if (peak > 0) {
    for (std::size_t i = 0; i < counts.size(); ++i) {
      px[i] = static_cast<char>((static_cast<std::uint64_t>(counts[i]) * 255 + peak / 2) / peak);
    }
  }
  out.write(px.data(), static_cast<std::streamsize>(px.size()));
}

Graymap read_pgm(std::istream& in, const std::string& source) {
  const Bytes b = slurp(in);
  std::size_t pos = 0;
  auto token = [&]() -> std::string {
    while (pos < b.size() && std::isspace(b[pos])) ++pos;
    const std::size_t start = pos;
    while (pos < b.size() && !std::isspace(b[pos])) ++pos;
    if (start == pos) format_fail(source, pos, "truncated graymap header");
    return std::string(b.begin() + static_cast<std::ptrdiff_t>(start),
                       b.begin() + static_cast<std::ptrdiff_t>(pos));
  };
  auto integer = [&](const char* what) {
    const std::size_t at = pos;
    const std::string t = token();
    std::uint32_t v = 0;
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size()) format_fail(source, at, std::string("bad ") + what);
    return v;
  };
  if (token() != "P5") format_fail(source, 0, "expected magic \"P5\"");
  Graymap g;
  g.dims.width = integer("width");
  g.dims.height = integer("height");
  if (integer("max value") != 255) format_fail(source, pos, "max value must be 255");
  ++pos;  // single whitespace byte before the raster
  if (b.size() < pos || b.size() - pos != g.dims.pixel_count()) {
    format_fail(source, std::min(pos, b.size()), "raster size does not match " + to_string(g.dims));
  }
  g.pixels.assign(b.begin() + static_cast<std::ptrdiff_t>(pos), b.end());
  return g;
}

void write_counts_csv(std::ostream& out, GridDims dims, const std::vector<std::uint32_t>& counts) {
  if (counts.size() != dims.pixel_count()) {
    throw DimensionError("heat map: " + std::to_string(counts.size()) + " counts for grid " +
                         to_string(dims));
  }
  for (std::uint32_t y = 0; y < dims.height; ++y) {
    for (std::uint32_t x = 0; x < dims.width; ++x) {
      if (x) out << ',';
      out << counts[dims.index(x, y)];
    }
    out << '\n';
  }
}

std::vector<std::uint32_t> read_counts_csv(std::istream& in, GridDims dims,
                                           const std::string& source) {
  CsvReader csv(in, source);
  std::vector<std::uint32_t> counts;
  counts.reserve(dims.pixel_count());
  std::vector<std::string_view> f;
  std::uint32_t rows = 0;
  while (csv.next(f)) {
    if (rows == dims.height) {
      if (f.size() == 1 && f[0].empty()) continue;
      csv.fail("more than " + std::to_string(dims.height) + " rows");
    }
    if (f.size() != dims.width) csv.fail("expected " + std::to_string(dims.width) + " fields");
    for (const auto v : f) counts.push_back(csv.number<std::uint32_t>(v, "count"));
    ++rows;
  }
  if (rows != dims.height) csv.fail("expected " + std::to_string(dims.height) + " rows");
  return counts;
}

std::string read_text_file(const std::string& path) {
  auto in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  finish(out, path);
}

}  // namespace cclus::io
