#include "cclus/config.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include "cclus/io.hpp"

namespace cclus {

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

template <class T>
T parse_number(std::string_view key, std::string_view value) {
  T v{};
  const auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || p != value.data() + value.size() || value.empty()) {
    throw std::invalid_argument("bad value '" + std::string(value) + "' for key '" +
                                std::string(key) + "'");
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("non-finite value for key '" + std::string(key) + "'");
    }
  }
  return v;
}

std::vector<double> parse_list(std::string_view key, std::string_view value, std::size_t n) {
  std::vector<double> out;
  std::size_t s = 0;
  while (true) {
    const auto c = value.find(',', s);
    out.push_back(parse_number<double>(key, trim(value.substr(s, c == std::string_view::npos ? c : c - s))));
    if (c == std::string_view::npos) break;
    s = c + 1;
  }
  if (out.size() != n) {
    throw std::invalid_argument("key '" + std::string(key) + "' expects " + std::to_string(n) +
                                " comma-separated numbers");
  }
  return out;
}

Range parse_range(std::string_view key, std::string_view value) {
  const auto v = parse_list(key, value, 2);
  return {v[0], v[1]};
}

}  // namespace

bool parse_switch(std::string_view value) {
  if (value == "on" || value == "true" || value == "1") return true;
  if (value == "off" || value == "false" || value == "0") return false;
  throw std::invalid_argument("expected on|off, got '" + std::string(value) + "'");
}

std::vector<ConfigEntry> split_config_lines(std::string_view text, const std::string& source) {
  std::vector<ConfigEntry> entries;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const auto line = trim(text.substr(pos, end - pos));
    ++line_no;
    pos = end + 1;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument(source + ":" + std::to_string(line_no) + ": expected key=value");
    }
    entries.push_back({line_no, std::string(trim(line.substr(0, eq))),
                       std::string(trim(line.substr(eq + 1)))});
  }
  return entries;
}

void set_config_value(PipelineConfig& c, std::string_view key, std::string_view value) {
  auto& s = c.segment;
  if (key == "t") {
    s.filter.radius_t = parse_number<double>(key, value);
  } else if (key == "min_neighbors") {
    s.filter.min_neighbors = parse_number<std::size_t>(key, value);
  } else if (key == "filter") {
    if (value == "density") {
      s.filter.strategy = FilterStrategy::density;
    } else if (value == "offset-magnitude") {
      s.filter.strategy = FilterStrategy::offset_magnitude;
    } else {
      throw std::invalid_argument("filter must be density|offset-magnitude");
    }
  } else if (key == "eps") {
    s.dbscan.eps = parse_number<double>(key, value);
  } else if (key == "min_pts") {
    s.dbscan.min_pts = parse_number<std::size_t>(key, value);
  } else if (key == "rc2m") {
    s.rc2m = parse_switch(value);
  } else if (key == "algo") {
    s.algorithm = parse_cluster_algorithm(value);
  } else if (key == "ms_bandwidth") {
    s.mean_shift.bandwidth = parse_number<double>(key, value);
  } else if (key == "ms_max_iter") {
    s.mean_shift.max_iter = parse_number<int>(key, value);
  } else if (key == "ms_shift_tol") {
    s.mean_shift.shift_tol = parse_number<double>(key, value);
  } else if (key == "ms_merge_radius") {
    s.mean_shift.merge_radius = parse_number<double>(key, value);
  } else if (key == "min_iou") {
    c.tracking.min_iou = parse_number<double>(key, value);
  } else if (key == "fps") {
    c.tracking.fps = parse_number<double>(key, value);
  } else if (key == "lambda") {
    c.lambda = parse_number<double>(key, value);
  } else if (key == "seed") {
    c.seed = parse_number<std::uint64_t>(key, value);
  } else {
    throw std::invalid_argument("unknown config key '" + std::string(key) + "'");
  }
}

void validate(const PipelineConfig& c) {
  const auto& s = c.segment;
  if (!(s.filter.radius_t > 0.0)) throw std::invalid_argument("t must be positive");
  if (!(s.dbscan.eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (s.dbscan.min_pts < 1) throw std::invalid_argument("min_pts must be >= 1");
  if (!(s.mean_shift.bandwidth > 0.0)) throw std::invalid_argument("ms_bandwidth must be positive");
  if (s.mean_shift.max_iter < 1) throw std::invalid_argument("ms_max_iter must be >= 1");
  if (!(s.mean_shift.shift_tol >= 0.0)) throw std::invalid_argument("ms_shift_tol must be >= 0");
  if (!(s.mean_shift.merge_radius >= 0.0)) {
    throw std::invalid_argument("ms_merge_radius must be >= 0");
  }
  if (!(c.tracking.min_iou >= 0.0 && c.tracking.min_iou <= 1.0)) {
    throw std::invalid_argument("min_iou must lie in [0, 1]");
  }
  if (!(c.tracking.fps > 0.0)) throw std::invalid_argument("fps must be positive");
  if (!(c.lambda >= 0.0 && c.lambda <= 1.0)) throw std::invalid_argument("lambda must lie in [0, 1]");
}

PipelineConfig parse_config(std::string_view text, const std::string& source) {
  PipelineConfig c;
  for (const auto& e : split_config_lines(text, source)) {
    try {
      set_config_value(c, e.key, e.value);
    } catch (const std::invalid_argument& err) {
      throw std::invalid_argument(source + ":" + std::to_string(e.line) + ": " + err.what());
    }
  }
  validate(c);
  return c;
}

std::string format_config(const PipelineConfig& c) {
  const auto& s = c.segment;
  std::ostringstream o;
  o << "t=" << io::format_double(s.filter.radius_t) << '\n'
    << "min_neighbors=" << s.filter.min_neighbors << '\n'
    << "filter=" << (s.filter.strategy == FilterStrategy::density ? "density" : "offset-magnitude")
    << '\n'
    << "eps=" << io::format_double(s.dbscan.eps) << '\n'
    << "min_pts=" << s.dbscan.min_pts << '\n'
    << "rc2m=" << (s.rc2m ? "on" : "off") << '\n'
    << "algo=" << to_string(s.algorithm) << '\n'
    << "ms_bandwidth=" << io::format_double(s.mean_shift.bandwidth) << '\n'
    << "ms_max_iter=" << s.mean_shift.max_iter << '\n'
    << "ms_shift_tol=" << io::format_double(s.mean_shift.shift_tol) << '\n'
    << "ms_merge_radius=" << io::format_double(s.mean_shift.merge_radius) << '\n'
    << "min_iou=" << io::format_double(c.tracking.min_iou) << '\n'
    << "fps=" << io::format_double(c.tracking.fps) << '\n'
    << "lambda=" << io::format_double(c.lambda) << '\n'
    << "seed=" << c.seed << '\n';
  return o.str();
}

void set_scene_value(SceneSpec& spec, std::string_view key, std::string_view value) {
  if (key == "width") {
    spec.dims.width = parse_number<std::uint32_t>(key, value);
  } else if (key == "height") {
    spec.dims.height = parse_number<std::uint32_t>(key, value);
  } else if (key == "piglets") {
    spec.piglets = parse_number<std::size_t>(key, value);
  } else if (key == "semi_major") {
    spec.semi_major = parse_range(key, value);
  } else if (key == "semi_minor") {
    spec.semi_minor = parse_range(key, value);
  } else if (key == "sow") {
    spec.sow = parse_switch(value);
  } else if (key == "sow_length") {
    spec.sow_length = parse_range(key, value);
  } else if (key == "sow_breadth") {
    spec.sow_breadth = parse_range(key, value);
  } else if (key == "sow_corner") {
    spec.sow_corner = parse_number<double>(key, value);
  } else if (key == "bso_bars") {
    spec.bso_bars = parse_number<std::size_t>(key, value);
  } else if (key == "pmo_bars") {
    spec.pmo_bars = parse_number<std::size_t>(key, value);
  } else if (key == "bar_width") {
    spec.bar_width = parse_number<double>(key, value);
  } else if (key == "bar") {
    const auto v = parse_list(key, value, 5);
    spec.bars.push_back({{v[0], v[1]}, v[2], v[3], v[4] * std::numbers::pi / 180.0});
  } else if (key == "max_speed") {
    spec.max_speed = parse_number<double>(key, value);
  } else if (key == "max_overlap") {
    spec.max_overlap = parse_number<double>(key, value);
  } else if (key == "min_visible_area") {
    spec.min_visible_area = parse_number<std::size_t>(key, value);
  } else if (key == "horizon") {
    spec.horizon = parse_number<std::size_t>(key, value);
  } else if (key == "flip_rate") {
    spec.noise.flip_rate = parse_number<double>(key, value);
  } else if (key == "offset_sigma") {
    spec.noise.offset_sigma = parse_number<double>(key, value);
  } else if (key == "background_offsets") {
    if (value == "zero") {
      spec.background_offsets = BackgroundOffsets::zero;
    } else if (value == "nearest-piglet") {
      spec.background_offsets = BackgroundOffsets::nearest_piglet;
    } else {
      throw std::invalid_argument("background_offsets must be zero|nearest-piglet");
    }
  } else if (key == "seed") {
    spec.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "max_attempts") {
    spec.max_attempts = parse_number<std::size_t>(key, value);
  } else {
    throw std::invalid_argument("unknown scene key '" + std::string(key) + "'");
  }
}

SceneSpec parse_scene_spec(std::string_view text, const std::string& source) {
  SceneSpec spec;
  for (const auto& e : split_config_lines(text, source)) {
    try {
      set_scene_value(spec, e.key, e.value);
    } catch (const std::invalid_argument& err) {
      throw std::invalid_argument(source + ":" + std::to_string(e.line) + ": " + err.what());
    }
  }
  validate(spec);
  return spec;
}

}  // namespace cclus
