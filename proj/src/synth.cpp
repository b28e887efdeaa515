#include "cclus/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace cclus {

namespace {

// Positions and velocities live on a 1/8 px lattice so that every vote
// pixel + (center - pixel) is exact in single precision.
double snap(double v) { return std::round(v * 8.0) / 8.0; }

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double uniform(std::mt19937_64& rng, Range r) {
  if (r.hi <= r.lo) return r.lo;
  return std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
}

struct Box {
  std::int64_t x0, y0, x1, y1;  // inclusive, clipped to the grid
};

Box clip_box(GridDims dims, double cx, double cy, double radius) {
  return {std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(cx - radius))),
          std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(cy - radius))),
          std::min<std::int64_t>(dims.width - 1, static_cast<std::int64_t>(std::ceil(cx + radius))),
          std::min<std::int64_t>(dims.height - 1,
                                 static_cast<std::int64_t>(std::ceil(cy + radius)))};
}

Range center_range(double extent, std::uint32_t size) {
  return {snap(extent + 1.0), snap(static_cast<double>(size) - extent - 2.0)};
}

template <class Fn>
void for_each_piglet_pixel(GridDims dims, const PigletBody& body, Vec2 center, Fn&& fn) {
  const Box b = clip_box(dims, center.x, center.y, body.semi_major);
  for (std::int64_t y = b.y0; y <= b.y1; ++y) {
    for (std::int64_t x = b.x0; x <= b.x1; ++x) {
      if (body.contains(center, static_cast<double>(x), static_cast<double>(y))) {
        fn(dims.index(static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y)));
      }
    }
  }
}

struct Raster {
  std::vector<int> owner;  // -1 background, [0, n) piglet, n sow
  std::vector<char> occluded;
  std::vector<Vec2> centers;
};

Raster rasterize(const SceneSpec& spec, const SceneLayout& layout, std::size_t frame) {
  const GridDims dims = spec.dims;
  const int sow_id = static_cast<int>(layout.piglets.size());
  Raster r;
  r.owner.assign(dims.pixel_count(), -1);
  r.occluded.assign(dims.pixel_count(), 0);
  if (layout.sow) {
    const SowBody& s = *layout.sow;
    const Box b = clip_box(dims, s.center.x, s.center.y, std::max(s.length, s.breadth) / 2.0 + 1.0);
    for (std::int64_t y = b.y0; y <= b.y1; ++y) {
      for (std::int64_t x = b.x0; x <= b.x1; ++x) {
        if (s.contains(static_cast<double>(x), static_cast<double>(y))) {
          r.owner[dims.index(static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y))] = sow_id;
        }
      }
    }
  }
  for (std::size_t i = 0; i < layout.piglets.size(); ++i) {
    const Vec2 c = piglet_center(spec, layout.piglets[i], frame);
    r.centers.push_back(c);
    for_each_piglet_pixel(dims, layout.piglets[i], c,
                          [&](std::uint32_t p) { r.owner[p] = static_cast<int>(i); });
  }
  for (const auto& bar : layout.bars) {
    const Box b = clip_box(dims, bar.center.x, bar.center.y,
                           std::hypot(bar.length, bar.width) / 2.0 + 1.0);
    for (std::int64_t y = b.y0; y <= b.y1; ++y) {
      for (std::int64_t x = b.x0; x <= b.x1; ++x) {
        if (bar.contains(static_cast<double>(x), static_cast<double>(y))) {
          const auto p = dims.index(static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y));
          r.owner[p] = -1;
          r.occluded[p] = 1;
        }
      }
    }
  }
  return r;
}

std::vector<std::size_t> visible_areas(const Raster& r, std::size_t piglets) {
  std::vector<std::size_t> areas(piglets, 0);
  for (const int o : r.owner) {
    if (o >= 0 && static_cast<std::size_t>(o) < piglets) ++areas[o];
  }
  return areas;
}

BinaryMask owned_mask(GridDims dims, const Raster& r, int id) {
  std::vector<std::uint32_t> px;
  for (std::uint32_t p = 0; p < r.owner.size(); ++p) {
    if (r.owner[p] == id) px.push_back(p);
  }
  return BinaryMask::from_sorted(dims, std::move(px));
}

OccluderBar split_bar(const PigletBody& body, double width) {
  return {body.start, 2.0 * body.semi_minor + 6.0, width, body.angle + std::numbers::pi / 2.0};
}

// Covers the body along its major axis from 0.7a out past the tip.
OccluderBar end_bar(const PigletBody& body, double side) {
  const double near = 0.7 * body.semi_major;
  const double far = body.semi_major + 1.5;
  const double d = side * (near + far) / 2.0;
  const Vec2 axis{std::cos(body.angle), std::sin(body.angle)};
  return {body.start + axis * d, 2.0 * body.semi_minor + 6.0, far - near,
          body.angle + std::numbers::pi / 2.0};
}

enum class Failure { none, placement, bar_targets, visibility, bso_split, pmo_shape };

const char* describe(Failure f) {
  switch (f) {
    case Failure::placement:
      return "piglet placement within max_overlap";
    case Failure::bar_targets:
      return "not enough piglets for the requested BSO/PMO bars";
    case Failure::visibility:
      return "min_visible_area for every piglet over the horizon";
    case Failure::bso_split:
      return "BSO bar splitting its target into separate parts";
    case Failure::pmo_shape:
      return "PMO bar leaving its target in one piece";
    case Failure::none:
      break;
  }
  return "none";
}

Failure try_layout(const SceneSpec& spec, std::mt19937_64& rng, SceneLayout& layout) {
  const GridDims dims = spec.dims;
  layout = {};
  if (spec.sow) {
    SowBody s;
    s.length = uniform(rng, spec.sow_length);
    s.breadth = uniform(rng, spec.sow_breadth);
    s.corner = std::min({spec.sow_corner, s.length / 2.0, s.breadth / 2.0});
    s.center = {snap(uniform(rng, center_range(s.length / 2.0, dims.width))),
                snap(uniform(rng, center_range(s.breadth / 2.0, dims.height)))};
    layout.sow = s;
  }

  const std::size_t frames = spec.max_speed > 0.0 ? std::max<std::size_t>(spec.horizon, 1) : 1;
  std::vector<std::vector<std::int16_t>> owners(
      frames, std::vector<std::int16_t>(dims.pixel_count(), -1));
  std::vector<std::vector<std::size_t>> areas;  // [piglet][frame]
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
  std::uniform_real_distribution<double> speed(-spec.max_speed, spec.max_speed);

  for (std::size_t i = 0; i < spec.piglets; ++i) {
    bool placed = false;
    for (int tries = 0; tries < 100 && !placed; ++tries) {
      PigletBody body;
      body.semi_major = uniform(rng, spec.semi_major);
      body.semi_minor = std::min(uniform(rng, spec.semi_minor), body.semi_major);
      body.angle = angle(rng);
      body.start = {snap(uniform(rng, center_range(body.semi_major, dims.width))),
                    snap(uniform(rng, center_range(body.semi_major, dims.height)))};
      if (spec.max_speed > 0.0) body.velocity = {snap(speed(rng)), snap(speed(rng))};

      std::vector<std::vector<std::uint32_t>> pixels(frames);
      bool ok = true;
      for (std::size_t f = 0; f < frames && ok; ++f) {
        for_each_piglet_pixel(dims, body, piglet_center(spec, body, f),
                              [&](std::uint32_t p) { pixels[f].push_back(p); });
        std::vector<std::size_t> overlap(i, 0);
        for (const auto p : pixels[f]) {
          if (owners[f][p] >= 0) ++overlap[owners[f][p]];
        }
        for (std::size_t j = 0; j < i && ok; ++j) {
          const double limit =
              spec.max_overlap * static_cast<double>(std::min(pixels[f].size(), areas[j][f]));
          ok = static_cast<double>(overlap[j]) <= limit;
        }
      }
      if (!ok) continue;
      areas.emplace_back();
      for (std::size_t f = 0; f < frames; ++f) {
        areas.back().push_back(pixels[f].size());
        for (const auto p : pixels[f]) {
          if (owners[f][p] < 0) owners[f][p] = static_cast<std::int16_t>(i);
        }
      }
      layout.piglets.push_back(body);
      placed = true;
    }
    if (!placed) return Failure::placement;
  }

  layout.bars = spec.bars;
  if (spec.bso_bars + spec.pmo_bars > spec.piglets) return Failure::bar_targets;
  std::vector<std::size_t> order(spec.piglets);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  std::bernoulli_distribution coin(0.5);
  for (std::size_t k = 0; k < spec.bso_bars; ++k) {
    layout.bso_targets.push_back(order[k]);
    layout.bars.push_back(split_bar(layout.piglets[order[k]], spec.bar_width));
  }
  for (std::size_t k = 0; k < spec.pmo_bars; ++k) {
    const std::size_t target = order[spec.bso_bars + k];
    layout.pmo_targets.push_back(target);
    layout.bars.push_back(end_bar(layout.piglets[target], coin(rng) ? 1.0 : -1.0));
  }

  for (std::size_t f = 0; f < frames; ++f) {
    const Raster r = rasterize(spec, layout, f);
    const auto vis = visible_areas(r, spec.piglets);
    for (const auto a : vis) {
      if (a < spec.min_visible_area) return Failure::visibility;
    }
    if (f == 0) {
      for (const auto t : layout.bso_targets) {
        if (count_components(owned_mask(dims, r, static_cast<int>(t))) < 2) {
          return Failure::bso_split;
        }
      }
      for (const auto t : layout.pmo_targets) {
        if (count_components(owned_mask(dims, r, static_cast<int>(t))) != 1) {
          return Failure::pmo_shape;
        }
      }
    }
  }
  return Failure::none;
}

}  // namespace

bool OccluderBar::contains(double x, double y) const {
  const double dx = x - center.x;
  const double dy = y - center.y;
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const double u = dx * c + dy * s;
  const double v = -dx * s + dy * c;
  return std::abs(u) <= length / 2.0 && std::abs(v) <= width / 2.0;
}

bool PigletBody::contains(Vec2 center, double x, double y) const {
  const double dx = x - center.x;
  const double dy = y - center.y;
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const double u = (dx * c + dy * s) / semi_major;
  const double v = (-dx * s + dy * c) / semi_minor;
  return u * u + v * v <= 1.0;
}

bool SowBody::contains(double x, double y) const {
  const double ex = std::max(std::abs(x - center.x) - (length / 2.0 - corner), 0.0);
  const double ey = std::max(std::abs(y - center.y) - (breadth / 2.0 - corner), 0.0);
  if (std::abs(x - center.x) > length / 2.0 || std::abs(y - center.y) > breadth / 2.0) return false;
  return ex * ex + ey * ey <= corner * corner;
}

void validate(const SceneSpec& spec) {
  validate_dims(spec.dims);
  if (spec.semi_major.lo <= 0.0 || spec.semi_major.hi < spec.semi_major.lo ||
      spec.semi_minor.lo <= 0.0 || spec.semi_minor.hi < spec.semi_minor.lo) {
    throw std::invalid_argument("scene: semi-axis ranges must be positive and ordered");
  }
  if (spec.piglets > 0 && 2.0 * spec.semi_major.hi + 4.0 >= std::min(spec.dims.width, spec.dims.height)) {
    throw std::invalid_argument("scene: piglet semi-major axis too large for the grid");
  }
  if (spec.sow && (spec.sow_length.hi + 4.0 >= spec.dims.width ||
                   spec.sow_breadth.hi + 4.0 >= spec.dims.height || spec.sow_length.lo <= 0.0 ||
                   spec.sow_breadth.lo <= 0.0)) {
    throw std::invalid_argument("scene: sow does not fit the grid");
  }
  if (!(spec.noise.flip_rate >= 0.0 && spec.noise.flip_rate < 1.0)) {
    throw std::invalid_argument("scene: flip rate must lie in [0, 1)");
  }
  if (!(spec.noise.offset_sigma >= 0.0)) throw std::invalid_argument("scene: sigma must be >= 0");
  if (!(spec.max_overlap >= 0.0 && spec.max_overlap <= 1.0)) {
    throw std::invalid_argument("scene: max_overlap must lie in [0, 1]");
  }
  if (!(spec.max_speed >= 0.0)) throw std::invalid_argument("scene: max_speed must be >= 0");
  if (!(spec.bar_width > 0.0)) throw std::invalid_argument("scene: bar width must be positive");
  if (spec.piglets >= 32000) throw std::invalid_argument("scene: too many piglets");
}

SceneLayout sample_layout(const SceneSpec& spec) {
  validate(spec);
  std::vector<std::size_t> failures(6, 0);
  for (std::size_t attempt = 0; attempt < std::max<std::size_t>(spec.max_attempts, 1); ++attempt) {
    std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                      static_cast<std::uint32_t>(attempt)};
    std::mt19937_64 rng(seq);
    SceneLayout layout;
    const Failure f = try_layout(spec, rng, layout);
    if (f == Failure::none) return layout;
    ++failures[static_cast<std::size_t>(f)];
  }
  const auto worst = static_cast<Failure>(
      std::max_element(failures.begin(), failures.end()) - failures.begin());
  throw InfeasibleError("synthetic scene infeasible after " + std::to_string(spec.max_attempts) +
                        " attempts: constraint '" + describe(worst) + "' (" +
                        std::to_string(spec.piglets) + " piglets on " + to_string(spec.dims) +
                        ", max_overlap=" + std::to_string(spec.max_overlap) +
                        ", min_visible_area=" + std::to_string(spec.min_visible_area) + ")");
}

Vec2 piglet_center(const SceneSpec& spec, const PigletBody& body, std::size_t frame) {
  const Range xr = center_range(body.semi_major, spec.dims.width);
  const Range yr = center_range(body.semi_major, spec.dims.height);
  Vec2 p = body.start;
  Vec2 v = body.velocity;
  auto step = [](double& pos, double& vel, Range r) {
    pos += vel;
    if (pos < r.lo) {
      pos = 2.0 * r.lo - pos;
      vel = -vel;
    } else if (pos > r.hi) {
      pos = 2.0 * r.hi - pos;
      vel = -vel;
    }
  };
  for (std::size_t k = 0; k < frame; ++k) {
    step(p.x, v.x, xr);
    step(p.y, v.y, yr);
  }
  return p;
}

const GroundTruthInstance* SyntheticFrame::find(int id) const {
  for (const auto& g : gt) {
    if (g.id == id) return &g;
  }
  return nullptr;
}

SyntheticFrame render_frame(const SceneSpec& spec, const SceneLayout& layout,
                            std::size_t frame_index) {
  const GridDims dims = spec.dims;
  const Raster r = rasterize(spec, layout, frame_index);
  const int n = static_cast<int>(layout.piglets.size());

  SyntheticFrame frame;
  frame.index = frame_index;
  frame.bso_targets = layout.bso_targets;
  frame.pmo_targets = layout.pmo_targets;

  std::vector<std::uint8_t> labels(dims.pixel_count());
  std::vector<Offset> offsets(dims.pixel_count());
  std::vector<std::uint32_t> occluded;
  std::vector<double> cos_a(n);
  std::vector<double> sin_a(n);
  for (int i = 0; i < n; ++i) {
    cos_a[i] = std::cos(layout.piglets[i].angle);
    sin_a[i] = std::sin(layout.piglets[i].angle);
  }
  for (std::uint32_t p = 0; p < dims.pixel_count(); ++p) {
    const int o = r.owner[p];
    const double x = dims.x_of(p);
    const double y = dims.y_of(p);
    if (r.occluded[p]) occluded.push_back(p);
    if (o >= 0 && o < n) {
      labels[p] = static_cast<std::uint8_t>(PixelClass::piglet);
      offsets[p] = {static_cast<float>(r.centers[o].x - x), static_cast<float>(r.centers[o].y - y)};
    } else if (o == n) {
      labels[p] = static_cast<std::uint8_t>(PixelClass::sow);
    } else if (spec.background_offsets == BackgroundOffsets::nearest_piglet && n > 0) {
      int best = 0;
      double best_rho = std::numeric_limits<double>::infinity();
      for (int i = 0; i < n; ++i) {
        const double dx = x - r.centers[i].x;
        const double dy = y - r.centers[i].y;
        const double u = (dx * cos_a[i] + dy * sin_a[i]) / layout.piglets[i].semi_major;
        const double v = (-dx * sin_a[i] + dy * cos_a[i]) / layout.piglets[i].semi_minor;
        const double rho = u * u + v * v;
        if (rho < best_rho) {
          best_rho = rho;
          best = i;
        }
      }
      offsets[p] = {static_cast<float>(r.centers[best].x - x),
                    static_cast<float>(r.centers[best].y - y)};
    }
  }
  frame.semantic = SemanticMap(dims, std::move(labels));
  frame.offsets = OffsetMap(dims, std::move(offsets));
  frame.occluders = BinaryMask::from_sorted(dims, std::move(occluded));

  std::vector<std::vector<std::uint32_t>> visible(n + 1);
  for (std::uint32_t p = 0; p < dims.pixel_count(); ++p) {
    if (r.owner[p] >= 0) visible[r.owner[p]].push_back(p);
  }
  for (int i = 0; i < n; ++i) {
    if (visible[i].empty()) continue;
    std::vector<std::uint32_t> full;
    for_each_piglet_pixel(dims, layout.piglets[i], r.centers[i],
                          [&](std::uint32_t p) { full.push_back(p); });
    frame.gt.push_back({i, InstanceClass::piglet, BinaryMask(dims, std::move(full)),
                        BinaryMask::from_sorted(dims, std::move(visible[i])), r.centers[i]});
  }
  if (layout.sow && !visible[n].empty()) {
    std::vector<std::uint32_t> full;
    for (std::uint32_t p = 0; p < dims.pixel_count(); ++p) {
      if (layout.sow->contains(dims.x_of(p), dims.y_of(p))) full.push_back(p);
    }
    frame.gt.push_back({n, InstanceClass::sow, BinaryMask::from_sorted(dims, std::move(full)),
                        BinaryMask::from_sorted(dims, std::move(visible[n])),
                        layout.sow->center});
  }
  return frame;
}

SyntheticFrame gen_frame(const SceneSpec& spec, std::size_t frame_index) {
  return render_frame(spec, sample_layout(spec), frame_index);
}

std::vector<SyntheticFrame> gen_sequence(const SceneSpec& spec, std::size_t n_frames) {
  if (n_frames < 1) throw std::invalid_argument("sequence needs at least one frame");
  const SceneLayout layout = sample_layout(spec);
  std::vector<SyntheticFrame> frames;
  frames.reserve(n_frames);
  for (std::size_t k = 0; k < n_frames; ++k) frames.push_back(render_frame(spec, layout, k));
  return frames;
}

NoisyMaps perturb(const SyntheticFrame& frame, const NoiseModel& noise, std::uint64_t seed) {
  if (!(noise.flip_rate >= 0.0 && noise.flip_rate < 1.0) || !(noise.offset_sigma >= 0.0)) {
    throw std::invalid_argument("noise model out of range");
  }
  const GridDims dims = frame.semantic.dims();
  std::mt19937_64 rng(seed);
  std::vector<std::uint8_t> labels(frame.semantic.labels().begin(), frame.semantic.labels().end());
  std::vector<Offset> offsets(frame.offsets.vectors().begin(), frame.offsets.vectors().end());
  if (noise.flip_rate > 0.0) {
    std::bernoulli_distribution flip(noise.flip_rate);
    constexpr auto bg = static_cast<std::uint8_t>(PixelClass::background);
    constexpr auto pl = static_cast<std::uint8_t>(PixelClass::piglet);
    for (auto& l : labels) {
      if ((l == bg || l == pl) && flip(rng)) l = (l == bg) ? pl : bg;
    }
  }
  if (noise.offset_sigma > 0.0) {
    std::normal_distribution<double> gauss(0.0, noise.offset_sigma);
    for (auto& o : offsets) {
      o.dx = static_cast<float>(o.dx + gauss(rng));
      o.dy = static_cast<float>(o.dy + gauss(rng));
    }
  }
  return {SemanticMap(dims, std::move(labels)), OffsetMap(dims, std::move(offsets))};
}

std::uint64_t frame_seed(std::uint64_t scene_seed, std::size_t frame_index) {
  return splitmix64(scene_seed ^ splitmix64(frame_index + 0x51ED270B27ULL));
}

std::vector<Instance> ground_truth_instances(const SyntheticFrame& frame) {
  std::vector<Instance> out;
  out.reserve(frame.gt.size());
  for (const auto& g : frame.gt) out.push_back({g.visible_mask, g.center, g.cls, 1.0});
  return out;
}

}  // namespace cclus
