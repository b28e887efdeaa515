#include "cclus/cluster.hpp"

#include <algorithm>
#include <deque>
#include <numeric>

namespace cclus {

GridIndex::GridIndex(std::span<const Vec2> points, double cell_size)
    : cell_size_(cell_size), points_(points.begin(), points.end()) {
  if (!(cell_size > 0.0) || !std::isfinite(cell_size)) {
    throw std::invalid_argument("grid index cell size must be positive and finite");
  }
  std::vector<std::pair<std::uint64_t, std::uint32_t>> keyed(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) {
    keyed[i] = {cell_key(cell_coord(points_[i].x), cell_coord(points_[i].y)),
                static_cast<std::uint32_t>(i)};
  }
  std::sort(keyed.begin(), keyed.end());
  order_.reserve(keyed.size());
  for (std::size_t k = 0; k < keyed.size(); ++k) {
    if (k == 0 || keyed[k].first != keyed[k - 1].first) {
      cells_.emplace(keyed[k].first, static_cast<std::uint32_t>(starts_.size()));
      starts_.push_back(static_cast<std::uint32_t>(k));
    }
    order_.push_back(keyed[k].second);
  }
  starts_.push_back(static_cast<std::uint32_t>(keyed.size()));
}

std::size_t GridIndex::count_neighbors(Vec2 query, std::size_t stop_at) const {
  const double r2 = cell_size_ * cell_size_;
  const auto cx = cell_coord(query.x);
  const auto cy = cell_coord(query.y);
  std::size_t n = 0;
  for (std::int64_t dy = -1; dy <= 1; ++dy) {
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      const auto it = cells_.find(cell_key(cx + dx, cy + dy));
      if (it == cells_.end()) continue;
      for (std::uint32_t k = starts_[it->second]; k < starts_[it->second + 1]; ++k) {
        if (squared_distance(points_[order_[k]], query) <= r2 && ++n >= stop_at) return n;
      }
    }
  }
  return n;
}

std::vector<std::uint32_t> radius_neighbors(const GridIndex& index, Vec2 query, double r) {
  if (r != index.cell_size()) {
    throw std::invalid_argument("radius query r=" + std::to_string(r) +
                                " does not match grid cell size " +
                                std::to_string(index.cell_size()));
  }
  std::vector<std::uint32_t> out;
  index.for_each_neighbor(query, [&](std::uint32_t i) { out.push_back(i); });
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

void check_dbscan_params(const DbscanParams& params) {
  if (!(params.eps > 0.0) || !std::isfinite(params.eps)) {
    throw std::invalid_argument("dbscan eps must be positive");
  }
  if (params.min_pts < 1) throw std::invalid_argument("dbscan min_pts must be >= 1");
}

// Shared expansion: given core flags and a neighbor enumerator, label clusters
// in ascending scan order with FIFO expansion.
template <class ForEachNeighbor>
ClusterLabels expand_clusters(std::size_t n, const std::vector<char>& core,
                              ForEachNeighbor&& for_each_neighbor) {
  ClusterLabels out;
  out.labels.assign(n, 0);
  std::deque<std::uint32_t> queue;
  for (std::size_t i = 0; i < n; ++i) {
    if (out.labels[i] != 0 || !core[i]) continue;
    const int id = ++out.group_count;
    out.labels[i] = id;
    queue.push_back(static_cast<std::uint32_t>(i));
    while (!queue.empty()) {
      const auto q = queue.front();
      queue.pop_front();
      for_each_neighbor(q, [&](std::uint32_t j) {
        if (out.labels[j] != 0) return;
        out.labels[j] = id;
        if (core[j]) queue.push_back(j);
      });
    }
  }
  return out;
}

}  // namespace

namespace {

// Cells of side eps/sqrt(2): two points in one cell are (up to rounding) within
// eps of each other, so a cell holding min_pts points is all core and all of a
// cell's core points share a cluster. Cells whose actual bounding box is wider
// than eps (possible only through rounding) get no shortcuts.
class CellGrid {
 public:
  struct Cell {
    std::int64_t cx = 0;
    std::int64_t cy = 0;
    std::uint32_t begin = 0;  // range in order_
    std::uint32_t end = 0;
    bool compact = false;
  };

  CellGrid(std::span<const Vec2> points, double eps) : side_(eps / std::sqrt(2.0)) {
    const double r2 = eps * eps;
    std::vector<std::pair<std::pair<std::int64_t, std::int64_t>, std::uint32_t>> keyed(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      keyed[i] = {{coord(points[i].x), coord(points[i].y)}, static_cast<std::uint32_t>(i)};
    }
    std::sort(keyed.begin(), keyed.end());
    order_.reserve(points.size());
    cell_of_.resize(points.size());
    for (std::size_t k = 0; k < keyed.size(); ++k) {
      if (k == 0 || keyed[k].first != keyed[k - 1].first) {
        if (!cells_.empty()) cells_.back().end = static_cast<std::uint32_t>(k);
        cells_.push_back({keyed[k].first.first, keyed[k].first.second,
                          static_cast<std::uint32_t>(k), 0, false});
        lookup_.emplace(key(keyed[k].first.first, keyed[k].first.second),
                        static_cast<std::uint32_t>(cells_.size() - 1));
      }
      order_.push_back(keyed[k].second);
      cell_of_[keyed[k].second] = static_cast<std::uint32_t>(cells_.size() - 1);
    }
    if (!cells_.empty()) cells_.back().end = static_cast<std::uint32_t>(keyed.size());

    for (auto& c : cells_) {
      double x0 = points[order_[c.begin]].x, x1 = x0;
      double y0 = points[order_[c.begin]].y, y1 = y0;
      for (auto k = c.begin; k < c.end; ++k) {
        const Vec2 p = points[order_[k]];
        x0 = std::min(x0, p.x);
        x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y);
        y1 = std::max(y1, p.y);
      }
      c.compact = (x1 - x0) * (x1 - x0) + (y1 - y0) * (y1 - y0) <= r2;
    }

    // Any point within eps lies at most two cells away on each axis.
    neighbors_.resize(cells_.size());
    for (std::size_t c = 0; c < cells_.size(); ++c) {
      for (std::int64_t dy = -2; dy <= 2; ++dy) {
        for (std::int64_t dx = -2; dx <= 2; ++dx) {
          const auto it = lookup_.find(key(cells_[c].cx + dx, cells_[c].cy + dy));
          if (it != lookup_.end()) neighbors_[c].push_back(it->second);
        }
      }
    }
  }

  const std::vector<Cell>& cells() const { return cells_; }
  std::span<const std::uint32_t> members(std::uint32_t c) const {
    return {order_.data() + cells_[c].begin, cells_[c].end - cells_[c].begin};
  }
  const std::vector<std::uint32_t>& neighbors(std::uint32_t c) const { return neighbors_[c]; }
  std::uint32_t cell_of(std::uint32_t i) const { return cell_of_[i]; }

 private:
  std::int64_t coord(double v) const {
    return clamped_cell(v / side_);
  }
  static std::uint64_t key(std::int64_t cx, std::int64_t cy) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(cx)) << 32) |
           static_cast<std::uint32_t>(cy);
  }

  double side_;
  std::vector<Cell> cells_;
  std::vector<std::uint32_t> order_;
  std::vector<std::uint32_t> cell_of_;
  std::vector<std::vector<std::uint32_t>> neighbors_;
  std::unordered_map<std::uint64_t, std::uint32_t> lookup_;
};

std::uint32_t find_root(std::vector<std::uint32_t>& parent, std::uint32_t x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

}  // namespace

// Equivalent to expanding clusters in ascending scan order: the core points of
// a cluster form one connected component of the eps-graph on core points, the
// clusters are numbered by their smallest core index, and a border point ends
// up in the lowest-numbered cluster with a core point within eps of it.
ClusterLabels dbscan(std::span<const Vec2> points, const DbscanParams& params) {
  check_dbscan_params(params);
  const std::size_t n = points.size();
  if (n == 0) return {};
  const double r2 = params.eps * params.eps;
  const CellGrid grid(points, params.eps);
  const auto& cells = grid.cells();

  std::vector<char> core(n, 0);
  std::vector<char> cell_has_core(cells.size(), 0);
  for (std::uint32_t c = 0; c < cells.size(); ++c) {
    const auto members = grid.members(c);
    if (cells[c].compact && members.size() >= params.min_pts) {
      for (const auto i : members) core[i] = 1;
      cell_has_core[c] = 1;
      continue;
    }
    for (const auto i : members) {
      std::size_t count = 0;
      for (const auto d : grid.neighbors(c)) {
        for (const auto j : grid.members(d)) {
          if (squared_distance(points[j], points[i]) <= r2) ++count;
        }
        if (count >= params.min_pts) break;
      }
      if (count >= params.min_pts) {
        core[i] = 1;
        cell_has_core[c] = 1;
      }
    }
  }

  // Union-find over cells; non-compact cells may hold several components, so
  // their core points are linked pairwise like points in different cells.
  std::vector<std::uint32_t> parent(cells.size() + n);
  std::iota(parent.begin(), parent.end(), 0U);
  auto node = [&](std::uint32_t i) {
    const auto c = grid.cell_of(i);
    return cells[c].compact ? c : static_cast<std::uint32_t>(cells.size() + i);
  };
  auto unite = [&](std::uint32_t a, std::uint32_t b) {
    a = find_root(parent, a);
    b = find_root(parent, b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  };
  for (std::uint32_t c = 0; c < cells.size(); ++c) {
    if (!cell_has_core[c]) continue;
    for (const auto d : grid.neighbors(c)) {
      if (d < c || !cell_has_core[d]) continue;
      const bool both_compact = cells[c].compact && cells[d].compact;
      if (d == c && cells[c].compact) continue;
      if (both_compact && find_root(parent, c) == find_root(parent, d)) continue;
      bool linked = false;
      for (const auto i : grid.members(c)) {
        if (!core[i]) continue;
        for (const auto j : grid.members(d)) {
          if (!core[j] || squared_distance(points[j], points[i]) > r2) continue;
          unite(node(i), node(j));
          if (both_compact) {
            linked = true;
            break;
          }
        }
        if (linked) break;
      }
    }
  }

  ClusterLabels out;
  out.labels.assign(n, 0);
  std::vector<int> rank(parent.size(), 0);
  for (std::uint32_t i = 0; i < n; ++i) {
    if (!core[i]) continue;
    const auto root = find_root(parent, node(i));
    if (rank[root] == 0) rank[root] = ++out.group_count;
    out.labels[i] = rank[root];
  }
  for (std::uint32_t i = 0; i < n; ++i) {
    if (core[i]) continue;
    int best = 0;
    for (const auto d : grid.neighbors(grid.cell_of(i))) {
      if (!cell_has_core[d]) continue;
      for (const auto j : grid.members(d)) {
        if (!core[j] || squared_distance(points[j], points[i]) > r2) continue;
        if (best == 0 || out.labels[j] < best) best = out.labels[j];
      }
    }
    out.labels[i] = best;
  }
  return out;
}

ClusterLabels dbscan_naive(std::span<const Vec2> points, const DbscanParams& params) {
  check_dbscan_params(params);
  const double r2 = params.eps * params.eps;
  const std::size_t n = points.size();
  std::vector<char> core(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t count = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (squared_distance(points[j], points[i]) <= r2) ++count;
    }
    core[i] = count >= params.min_pts;
  }
  return expand_clusters(n, core, [&](std::uint32_t q, auto&& visit) {
    for (std::uint32_t j = 0; j < n; ++j) {
      if (squared_distance(points[j], points[q]) <= r2) visit(j);
    }
  });
}

ClusterLabels mean_shift(std::span<const Vec2> points, const MeanShiftParams& params) {
  if (!(params.bandwidth > 0.0) || !std::isfinite(params.bandwidth)) {
    throw std::invalid_argument("mean-shift bandwidth must be positive");
  }
  const std::size_t n = points.size();
  if (n == 0) return {};

  // Windows are closed balls of radius `bandwidth` around the current mode;
  // a grid over the input points with that cell size answers them.
  const GridIndex index(points, params.bandwidth);
  const double tol2 = params.shift_tol * params.shift_tol;

  std::vector<Vec2> modes(points.begin(), points.end());
  std::vector<std::uint32_t> active(n);
  std::iota(active.begin(), active.end(), 0U);

  for (int iter = 0; iter < params.max_iter && !active.empty(); ++iter) {
    std::size_t kept = 0;
    for (const auto i : active) {
      double sx = 0.0;
      double sy = 0.0;
      double count = 0.0;
      index.for_each_neighbor(modes[i], [&](std::uint32_t j) {
        sx += points[j].x;
        sy += points[j].y;
        count += 1.0;
      });
      if (count == 0.0) continue;  // empty window: stays put, converged
      const Vec2 next{sx / count, sy / count};
      const bool moving = squared_distance(next, modes[i]) >= tol2;
      modes[i] = next;
      if (moving) active[kept++] = i;
    }
    active.resize(kept);
  }

  ClusterLabels out;
  out.labels.assign(n, 0);
  std::vector<Vec2> group_modes;
  const double merge2 = params.merge_radius * params.merge_radius;
  for (std::size_t i = 0; i < n; ++i) {
    int label = 0;
    for (std::size_t g = 0; g < group_modes.size(); ++g) {
      if (squared_distance(group_modes[g], modes[i]) <= merge2) {
        label = static_cast<int>(g) + 1;
        break;
      }
    }
    if (label == 0) {
      group_modes.push_back(modes[i]);
      label = static_cast<int>(group_modes.size());
    }
    out.labels[i] = label;
  }
  out.group_count = static_cast<int>(group_modes.size());
  return out;
}

std::string_view to_string(ClusterAlgorithm algo) {
  switch (algo) {
    case ClusterAlgorithm::dbscan:
      return "dbscan";
    case ClusterAlgorithm::dbscan_naive:
      return "dbscan-naive";
    case ClusterAlgorithm::mean_shift:
      return "mean-shift";
  }
  return "unknown";
}

ClusterAlgorithm parse_cluster_algorithm(std::string_view name) {
  if (name == "dbscan") return ClusterAlgorithm::dbscan;
  if (name == "dbscan-naive") return ClusterAlgorithm::dbscan_naive;
  if (name == "mean-shift") return ClusterAlgorithm::mean_shift;
  throw std::invalid_argument("unknown clustering algorithm '" + std::string(name) +
                              "' (expected dbscan, dbscan-naive or mean-shift)");
}

}  // namespace cclus
