#include "panav/path_planning.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <ostream>
#include <queue>
#include <set>
#include <tuple>

#include "panav/error.hpp"
#include "panav/text_io.hpp"

namespace panav {

namespace {

bool lexicographic_less(const TopologicalPath& a, const TopologicalPath& b) {
  return a.nodes < b.nodes;
}

double octile(Cell a, Cell b) {
  const int dx = std::abs(a.x - b.x);
  const int dy = std::abs(a.y - b.y);
  const int lo = std::min(dx, dy);
  const int hi = std::max(dx, dy);
  return static_cast<double>(hi - lo) + static_cast<double>(lo) * std::numbers::sqrt2;
}

struct OpenEntry {
  double f;
  double h;
  std::size_t index;
};

// Min-heap order: f, then h, then row-major index.
struct OpenAfter {
  bool operator()(const OpenEntry& a, const OpenEntry& b) const {
    return std::tie(a.f, a.h, a.index) > std::tie(b.f, b.h, b.index);
  }
};

}  // namespace

std::vector<TopologicalPath> enumerate_simple_paths(const TopoGraph& graph, const std::string& start,
                                                    const std::string& goal,
                                                    EnumerateOptions options) {
  const auto s = graph.find_node(start);
  const auto t = graph.find_node(goal);
  if (!s) fail(ErrorCode::kUnknownRoom, "start room '" + start + "' is not in the graph");
  if (!t) fail(ErrorCode::kUnknownRoom, "goal room '" + goal + "' is not in the graph");

  std::vector<TopologicalPath> out;
  if (*s == *t) {
    out.push_back(TopologicalPath{{start}, 0.0, -1});
    return out;
  }

  const auto adj = graph.adjacency();
  std::vector<char> on_path(graph.nodes.size(), 0);
  std::vector<std::size_t> stack{*s};
  on_path[*s] = 1;

  auto record = [&]() {
    TopologicalPath p;
    for (std::size_t i = 0; i < stack.size(); ++i) {
      p.nodes.push_back(graph.nodes[stack[i]].room_name);
      if (i > 0) p.topo_length += graph.edge_between(stack[i - 1], stack[i])->length;
    }
    out.push_back(std::move(p));
  };

  // Explicit DFS: cursor[d] is the next neighbor slot to try at depth d.
  std::vector<std::size_t> cursor{0};
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    std::size_t& next = cursor.back();
    if (next >= adj[u].size()) {
      on_path[u] = 0;
      stack.pop_back();
      cursor.pop_back();
      continue;
    }
    const std::size_t v = adj[u][next++];
    if (on_path[v]) continue;
    if (v == *t) {
      stack.push_back(v);
      record();
      stack.pop_back();
      continue;
    }
    if (options.hallway_intermediates_only && graph.nodes[v].category != RoomCategory::kHallway) {
      continue;
    }
    on_path[v] = 1;
    stack.push_back(v);
    cursor.push_back(0);
  }
  std::sort(out.begin(), out.end(), lexicographic_less);
  return out;
}

std::vector<TopologicalPath> filter_candidates(std::vector<TopologicalPath> paths, std::size_t k) {
  if (k == 0) fail(ErrorCode::kInvalidArgument, "k must be at least 1");

  // (1) hallway-only intermediates
  std::vector<TopologicalPath> kept;
  for (auto& p : paths) {
    bool ok = true;
    for (std::size_t i = 1; i + 1 < p.nodes.size(); ++i) {
      if (category_from_name(p.nodes[i]) != RoomCategory::kHallway) ok = false;
    }
    if (ok) kept.push_back(std::move(p));
  }

  // (2) strict room-set inclusion removes the superset path
  std::vector<std::set<std::string>> sets;
  for (const auto& p : kept) sets.emplace_back(p.nodes.begin(), p.nodes.end());
  std::vector<TopologicalPath> survivors;
  for (std::size_t b = 0; b < kept.size(); ++b) {
    bool dominated = false;
    for (std::size_t a = 0; a < kept.size() && !dominated; ++a) {
      if (a == b || sets[a].size() >= sets[b].size()) continue;
      dominated = std::includes(sets[b].begin(), sets[b].end(), sets[a].begin(), sets[a].end());
    }
    if (!dominated) survivors.push_back(std::move(kept[b]));
  }

  // (3) k shortest
  std::sort(survivors.begin(), survivors.end(), [](const TopologicalPath& a, const TopologicalPath& b) {
    if (a.topo_length != b.topo_length) return a.topo_length < b.topo_length;
    return a.nodes < b.nodes;
  });
  if (survivors.size() > k) survivors.resize(k);
  for (std::size_t i = 0; i < survivors.size(); ++i) survivors[i].path_id = static_cast<int>(i);
  return survivors;
}

StepCost path_step_cost(std::span<const Cell> cells) {
  StepCost cost;
  for (std::size_t i = 1; i < cells.size(); ++i) {
    const int dx = std::abs(cells[i].x - cells[i - 1].x);
    const int dy = std::abs(cells[i].y - cells[i - 1].y);
    if (dx > 1 || dy > 1 || dx + dy == 0) {
      fail(ErrorCode::kInvalidArgument, "consecutive path cells are not 8-adjacent");
    }
    if (dx + dy == 2) {
      ++cost.diagonal;
    } else {
      ++cost.axis;
    }
  }
  return cost;
}

GridPath astar(const TraversabilityMap& tra, Cell from, Cell to) {
  const GridGeometry& g = tra.geometry;
  for (Cell c : {from, to}) {
    if (!tra.is_traversable(c)) {
      fail(ErrorCode::kNotTraversable,
           "endpoint (" + std::to_string(c.x) + "," + std::to_string(c.y) + ") is not traversable");
    }
  }
  if (from == to) return GridPath{{from}, {}};

  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  const std::size_t n = g.cell_count();
  std::vector<StepCost> best(n);
  std::vector<char> seen(n, 0);
  std::vector<char> closed(n, 0);
  std::vector<std::size_t> parent(n, kNone);

  std::priority_queue<OpenEntry, std::vector<OpenEntry>, OpenAfter> open;
  const std::size_t start = g.index(from);
  const std::size_t goal = g.index(to);
  seen[start] = 1;
  open.push({octile(from, to), octile(from, to), start});

  static constexpr int kDx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
  static constexpr int kDy[8] = {0, 0, 1, -1, 1, -1, 1, -1};

  while (!open.empty()) {
    const OpenEntry top = open.top();
    open.pop();
    if (closed[top.index]) continue;
    closed[top.index] = 1;
    if (top.index == goal) break;
    const Cell u = g.cell_at(top.index);
    const StepCost gu = best[top.index];
    for (int k = 0; k < 8; ++k) {
      const Cell v{u.x + kDx[k], u.y + kDy[k]};
      if (!tra.is_traversable(v)) continue;
      const bool diagonal = k >= 4;
      if (diagonal && !(tra.is_traversable({v.x, u.y}) && tra.is_traversable({u.x, v.y}))) continue;
      const std::size_t vi = g.index(v);
      if (closed[vi]) continue;
      const StepCost gv = gu + (diagonal ? StepCost{0, 1} : StepCost{1, 0});
      if (seen[vi] && !(gv.value() < best[vi].value())) continue;
      seen[vi] = 1;
      best[vi] = gv;
      parent[vi] = top.index;
      const double h = octile(v, to);
      open.push({gv.value() + h, h, vi});
    }
  }
  if (!closed[goal]) {
    fail(ErrorCode::kUnreachable, "no path from (" + std::to_string(from.x) + "," +
                                      std::to_string(from.y) + ") to (" + std::to_string(to.x) +
                                      "," + std::to_string(to.y) + ")");
  }
  GridPath path;
  path.cost = best[goal];
  for (std::size_t i = goal; i != kNone; i = parent[i]) path.cells.push_back(g.cell_at(i));
  std::reverse(path.cells.begin(), path.cells.end());
  return path;
}

MetricPath realize_metric_path(const TopologicalPath& topo, const TopoGraph& graph,
                               const TraversabilityMap& tra) {
  if (topo.nodes.empty()) fail(ErrorCode::kInvalidArgument, "empty topological path");
  std::vector<std::size_t> ids;
  for (const auto& name : topo.nodes) {
    const auto id = graph.find_node(name);
    if (!id) fail(ErrorCode::kUnknownRoom, "room '" + name + "' is not in the graph");
    ids.push_back(*id);
  }

  MetricPath out;
  out.path_id = topo.path_id;
  out.nodes = topo.nodes;
  out.cells.push_back(graph.nodes[ids.front()].center);
  for (std::size_t i = 1; i < ids.size(); ++i) {
    const TopoNode& a = graph.nodes[ids[i - 1]];
    const TopoNode& b = graph.nodes[ids[i]];
    GridPath segment;
    try {
      segment = astar(tra, a.center, b.center);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kUnreachable && e.code() != ErrorCode::kNotTraversable) throw;
      fail(ErrorCode::kSegmentUnreachable, a.room_name + " -> " + b.room_name + " (" + e.detail() + ")");
    }
    out.cells.insert(out.cells.end(), segment.cells.begin() + 1, segment.cells.end());
    out.steps = out.steps + segment.cost;
  }
  out.cell_length = out.steps.value();
  out.world_length = out.cell_length * tra.geometry.resolution;
  return out;
}

void write_path_records(std::ostream& out, std::span<const MetricPath> paths, bool with_cells) {
  out << "PANAV-PATHS v1\n";
  for (const auto& p : paths) {
    out << "PATH " << p.path_id << " nodes=";
    for (std::size_t i = 0; i < p.nodes.size(); ++i) out << (i ? "," : "") << p.nodes[i];
    out << " cells=" << p.cells.size() << " cell_length=" << text::format_double(p.cell_length)
        << " world_length=" << text::format_double(p.world_length) << '\n';
    if (with_cells) {
      out << "CELLS";
      for (const auto& c : p.cells) out << ' ' << c.x << ',' << c.y;
      out << '\n';
    }
  }
}

}  // namespace panav
