#include "panav/topo_graph.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <memory>
#include <numeric>
#include <ostream>
#include <set>
#include <tuple>

#include "panav/error.hpp"
#include "panav/text_io.hpp"

namespace panav {

namespace {

constexpr std::string_view kGraphMagic = "PANAV-GRAPH v1";

double squared_distance(const LabeledPoint& p, const LabeledPoint& q) {
  const double dx = p.x - q.x;
  const double dy = p.y - q.y;
  const double dz = p.z - q.z;
  return dx * dx + dy * dy + dz * dz;
}

double coord(const LabeledPoint& p, int axis) { return axis == 0 ? p.x : (axis == 1 ? p.y : p.z); }

// Balanced, implicit k-d tree: the node for range [lo, hi) is the median element,
// split on the axis of widest spread.
class KdTree {
 public:
  explicit KdTree(const std::vector<LabeledPoint>& points) : points_(points) {
    order_.resize(points.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    axis_.assign(points.size(), 0);
    build(0, order_.size());
  }

  /// Smallest squared distance from q to the tree's points, or `bound` if none is smaller.
  double nearest_squared(const LabeledPoint& q, double bound) const {
    search(q, 0, order_.size(), bound);
    return bound;
  }

 private:
  static constexpr std::size_t kLeaf = 8;

  void build(std::size_t lo, std::size_t hi) {
    if (hi - lo <= kLeaf) return;
    std::array<double, 3> mn{}, mx{};
    mn.fill(std::numeric_limits<double>::infinity());
    mx.fill(-std::numeric_limits<double>::infinity());
    for (std::size_t i = lo; i < hi; ++i) {
      for (int a = 0; a < 3; ++a) {
        const double v = coord(points_[order_[i]], a);
        mn[a] = std::min(mn[a], v);
        mx[a] = std::max(mx[a], v);
      }
    }
    int axis = 0;
    for (int a = 1; a < 3; ++a) {
      if (mx[a] - mn[a] > mx[axis] - mn[axis]) axis = a;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(lo),
                     order_.begin() + static_cast<std::ptrdiff_t>(mid),
                     order_.begin() + static_cast<std::ptrdiff_t>(hi),
                     [&](std::size_t i, std::size_t j) {
                       return coord(points_[i], axis) < coord(points_[j], axis);
                     });
    axis_[mid] = axis;
    build(lo, mid);
    build(mid + 1, hi);
  }

  void search(const LabeledPoint& q, std::size_t lo, std::size_t hi, double& best) const {
    if (hi - lo <= kLeaf) {
      for (std::size_t i = lo; i < hi; ++i) best = std::min(best, squared_distance(q, points_[order_[i]]));
      return;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    const LabeledPoint& p = points_[order_[mid]];
    best = std::min(best, squared_distance(q, p));
    const int axis = axis_[mid];
    const double diff = coord(q, axis) - coord(p, axis);
    const bool left_first = diff < 0.0;
    if (left_first) {
      search(q, lo, mid, best);
      if (diff * diff < best) search(q, mid + 1, hi, best);
    } else {
      search(q, mid + 1, hi, best);
      if (diff * diff < best) search(q, lo, mid, best);
    }
  }

  const std::vector<LabeledPoint>& points_;
  std::vector<std::size_t> order_;
  std::vector<int> axis_;
};

struct Box {
  std::array<double, 3> lo{}, hi{};
};

Box bounding_box(const Room& room) {
  Box box;
  box.lo.fill(std::numeric_limits<double>::infinity());
  box.hi.fill(-std::numeric_limits<double>::infinity());
  for (const auto& p : room.points) {
    for (int a = 0; a < 3; ++a) {
      box.lo[a] = std::min(box.lo[a], coord(p, a));
      box.hi[a] = std::max(box.hi[a], coord(p, a));
    }
  }
  return box;
}

double box_gap_squared(const Box& a, const Box& b) {
  double s = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double gap = std::max({0.0, a.lo[k] - b.hi[k], b.lo[k] - a.hi[k]});
    s += gap * gap;
  }
  return s;
}

double point_box_gap_squared(const LabeledPoint& p, const Box& b) {
  double s = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double v = coord(p, k);
    const double gap = std::max({0.0, b.lo[k] - v, v - b.hi[k]});
    s += gap * gap;
  }
  return s;
}

// Minimum squared distance between `queries` and the points of `tree`.
double min_squared(const std::vector<LabeledPoint>& queries, const KdTree& tree, const Box& tree_box) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& q : queries) {
    if (point_box_gap_squared(q, tree_box) >= best) continue;
    best = tree.nearest_squared(q, best);
    if (best == 0.0) break;
  }
  return best;
}

}  // namespace

std::optional<std::size_t> TopoGraph::find_node(std::string_view room_name) const {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].room_name == room_name) return i;
  }
  return std::nullopt;
}

const TopoEdge* TopoGraph::edge_between(std::size_t a, std::size_t b) const {
  if (a > b) std::swap(a, b);
  for (const auto& e : edges) {
    if (e.a == a && e.b == b) return &e;
  }
  return nullptr;
}

std::vector<std::vector<std::size_t>> TopoGraph::adjacency() const {
  std::vector<std::vector<std::size_t>> adj(nodes.size());
  for (const auto& e : edges) {
    adj[e.a].push_back(e.b);
    adj[e.b].push_back(e.a);
  }
  for (auto& list : adj) std::sort(list.begin(), list.end());
  return adj;
}

double min_room_distance(const Room& a, const Room& b) {
  if (a.points.empty() || b.points.empty()) {
    fail(ErrorCode::kEmptyRoom, "cannot measure distance to an empty room");
  }
  const Room& big = a.points.size() >= b.points.size() ? a : b;
  const Room& small = &big == &a ? b : a;
  const KdTree tree(big.points);
  return std::sqrt(min_squared(small.points, tree, bounding_box(big)));
}

std::optional<Cell> nearest_traversable(const TraversabilityMap& tra, Cell target, Cell lo, Cell hi) {
  std::optional<Cell> best;
  long long best_d2 = std::numeric_limits<long long>::max();
  for (int y = std::max(lo.y, 0); y <= std::min(hi.y, tra.geometry.height - 1); ++y) {
    for (int x = std::max(lo.x, 0); x <= std::min(hi.x, tra.geometry.width - 1); ++x) {
      if (!tra.traversable[tra.geometry.index({x, y})]) continue;
      const long long dx = x - target.x;
      const long long dy = y - target.y;
      const long long d2 = dx * dx + dy * dy;
      if (d2 < best_d2) {  // row-major scan keeps the first of equals
        best_d2 = d2;
        best = Cell{x, y};
      }
    }
  }
  return best;
}

TopoGraph build_topology(const SceneSet& scene, const TraversabilityMap& tra,
                         double adjacency_threshold) {
  if (!(adjacency_threshold > 0.0)) {
    fail(ErrorCode::kInvalidArgument, "adjacency threshold must be positive");
  }
  const GridGeometry& g = tra.geometry;
  TopoGraph graph;
  std::vector<Box> boxes;
  for (const auto& room : scene.rooms) {
    if (room.points.empty()) fail(ErrorCode::kEmptyRoom, room.name + " has no points");
    boxes.push_back(bounding_box(room));

    double sx = 0.0;
    double sy = 0.0;
    for (const auto& p : room.points) {
      sx += p.x;
      sy += p.y;
    }
    const double n = static_cast<double>(room.points.size());
    const double cx = sx / n;
    const double cy = sy / n;
    auto to_cell = [&](double x, double y) {
      return Cell{static_cast<int>(std::floor((x - g.origin_x) / g.resolution)),
                  static_cast<int>(std::floor((y - g.origin_y) / g.resolution))};
    };
    const Box& box = boxes.back();
    const auto center = nearest_traversable(tra, to_cell(cx, cy), to_cell(box.lo[0] - 1.0, box.lo[1] - 1.0),
                                            to_cell(box.hi[0] + 1.0, box.hi[1] + 1.0));
    if (!center) {
      fail(ErrorCode::kNoTraversableCenter, "no traversable cell within 1 m of " + room.name);
    }
    graph.nodes.push_back(TopoNode{room.name, room.category, *center});
  }

  std::vector<std::unique_ptr<KdTree>> trees(scene.rooms.size());
  auto tree_of = [&](std::size_t i) -> const KdTree& {
    if (!trees[i]) trees[i] = std::make_unique<KdTree>(scene.rooms[i].points);
    return *trees[i];
  };
  const double threshold_sq = adjacency_threshold * adjacency_threshold;
  for (std::size_t i = 0; i < scene.rooms.size(); ++i) {
    for (std::size_t j = i + 1; j < scene.rooms.size(); ++j) {
      const bool hallway_incident = scene.rooms[i].category == RoomCategory::kHallway ||
                                    scene.rooms[j].category == RoomCategory::kHallway;
      if (!hallway_incident) continue;
      if (box_gap_squared(boxes[i], boxes[j]) > threshold_sq) continue;
      const bool i_big = scene.rooms[i].points.size() >= scene.rooms[j].points.size();
      const std::size_t big = i_big ? i : j;
      const std::size_t small = i_big ? j : i;
      const double d2 = min_squared(scene.rooms[small].points, tree_of(big), boxes[big]);
      if (d2 > threshold_sq) continue;
      const auto ca = g.cell_center(graph.nodes[i].center);
      const auto cb = g.cell_center(graph.nodes[j].center);
      graph.edges.push_back(
          TopoEdge{i, j, std::sqrt(d2), std::hypot(ca[0] - cb[0], ca[1] - cb[1])});
    }
  }
  return graph;
}

void write_graph(std::ostream& out, const TopoGraph& graph) {
  out << kGraphMagic << '\n' << "NODES " << graph.nodes.size() << '\n';
  for (const auto& n : graph.nodes) {
    out << n.room_name << ' ' << to_string(n.category) << ' ' << n.center.x << ' ' << n.center.y
        << '\n';
  }
  out << "EDGES " << graph.edges.size() << '\n';
  for (const auto& e : graph.edges) {
    out << graph.nodes[e.a].room_name << ' ' << graph.nodes[e.b].room_name << ' '
        << text::format_double(e.clearance) << ' ' << text::format_double(e.length) << '\n';
  }
}

TopoGraph read_graph(std::istream& in) {
  std::size_t line_no = 0;
  std::string line;
  auto bad = [&](const std::string& what) {
    fail(ErrorCode::kMalformedGraph, "line " + std::to_string(line_no) + ": " + what);
  };
  auto next = [&]() -> std::vector<std::string_view> {
    if (!std::getline(in, line)) bad("unexpected end of file");
    ++line_no;
    return text::split_ws(line);
  };

  if (!std::getline(in, line) || (++line_no, line != kGraphMagic)) bad("missing header");
  TopoGraph graph;
  auto head = next();
  std::optional<std::size_t> count;
  if (head.size() != 2 || head[0] != "NODES" || !(count = text::parse_int<std::size_t>(head[1]))) {
    bad("expected 'NODES <n>'");
  }
  for (std::size_t i = 0; i < *count; ++i) {
    auto f = next();
    if (f.size() != 4) bad("node record needs 4 fields");
    auto category = parse_room_category(f[1]);
    auto x = text::parse_int<int>(f[2]);
    auto y = text::parse_int<int>(f[3]);
    if (!category || !x || !y) bad("malformed node record");
    if (!graph.nodes.empty() && !(graph.nodes.back().room_name < f[0])) bad("nodes not sorted/unique");
    graph.nodes.push_back(TopoNode{std::string(f[0]), *category, Cell{*x, *y}});
  }
  head = next();
  if (head.size() != 2 || head[0] != "EDGES" || !(count = text::parse_int<std::size_t>(head[1]))) {
    bad("expected 'EDGES <m>'");
  }
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (std::size_t i = 0; i < *count; ++i) {
    auto f = next();
    if (f.size() != 4) bad("edge record needs 4 fields");
    auto a = graph.find_node(f[0]);
    auto b = graph.find_node(f[1]);
    auto clearance = text::parse_double(f[2]);
    auto length = text::parse_double(f[3]);
    if (!a || !b || !clearance || !length) bad("malformed edge record");
    if (*a == *b) bad("self edge");
    if (graph.nodes[*a].category != RoomCategory::kHallway &&
        graph.nodes[*b].category != RoomCategory::kHallway) {
      bad("edge is not hallway-incident");
    }
    TopoEdge e{std::min(*a, *b), std::max(*a, *b), *clearance, *length};
    if (!seen.insert({e.a, e.b}).second) bad("duplicate edge");
    graph.edges.push_back(e);
  }
  std::sort(graph.edges.begin(), graph.edges.end(),
            [](const TopoEdge& l, const TopoEdge& r) { return std::tie(l.a, l.b) < std::tie(r.a, r.b); });
  return graph;
}

void write_graph_file(const std::filesystem::path& file, const TopoGraph& graph) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIoFailure, "cannot write " + file.string());
  write_graph(out, graph);
  if (!out) fail(ErrorCode::kIoFailure, "write failed for " + file.string());
}

TopoGraph read_graph_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) fail(ErrorCode::kIoFailure, "cannot open " + file.string());
  return read_graph(in);
}

}  // namespace panav
