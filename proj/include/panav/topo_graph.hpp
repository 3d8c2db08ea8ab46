#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "panav/grid_maps.hpp"
#include "panav/scene.hpp"

namespace panav {

struct TopoNode {
  std::string room_name;
  RoomCategory category = RoomCategory::kOther;
  Cell center;  // traversable cell of the paired TraversabilityMap

  friend bool operator==(const TopoNode&, const TopoNode&) = default;
};

/// Undirected edge; a < b index into TopoGraph::nodes.
struct TopoEdge {
  std::size_t a = 0;
  std::size_t b = 0;
  double clearance = 0.0;  // minimum inter-room point distance (m)
  double length = 0.0;     // distance between node centers (m)

  friend bool operator==(const TopoEdge&, const TopoEdge&) = default;
};

struct TopoGraph {
  std::vector<TopoNode> nodes;  // sorted by room name
  std::vector<TopoEdge> edges;  // sorted by (a, b)

  std::optional<std::size_t> find_node(std::string_view room_name) const;
  const TopoEdge* edge_between(std::size_t a, std::size_t b) const;
  /// Neighbor indices of every node, each list ascending.
  std::vector<std::vector<std::size_t>> adjacency() const;

  friend bool operator==(const TopoGraph&, const TopoGraph&) = default;
};

/// Exact minimum 3D distance over all point pairs. Throws kEmptyRoom.
double min_room_distance(const Room& a, const Room& b);

/// Nearest traversable cell to `target` (Euclidean cell distance, row-major tie-break)
/// within the inclusive window [lo, hi]. nullopt when the window has none.
std::optional<Cell> nearest_traversable(const TraversabilityMap& tra, Cell target, Cell lo, Cell hi);

TopoGraph build_topology(const SceneSet& scene, const TraversabilityMap& tra,
                         double adjacency_threshold = 0.5);

/// "PANAV-GRAPH v1" text format.
void write_graph(std::ostream& out, const TopoGraph& graph);
TopoGraph read_graph(std::istream& in);
void write_graph_file(const std::filesystem::path& file, const TopoGraph& graph);
TopoGraph read_graph_file(const std::filesystem::path& file);

}  // namespace panav
