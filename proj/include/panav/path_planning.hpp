#pragma once

#include <numbers>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "panav/grid_maps.hpp"
#include "panav/topo_graph.hpp"

namespace panav {

struct TopologicalPath {
  std::vector<std::string> nodes;
  double topo_length = 0.0;  // sum of edge lengths (m)
  int path_id = -1;          // assigned by filter_candidates

  friend bool operator==(const TopologicalPath&, const TopologicalPath&) = default;
};

/// Grid path cost as step counts. Keeping the counts exact makes costs of equal
/// routes bit-identical regardless of summation order.
struct StepCost {
  std::int64_t axis = 0;
  std::int64_t diagonal = 0;

  double value() const { return static_cast<double>(axis) + static_cast<double>(diagonal) * std::numbers::sqrt2; }
  StepCost operator+(const StepCost& o) const { return {axis + o.axis, diagonal + o.diagonal}; }
  friend bool operator==(const StepCost&, const StepCost&) = default;
};

struct GridPath {
  std::vector<Cell> cells;
  StepCost cost;
};

struct MetricPath {
  int path_id = -1;
  std::vector<std::string> nodes;
  std::vector<Cell> cells;
  StepCost steps;
  double cell_length = 0.0;   // steps.value()
  double world_length = 0.0;  // cell_length * resolution
};

struct EnumerateOptions {
  /// Skip branches through non-hallway rooms. The result equals the unrestricted
  /// enumeration after filter rule (1), without the exponential detours.
  bool hallway_intermediates_only = false;
};

/// Every simple path from start to goal, ordered lexicographically by room names.
std::vector<TopologicalPath> enumerate_simple_paths(const TopoGraph& graph, const std::string& start,
                                                    const std::string& goal,
                                                    EnumerateOptions options = {});

/// (1) drop paths with a non-hallway intermediate room, (2) drop paths whose room set
/// strictly contains another survivor's, (3) keep the k shortest by topo_length
/// (ties by room sequence) and number them 0..n-1.
std::vector<TopologicalPath> filter_candidates(std::vector<TopologicalPath> paths, std::size_t k);

/// Cost of a cell sequence; throws kInvalidArgument if two consecutive cells are not 8-adjacent.
StepCost path_step_cost(std::span<const Cell> cells);

/// 8-connected A* with octile heuristic. A diagonal step needs both orthogonal
/// neighbors free. Ties: lower f, then lower h, then row-major cell order.
GridPath astar(const TraversabilityMap& tra, Cell from, Cell to);

/// Joins A* segments between consecutive node centers; junction cells appear once.
MetricPath realize_metric_path(const TopologicalPath& topo, const TopoGraph& graph,
                               const TraversabilityMap& tra);

/// "PANAV-PATHS v1": one PATH record per path, optionally followed by a CELLS line.
void write_path_records(std::ostream& out, std::span<const MetricPath> paths, bool with_cells);

}  // namespace panav
