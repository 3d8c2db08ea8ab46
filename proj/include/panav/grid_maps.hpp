#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "panav/scene.hpp"

namespace panav {

/// Integer grid coordinate; x is the column, y the row. Row 0 is the lowest world y.
struct Cell {
  int x = 0;
  int y = 0;

  friend bool operator==(const Cell&, const Cell&) = default;
  /// Row-major order.
  friend bool operator<(const Cell& a, const Cell& b) {
    return a.y != b.y ? a.y < b.y : a.x < b.x;
  }
};

struct GridGeometry {
  double origin_x = 0.0;  // world x of the (0,0) corner
  double origin_y = 0.0;
  double resolution = 0.05;  // meters per cell
  int width = 1;
  int height = 1;

  std::size_t cell_count() const { return static_cast<std::size_t>(width) * height; }
  bool contains(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width && c.y < height; }
  std::size_t index(Cell c) const { return static_cast<std::size_t>(c.y) * width + c.x; }
  Cell cell_at(std::size_t index) const {
    return Cell{static_cast<int>(index % width), static_cast<int>(index / width)};
  }
  /// Cell holding a world point; nullopt when out of bounds.
  std::optional<Cell> cell_of(double x, double y) const;
  std::array<double, 2> cell_center(Cell c) const;

  friend bool operator==(const GridGeometry&, const GridGeometry&) = default;
};

struct CeilingPolicy {
  enum class Kind { kAuto, kByLabel, kByHeightCut };
  Kind kind = Kind::kAuto;
  double fraction = 0.85;  // by-height-cut: keep z <= floor_z + fraction * (max_z - floor_z)

  static CeilingPolicy by_label() { return {Kind::kByLabel, 0.85}; }
  static CeilingPolicy by_height_cut(double f) { return {Kind::kByHeightCut, f}; }
};

struct TopViewMap {
  GridGeometry geometry;
  std::vector<std::uint8_t> occupied;
  std::vector<double> height;  // meaningful only where occupied
  std::vector<std::array<std::uint8_t, 3>> color;

  bool is_occupied(Cell c) const { return occupied[geometry.index(c)] != 0; }
};

struct TraversabilityMap {
  GridGeometry geometry;
  std::vector<std::uint8_t> traversable;

  bool is_traversable(Cell c) const {
    return geometry.contains(c) && traversable[geometry.index(c)] != 0;
  }
  std::size_t traversable_count() const;
};

/// Per-cell claims (which rooms project a point into the cell) and the subset of
/// cells claimed by a room of the selected categories.
struct RoomMask {
  GridGeometry geometry;
  std::vector<std::string> room_names;  // index space for claims
  std::vector<std::uint32_t> claim_offsets;  // CSR, size cell_count + 1
  std::vector<std::uint16_t> claim_rooms;
  std::vector<std::uint8_t> masked;

  bool is_masked(Cell c) const { return masked[geometry.index(c)] != 0; }
  std::vector<std::string> claims(Cell c) const;
  std::size_t masked_count() const;
};

/// Scene-level height reference: the 1st percentile of all point heights.
double scene_floor_z(const SceneSet& scene);

/// Concrete ceiling filter for a scene (kAuto resolves to by-label when any point is
/// labeled, else by-height-cut with the policy's fraction).
class CeilingFilter {
 public:
  CeilingFilter(const SceneSet& scene, CeilingPolicy policy);
  bool retains(const LabeledPoint& p) const;
  double floor_z() const { return floor_z_; }
  CeilingPolicy::Kind resolved_kind() const { return kind_; }

 private:
  CeilingPolicy::Kind kind_;
  double floor_z_;
  double cut_z_;
};

TopViewMap build_top_view(const SceneSet& scene, double resolution,
                          CeilingPolicy policy = CeilingPolicy{});

struct HeightBands {
  double floor_band = 0.2;
  double obstacle_low = 0.3;
  double obstacle_high = 1.8;
};

TraversabilityMap build_traversability(const SceneSet& scene, const GridGeometry& geometry,
                                       CeilingPolicy policy = CeilingPolicy{},
                                       HeightBands bands = HeightBands{});

RoomMask build_room_mask(const SceneSet& scene, const GridGeometry& geometry,
                         const std::set<RoomCategory>& categories);

/// Grows every obstacle by a disk of `radius_cells`; radius 0 returns the input.
TraversabilityMap inflate_obstacles(const TraversabilityMap& tra, int radius_cells);

// ---------------------------------------------------------------------------
// Export. Rasters are written top row first (highest world y at the top).

void write_traversability_pgm(const std::filesystem::path& file, const TraversabilityMap& tra);
void write_top_view_png(const std::filesystem::path& file, const TopViewMap& top);
void write_geometry_meta(const std::filesystem::path& file, const GridGeometry& geometry);
GridGeometry read_geometry_meta(const std::filesystem::path& file);

}  // namespace panav
