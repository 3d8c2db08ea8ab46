#include "panav/grid_maps.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <string>
#include <utility>

#include "panav/error.hpp"
#include "panav/image.hpp"
#include "panav/text_io.hpp"

namespace panav {

std::optional<Cell> GridGeometry::cell_of(double x, double y) const {
  const double fx = std::floor((x - origin_x) / resolution);
  const double fy = std::floor((y - origin_y) / resolution);
  if (!(fx >= 0.0 && fy >= 0.0 && fx < width && fy < height)) return std::nullopt;
  return Cell{static_cast<int>(fx), static_cast<int>(fy)};
}

std::array<double, 2> GridGeometry::cell_center(Cell c) const {
  return {origin_x + (c.x + 0.5) * resolution, origin_y + (c.y + 0.5) * resolution};
}

std::size_t TraversabilityMap::traversable_count() const {
  return static_cast<std::size_t>(std::count(traversable.begin(), traversable.end(), 1));
}

std::vector<std::string> RoomMask::claims(Cell c) const {
  std::vector<std::string> out;
  const std::size_t i = geometry.index(c);
  for (auto k = claim_offsets[i]; k < claim_offsets[i + 1]; ++k) {
    out.push_back(room_names[claim_rooms[k]]);
  }
  return out;
}

std::size_t RoomMask::masked_count() const {
  return static_cast<std::size_t>(std::count(masked.begin(), masked.end(), 1));
}

double scene_floor_z(const SceneSet& scene) {
  std::vector<double> z;
  z.reserve(scene.point_count());
  for (const auto& room : scene.rooms) {
    for (const auto& p : room.points) z.push_back(p.z);
  }
  if (z.empty()) fail(ErrorCode::kInvalidArgument, "scene has no points");
  const auto k = static_cast<std::size_t>(std::floor(0.01 * static_cast<double>(z.size() - 1)));
  std::nth_element(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(k), z.end());
  return z[k];
}

CeilingFilter::CeilingFilter(const SceneSet& scene, CeilingPolicy policy)
    : kind_(policy.kind), floor_z_(scene_floor_z(scene)), cut_z_(0.0) {
  if (kind_ == CeilingPolicy::Kind::kAuto) {
    kind_ = scene.has_labels() ? CeilingPolicy::Kind::kByLabel : CeilingPolicy::Kind::kByHeightCut;
  }
  if (kind_ == CeilingPolicy::Kind::kByHeightCut) {
    if (!(policy.fraction > 0.0 && policy.fraction <= 1.0)) {
      fail(ErrorCode::kInvalidArgument, "height-cut fraction must be in (0, 1]");
    }
    double max_z = -std::numeric_limits<double>::infinity();
    for (const auto& room : scene.rooms) {
      for (const auto& p : room.points) max_z = std::max(max_z, p.z);
    }
    cut_z_ = floor_z_ + policy.fraction * (max_z - floor_z_);
  }
}

bool CeilingFilter::retains(const LabeledPoint& p) const {
  if (kind_ == CeilingPolicy::Kind::kByLabel) return p.semantic_class != SemanticClass::kCeiling;
  return p.z <= cut_z_;
}

TopViewMap build_top_view(const SceneSet& scene, double resolution, CeilingPolicy policy) {
  if (scene.rooms.empty()) fail(ErrorCode::kInvalidArgument, "scene has no rooms");
  if (!(resolution > 0.005 && resolution <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, "resolution must be in (0.005, 1.0] m");
  }
  const CeilingFilter filter(scene, policy);

  double min_x = std::numeric_limits<double>::infinity();
  double min_y = min_x;
  double max_x = -min_x;
  double max_y = -min_x;
  std::size_t retained = 0;
  for (const auto& room : scene.rooms) {
    for (const auto& p : room.points) {
      if (!filter.retains(p)) continue;
      ++retained;
      min_x = std::min(min_x, p.x);
      min_y = std::min(min_y, p.y);
      max_x = std::max(max_x, p.x);
      max_y = std::max(max_y, p.y);
    }
  }
  if (retained == 0) fail(ErrorCode::kEmptyAfterFilter, "ceiling policy removed every point");

  // One padding cell on each side of the tight extent.
  auto cells_for = [resolution](double extent) {
    return static_cast<int>(std::ceil(extent / resolution - 1e-6)) + 2;
  };
  TopViewMap top;
  top.geometry = GridGeometry{min_x - resolution, min_y - resolution, resolution,
                              cells_for(max_x - min_x), cells_for(max_y - min_y)};
  const std::size_t n = top.geometry.cell_count();
  top.occupied.assign(n, 0);
  top.height.assign(n, 0.0);
  top.color.assign(n, {0, 0, 0});

  for (const auto& room : scene.rooms) {
    for (const auto& p : room.points) {
      if (!filter.retains(p)) continue;
      const auto cell = top.geometry.cell_of(p.x, p.y);
      if (!cell) continue;  // unreachable by construction
      const std::size_t i = top.geometry.index(*cell);
      // Strict comparison keeps the first point among equal heights.
      if (!top.occupied[i] || p.z > top.height[i]) {
        top.occupied[i] = 1;
        top.height[i] = p.z;
        top.color[i] = {p.r, p.g, p.b};
      }
    }
  }
  return top;
}

TraversabilityMap build_traversability(const SceneSet& scene, const GridGeometry& geometry,
                                       CeilingPolicy policy, HeightBands bands) {
  if (!(bands.obstacle_low <= bands.obstacle_high) || !(bands.floor_band >= 0.0)) {
    fail(ErrorCode::kInvalidArgument, "invalid height bands");
  }
  const CeilingFilter filter(scene, policy);
  const double floor_top = filter.floor_z() + bands.floor_band;
  const double obstacle_lo = filter.floor_z() + bands.obstacle_low;
  const double obstacle_hi = filter.floor_z() + bands.obstacle_high;

  const std::size_t n = geometry.cell_count();
  std::vector<std::uint8_t> has_floor(n, 0);
  std::vector<std::uint8_t> has_obstacle(n, 0);
  for (const auto& room : scene.rooms) {
    for (const auto& p : room.points) {
      if (!filter.retains(p)) continue;
      const auto cell = geometry.cell_of(p.x, p.y);
      if (!cell) {
        fail(ErrorCode::kGeometryMismatch,
             "point of " + room.name + " falls outside the grid; geometry was not built from this scene");
      }
      const std::size_t i = geometry.index(*cell);
      if (p.z <= floor_top) has_floor[i] = 1;
      if (p.z >= obstacle_lo && p.z <= obstacle_hi) has_obstacle[i] = 1;
    }
  }

  TraversabilityMap tra;
  tra.geometry = geometry;
  tra.traversable.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    tra.traversable[i] = (has_floor[i] && !has_obstacle[i]) ? 1 : 0;
  }
  return tra;
}

RoomMask build_room_mask(const SceneSet& scene, const GridGeometry& geometry,
                         const std::set<RoomCategory>& categories) {
  if (categories.empty()) fail(ErrorCode::kInvalidArgument, "mask category set is empty");
  if (scene.rooms.size() > std::numeric_limits<std::uint16_t>::max()) {
    fail(ErrorCode::kInvalidArgument, "too many rooms for a mask");
  }
  RoomMask mask;
  mask.geometry = geometry;
  const std::size_t n = geometry.cell_count();
  mask.masked.assign(n, 0);

  std::vector<std::pair<std::uint32_t, std::uint16_t>> claims;
  std::size_t inside = 0;
  for (std::size_t r = 0; r < scene.rooms.size(); ++r) {
    const Room& room = scene.rooms[r];
    mask.room_names.push_back(room.name);
    const bool selected = categories.count(room.category) != 0;
    for (const auto& p : room.points) {
      const auto cell = geometry.cell_of(p.x, p.y);
      if (!cell) continue;  // e.g. ceiling overhang beyond the retained extent
      ++inside;
      const std::size_t i = geometry.index(*cell);
      claims.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint16_t>(r));
      if (selected) mask.masked[i] = 1;
    }
  }
  if (inside == 0) fail(ErrorCode::kGeometryMismatch, "no scene point falls inside the grid");

  std::sort(claims.begin(), claims.end());
  claims.erase(std::unique(claims.begin(), claims.end()), claims.end());
  mask.claim_offsets.assign(n + 1, 0);
  mask.claim_rooms.reserve(claims.size());
  for (const auto& [cell, room] : claims) {
    ++mask.claim_offsets[cell + 1];
    mask.claim_rooms.push_back(room);
  }
  for (std::size_t i = 0; i < n; ++i) mask.claim_offsets[i + 1] += mask.claim_offsets[i];
  return mask;
}

TraversabilityMap inflate_obstacles(const TraversabilityMap& tra, int radius_cells) {
  if (radius_cells < 0) fail(ErrorCode::kInvalidArgument, "inflation radius must be >= 0");
  if (radius_cells == 0) return tra;
  const GridGeometry& g = tra.geometry;
  std::vector<Cell> disk;
  for (int dy = -radius_cells; dy <= radius_cells; ++dy) {
    for (int dx = -radius_cells; dx <= radius_cells; ++dx) {
      if (dx * dx + dy * dy <= radius_cells * radius_cells) disk.push_back({dx, dy});
    }
  }
  TraversabilityMap out = tra;
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      if (tra.is_traversable({x, y})) continue;
      // Only obstacles bordering free space can change anything.
      bool border = false;
      for (Cell d : {Cell{1, 0}, Cell{-1, 0}, Cell{0, 1}, Cell{0, -1}}) {
        if (tra.is_traversable({x + d.x, y + d.y})) border = true;
      }
      if (!border) continue;
      for (Cell d : disk) {
        const Cell c{x + d.x, y + d.y};
        if (g.contains(c)) out.traversable[g.index(c)] = 0;
      }
    }
  }
  return out;
}

void write_traversability_pgm(const std::filesystem::path& file, const TraversabilityMap& tra) {
  const GridGeometry& g = tra.geometry;
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIoFailure, "cannot write " + file.string());
  out << "P5\n" << g.width << ' ' << g.height << "\n255\n";
  std::vector<char> row(static_cast<std::size_t>(g.width));
  for (int y = g.height - 1; y >= 0; --y) {
    for (int x = 0; x < g.width; ++x) {
      row[static_cast<std::size_t>(x)] = tra.is_traversable({x, y}) ? char(255) : char(0);
    }
    out.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
  if (!out) fail(ErrorCode::kIoFailure, "write failed for " + file.string());
}

void write_top_view_png(const std::filesystem::path& file, const TopViewMap& top) {
  const GridGeometry& g = top.geometry;
  RgbImage image(g.width, g.height, {255, 255, 255});
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      const std::size_t i = g.index({x, y});
      if (top.occupied[i]) image.set(x, g.height - 1 - y, top.color[i]);
    }
  }
  write_bytes(file, encode_png(image));
}

void write_geometry_meta(const std::filesystem::path& file, const GridGeometry& geometry) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIoFailure, "cannot write " + file.string());
  out << "format=panav-grid-v1\n"
      << "origin_x=" << text::format_double(geometry.origin_x) << '\n'
      << "origin_y=" << text::format_double(geometry.origin_y) << '\n'
      << "resolution=" << text::format_double(geometry.resolution) << '\n'
      << "width=" << geometry.width << '\n'
      << "height=" << geometry.height << '\n'
      << "row_order=top_down\n";
  if (!out) fail(ErrorCode::kIoFailure, "write failed for " + file.string());
}

GridGeometry read_geometry_meta(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) fail(ErrorCode::kIoFailure, "cannot open " + file.string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto get_double = [&](const char* key) {
    auto v = kv.count(key) ? text::parse_double(kv[key]) : std::nullopt;
    if (!v) fail(ErrorCode::kInvalidArgument, std::string("grid metadata lacks ") + key);
    return *v;
  };
  auto get_int = [&](const char* key) {
    auto v = kv.count(key) ? text::parse_int<int>(kv[key]) : std::nullopt;
    if (!v || *v < 1) fail(ErrorCode::kInvalidArgument, std::string("grid metadata lacks ") + key);
    return *v;
  };
  return GridGeometry{get_double("origin_x"), get_double("origin_y"), get_double("resolution"),
                      get_int("width"), get_int("height")};
}

}  // namespace panav
