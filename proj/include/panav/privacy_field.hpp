#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "panav/grid_maps.hpp"
#include "panav/path_planning.hpp"

namespace panav {

/// Distances in cell units; +inf where no value is defined.
struct DistanceField {
  GridGeometry geometry;
  std::vector<double> values;

  double at(Cell c) const { return values[geometry.index(c)]; }
};

enum class FieldMode {
  kFarPeak,      // exp(-(D - mu)^2 / (2 sigma^2)): peaks where D is largest
  kRiskInverted,  // exp(-D^2 / (2 sigma^2)): peaks on the sources
};

std::string_view to_string(FieldMode mode);
std::optional<FieldMode> parse_field_mode(std::string_view token);

struct PrivacyField {
  GridGeometry geometry;
  std::vector<double> values;  // in [0, 1]
  double mu = 0.0;
  double sigma = 0.0;
  double sigma_d = 0.0;
  FieldMode mode = FieldMode::kRiskInverted;

  double at(Cell c) const { return values[geometry.index(c)]; }
};

struct RiskScore {
  int path_id = -1;
  double risk = 0.0;
  double world_length = 0.0;
  double cell_length = 0.0;
};

/// First-order upwind eikonal solve (|grad D| = 1, unit cell spacing) by fast marching.
/// Sources hold 0 and traversable 4-neighbors of sources hold exactly 1; the front
/// only advances through traversable cells. Sources may be non-traversable.
DistanceField fmm_distance(const TraversabilityMap& tra, std::span<const Cell> sources);

/// Brute-force Euclidean distance from every cell center to the nearest source
/// center, ignoring obstacles. O(cells * sources); meant for verification.
DistanceField exact_distance_oracle(const TraversabilityMap& tra, std::span<const Cell> sources);

/// Source cells of the risk field: every cell the room mask selects.
std::vector<Cell> mask_sources(const RoomMask& mask);

PrivacyField gaussian_modulate(const DistanceField& d, double sigma_d, FieldMode mode);

/// Sum of field values along the path after collapsing consecutive repeats.
RiskScore path_risk(const MetricPath& path, const PrivacyField& field);

// ---------------------------------------------------------------------------
// "PANAV-FIELD v1": magic line, one text line
// "<width> <height> <resolution> <origin_x> <origin_y>", then width*height
// little-endian float32 values, row-major from row 0.

void write_field(std::ostream& out, const GridGeometry& geometry, std::span<const double> values);
DistanceField read_field(std::istream& in);
void write_field_file(const std::filesystem::path& file, const GridGeometry& geometry,
                      std::span<const double> values);
void write_field_heatmap_png(const std::filesystem::path& file, const PrivacyField& field);

}  // namespace panav
