#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace panav {

/// Object classes used by S3DIS annotation files. kUnset marks raw, unannotated points.
enum class SemanticClass : std::uint8_t {
  kUnset,
  kCeiling,
  kFloor,
  kWall,
  kBeam,
  kColumn,
  kWindow,
  kDoor,
  kTable,
  kChair,
  kSofa,
  kBookcase,
  kBoard,
  kStairs,
  kClutter,
};

std::string_view to_string(SemanticClass cls);
/// Maps an annotation name ("ceiling", "bookcase", ...) to a class. Unknown names map to kClutter.
SemanticClass semantic_class_from_name(std::string_view name);

enum class RoomCategory : std::uint8_t {
  kOffice,
  kHallway,
  kConference,
  kLobby,
  kBathroom,
  kStorage,
  kOther,
};

std::string_view to_string(RoomCategory category);
std::optional<RoomCategory> parse_room_category(std::string_view token);

/// Category from the room-name prefix before the first underscore, lower-cased,
/// resolved through an alias table ("WC" -> bathroom, "conferenceRoom" -> conference).
RoomCategory category_from_name(std::string_view room_name);

struct LabeledPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  SemanticClass semantic_class = SemanticClass::kUnset;

  friend bool operator==(const LabeledPoint&, const LabeledPoint&) = default;
};

struct Room {
  std::string name;
  RoomCategory category = RoomCategory::kOther;
  std::vector<LabeledPoint> points;

  friend bool operator==(const Room&, const Room&) = default;
};

struct SceneSet {
  std::string area_name;
  std::vector<Room> rooms;  // sorted by name, names unique

  const Room* find_room(std::string_view name) const;
  std::size_t point_count() const;
  bool has_labels() const;

  friend bool operator==(const SceneSet&, const SceneSet&) = default;
};

/// Checks the SceneSet invariants (unique non-empty names, consistent categories,
/// finite coordinates, non-empty rooms). Throws kMalformedScene.
void validate_scene(const SceneSet& scene);

struct Episode {
  std::shared_ptr<const SceneSet> scene;
  std::string instruction;
  std::string start_room;
  std::string goal_room;
};

/// Builds an Episode, throwing kUnknownRoom for missing rooms and kInvalidEpisode
/// for an empty instruction.
Episode make_episode(std::shared_ptr<const SceneSet> scene, std::string instruction,
                     std::string start_room, std::string goal_room);

// ---------------------------------------------------------------------------
// Loading

/// Reads an S3DIS-style area: one subdirectory per room holding either
/// <room>/<room>.txt or <room>/Annotations/<class>_<n>.txt with "x y z r g b" records.
SceneSet parse_s3dis_area(const std::filesystem::path& root_directory);

/// Scene file format: "PANAV-SCENE v1", "AREA <name>", then per room
/// "ROOM <name> <category> <point_count>" followed by "x y z r g b class" records.
SceneSet parse_scene_file(const std::filesystem::path& file);
SceneSet read_scene(std::istream& in, std::string_view source_name = "<stream>");
void write_scene(std::ostream& out, const SceneSet& scene);
void write_scene_file(const std::filesystem::path& file, const SceneSet& scene);

// ---------------------------------------------------------------------------
// Synthetic worlds

enum class CorridorTopology { kLinear, kLoop };

/// Office floor built around a corridor. Offices line the north side of the
/// main corridor; a loop topology closes the corridor into a rectangular ring whose
/// far side runs away from the offices.
struct LayoutParams {
  int offices = 4;
  int hallways = 4;
  CorridorTopology topology = CorridorTopology::kLoop;
  double ring_width = 36.0;      // x extent of the corridor system (m)
  double ring_height = 6.0;      // y extent of the ring, loop topology only (m)
  double corridor_width = 2.0;   // m
  double office_depth = 4.0;     // m
  double door_width = 1.0;       // m
  double wall_height = 3.0;      // m
  double point_spacing = 0.04;   // floor lattice pitch (m)
  /// Randomize dimensions and door offsets from the seed. When false the seed only
  /// drives sensor noise and colors.
  bool jitter = true;
};

SceneSet generate_synthetic_world(std::uint64_t seed, const LayoutParams& params);

}  // namespace panav
