#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "panav/grid_maps.hpp"
#include "panav/privacy_field.hpp"
#include "panav/scene.hpp"
#include "panav/selection.hpp"

namespace panav {

enum class SceneSourceKind { kSynthetic, kS3dis, kSceneFile, kInline };

struct SceneSource {
  SceneSourceKind kind = SceneSourceKind::kSynthetic;
  std::filesystem::path path;  // s3dis area directory or scene file
  std::uint64_t seed = 0;
  LayoutParams layout;
  /// Required for kInline; for other kinds a preloaded copy that skips loading.
  std::shared_ptr<const SceneSet> scene;
};

struct PipelineParams {
  // grid_maps
  double resolution = 0.05;
  CeilingPolicy ceiling;
  HeightBands bands;
  int inflation_cells = 0;
  // topo_graph
  double adjacency_threshold = 0.5;
  // path_planning
  std::size_t k = 5;
  // privacy_field
  double sigma_d = 3.0;
  FieldMode field_mode = FieldMode::kRiskInverted;
  std::set<RoomCategory> mask_categories{RoomCategory::kOffice, RoomCategory::kConference};
  // selection
  SelectionMethod selector = SelectionMethod::kHeuristic;
  int render_scale = 1;
  int stroke_width = 3;
  double temperature = 0.5;
  // vlm
  std::string vlm_endpoint;
  std::string vlm_model;
  int vlm_timeout_seconds = 120;
};

struct EpisodeConfig {
  SceneSource source;
  std::string label;  // report/benchmark area label; empty: derived from the source
  std::string instruction = "send a classified file from the office to the HR office";
  std::string start_room;  // empty: first office by name
  std::string goal_room;   // empty: last office by name
  PipelineParams params;
};

/// Applies one "section.key" = value setting. Throws kInvalidConfig.
void set_config_value(EpisodeConfig& config, std::string_view key, std::string_view value);

/// Every setting as ("section.key", value), in file order.
std::vector<std::pair<std::string, std::string>> config_entries(const EpisodeConfig& config);

/// INI text with one section per module; reading it back gives the same config.
std::string format_config(const EpisodeConfig& config);
EpisodeConfig parse_config(std::istream& in);
EpisodeConfig load_config_file(const std::filesystem::path& file);

/// Area label used in reports and benchmark rows.
std::string source_label(const SceneSource& source);

}  // namespace panav
