#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "panav/config.hpp"
#include "panav/error.hpp"
#include "panav/grid_maps.hpp"
#include "panav/path_planning.hpp"
#include "panav/privacy_field.hpp"
#include "panav/scene.hpp"
#include "panav/selection.hpp"
#include "panav/topo_graph.hpp"

namespace panav {

/// Pipeline stages in execution order; each name matches a module.
enum class Stage { kSceneIngest, kGridMaps, kTopoGraph, kPathPlanning, kPrivacyField, kSelection };
std::string_view to_string(Stage stage);

/// Module error tagged with the stage it came from; what() reads "stage: Code: message".
class StageError : public Error {
 public:
  StageError(Stage stage, const Error& cause);
  Stage stage() const noexcept { return stage_; }
  const char* what() const noexcept override { return message_.c_str(); }

 private:
  Stage stage_;
  std::string message_;
};

struct EpisodeReport {
  EpisodeConfig config;
  std::string area;
  std::string start_room;
  std::string goal_room;
  Stage completed = Stage::kSceneIngest;  // last stage that ran

  std::shared_ptr<const SceneSet> scene;
  TopViewMap top;
  TraversabilityMap tra;
  TopoGraph graph;
  std::vector<MetricPath> candidates;  // path_id 0..n-1, ascending topo_length
  std::vector<std::string> skipped;    // topological candidates with no grid route
  PrivacyField field;
  std::vector<RiskScore> scores;  // parallel to candidates
  std::optional<MetricPath> baseline;
  std::optional<RiskScore> baseline_score;
  std::string baseline_failure;
  SelectorVerdict verdict;
};

/// Runs ingest through `until`. `client` overrides the configured VLM backend.
EpisodeReport run_episode(const EpisodeConfig& config, Stage until = Stage::kSelection,
                          VlmClient* client = nullptr);

/// Machine-readable report: parameters, candidates, scores, choice. No timings.
std::string report_json(const EpisodeReport& report);

/// Writes every artifact available in the report. Re-export is byte-identical.
void export_artifacts(const EpisodeReport& report, const std::filesystem::path& out_dir);

struct BenchmarkRow {
  std::string area;
  std::string method;  // "shortest-astar" | "privacy-aware"
  double p_risk = 0.0;
  double cell_distance = 0.0;
  double world_distance_m = 0.0;
  int path_id = -1;
  double runtime_ms = 0.0;
  std::string failure;  // non-empty when the row failed
};

inline constexpr std::string_view kBaselineMethod = "shortest-astar";
inline constexpr std::string_view kPrivacyMethod = "privacy-aware";

/// Two rows per config, sorted by (area, method). Failures stay in their rows.
std::vector<BenchmarkRow> run_benchmark(const std::vector<EpisodeConfig>& configs,
                                        VlmClient* client = nullptr);

/// CSV with header area,method,p_risk,cell_distance,world_distance_m,path_id,runtime_ms.
/// Failed rows keep area and method and leave the numeric fields empty.
std::string benchmark_csv(const std::vector<BenchmarkRow>& rows, bool with_runtime = true);

/// Episodes for S3DIS areas: office start, and office / conference / bathroom goals
/// with the matching instructions. Goals missing from an area are skipped.
std::vector<EpisodeConfig> s3dis_episodes(const std::filesystem::path& area_dir,
                                          const PipelineParams& params);

/// Loads the scene named by a source.
std::shared_ptr<const SceneSet> load_scene(const SceneSource& source);

}  // namespace panav
