// panav: command-line driver for the privacy-aware planning pipeline.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "panav/config.hpp"
#include "panav/pipeline.hpp"

namespace {

using namespace panav;

struct CommonOptions {
  std::string config_file;
  std::string out_dir = "panav_out";
  std::string scene_file;
  std::string s3dis_area;
  std::string start_room;
  std::string goal_room;
  std::string instruction;
  std::optional<double> resolution;
  std::optional<double> sigma_d;
  std::optional<std::size_t> k;
  std::string field_mode;
  std::string selector;
  std::optional<double> adjacency_threshold;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> settings;  // section.key=value
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_file, "INI configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out_dir, "Output directory")->capture_default_str();
  cmd->add_option("--scene-file", o.scene_file, "Scene file to load instead of a synthetic world");
  cmd->add_option("--s3dis", o.s3dis_area, "S3DIS area directory (relative paths resolve under PANAV_DATA_DIR)");
  cmd->add_option("--start", o.start_room, "Start room");
  cmd->add_option("--goal", o.goal_room, "Goal room");
  cmd->add_option("--instruction", o.instruction, "Navigational instruction");
  cmd->add_option("--resolution", o.resolution, "Grid resolution in meters per cell");
  cmd->add_option("--sigma-d", o.sigma_d, "Gaussian width divisor");
  cmd->add_option("--k", o.k, "Number of candidate paths");
  cmd->add_option("--field-mode", o.field_mode, "risk-inverted or paper-eq5");
  cmd->add_option("--selector", o.selector, "heuristic or vlm");
  cmd->add_option("--adjacency-threshold", o.adjacency_threshold, "Room adjacency threshold in meters");
  cmd->add_option("--seed", o.seed, "Synthetic world seed");
  cmd->add_option("--set", o.settings, "Override any setting as section.key=value");
}

EpisodeConfig resolve_config(const CommonOptions& o) {
  EpisodeConfig c = o.config_file.empty() ? EpisodeConfig{} : load_config_file(o.config_file);
  for (const auto& kv : o.settings) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) fail(ErrorCode::kInvalidConfig, "--set expects section.key=value, got " + kv);
    set_config_value(c, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!o.scene_file.empty()) {
    c.source.kind = SceneSourceKind::kSceneFile;
    c.source.path = o.scene_file;
  }
  if (!o.s3dis_area.empty()) {
    c.source.kind = SceneSourceKind::kS3dis;
    c.source.path = o.s3dis_area;
  }
  if (!o.start_room.empty()) c.start_room = o.start_room;
  if (!o.goal_room.empty()) c.goal_room = o.goal_room;
  if (!o.instruction.empty()) c.instruction = o.instruction;
  if (o.resolution) set_config_value(c, "grid_maps.resolution", std::to_string(*o.resolution));
  if (o.sigma_d) set_config_value(c, "privacy_field.sigma_d", std::to_string(*o.sigma_d));
  if (o.k) set_config_value(c, "path_planning.k", std::to_string(*o.k));
  if (!o.field_mode.empty()) set_config_value(c, "privacy_field.field_mode", o.field_mode);
  if (!o.selector.empty()) set_config_value(c, "selection.selector", o.selector);
  if (o.adjacency_threshold) {
    set_config_value(c, "topo_graph.adjacency_threshold", std::to_string(*o.adjacency_threshold));
  }
  if (o.seed) c.source.seed = *o.seed;
  return c;
}

void print_summary(const EpisodeReport& r) {
  std::cout << "area " << r.area << ": " << r.start_room << " -> " << r.goal_room << "\n";
  if (r.scene) std::cout << "  rooms " << r.scene->rooms.size() << ", points " << r.scene->point_count() << "\n";
  if (r.completed >= Stage::kGridMaps) {
    std::cout << "  grid " << r.tra.geometry.width << "x" << r.tra.geometry.height << ", traversable "
              << r.tra.traversable_count() << "\n";
  }
  if (r.completed >= Stage::kTopoGraph) {
    std::cout << "  graph " << r.graph.nodes.size() << " nodes, " << r.graph.edges.size() << " edges\n";
  }
  if (r.completed >= Stage::kPathPlanning) {
    for (std::size_t i = 0; i < r.candidates.size(); ++i) {
      const auto& c = r.candidates[i];
      std::cout << "  path_" << c.path_id << " len " << c.world_length << " m";
      if (i < r.scores.size()) std::cout << " risk " << r.scores[i].risk;
      std::cout << "\n";
    }
    for (const auto& s : r.skipped) std::cout << "  skipped " << s << "\n";
    if (r.baseline_score) {
      std::cout << "  baseline len " << r.baseline->world_length << " m risk " << r.baseline_score->risk << "\n";
    }
  }
  if (r.completed >= Stage::kSelection) {
    std::cout << "  chosen path_" << r.verdict.chosen << " (" << to_string(r.verdict.method) << ")\n";
  }
}

int run_stage_command(const CommonOptions& o, Stage until, bool write_scene) {
  const EpisodeConfig config = resolve_config(o);
  const EpisodeReport report = run_episode(config, until);
  export_artifacts(report, o.out_dir);
  if (write_scene) write_scene_file(std::filesystem::path(o.out_dir) / "scene.txt", *report.scene);
  print_summary(report);
  std::cout << "artifacts in " << o.out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Privacy-aware indoor path planning"};
  app.require_subcommand(1);

  struct StageCommand {
    const char* name;
    const char* help;
    Stage until;
  };
  const StageCommand stage_commands[] = {
      {"ingest", "Load a scene and write it as a scene file", Stage::kSceneIngest},
      {"maps", "Build top-view and traversability maps", Stage::kGridMaps},
      {"graph", "Build the topological room graph", Stage::kTopoGraph},
      {"paths", "Enumerate, filter and realize candidate paths", Stage::kPathPlanning},
      {"field", "Compute the privacy field", Stage::kPrivacyField},
      {"score", "Score candidate paths against the privacy field", Stage::kPrivacyField},
      {"select", "Select the route among the candidates", Stage::kSelection},
      {"run", "Run the full pipeline and export every artifact", Stage::kSelection},
  };
  CommonOptions options;
  std::vector<std::pair<CLI::App*, const StageCommand*>> commands;
  for (const auto& sc : stage_commands) {
    CLI::App* cmd = app.add_subcommand(sc.name, sc.help);
    add_common(cmd, options);
    commands.emplace_back(cmd, &sc);
  }

  CLI::App* bench = app.add_subcommand("bench", "Compare the shortest A* route with the privacy-aware route");
  add_common(bench, options);
  int synthetic_worlds = 0;
  std::vector<std::string> areas;
  std::string csv_file;
  bench->add_option("--synthetic", synthetic_worlds, "Number of seeded synthetic loop worlds");
  bench->add_option("--area", areas, "S3DIS area directory; repeatable");
  bench->add_option("--csv", csv_file, "CSV output file (default: stdout)");

  CLI::App* defaults = app.add_subcommand("export-defaults", "Print the default configuration");
  std::string defaults_file;
  defaults->add_option("--out", defaults_file, "Write to a file instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    for (const auto& [cmd, sc] : commands) {
      if (cmd->parsed()) return run_stage_command(options, sc->until, sc->until == Stage::kSceneIngest);
    }
    if (defaults->parsed()) {
      const std::string text = format_config(EpisodeConfig{});
      if (defaults_file.empty()) {
        std::cout << text;
      } else {
        std::ofstream out(defaults_file);
        out << text;
        if (!out) fail(ErrorCode::kIoFailure, "cannot write " + defaults_file);
      }
      return 0;
    }
    if (bench->parsed()) {
      const EpisodeConfig base = resolve_config(options);
      std::vector<EpisodeConfig> configs;
      for (const auto& area : areas) {
        SceneSource probe;
        probe.kind = SceneSourceKind::kS3dis;
        probe.path = area;
        const char* root = std::getenv("PANAV_DATA_DIR");
        std::filesystem::path dir = area;
        if (dir.is_relative() && root && !std::filesystem::exists(dir)) dir = std::filesystem::path(root) / dir;
        auto episodes = s3dis_episodes(dir, base.params);
        configs.insert(configs.end(), episodes.begin(), episodes.end());
      }
      for (int i = 0; i < synthetic_worlds; ++i) {
        EpisodeConfig c = base;
        c.source.kind = SceneSourceKind::kSynthetic;
        c.source.layout.topology = CorridorTopology::kLoop;
        c.source.seed = base.source.seed + static_cast<std::uint64_t>(i);
        configs.push_back(c);
      }
      if (configs.empty()) configs.push_back(base);
      const auto rows = run_benchmark(configs);
      const std::string csv = benchmark_csv(rows);
      if (csv_file.empty()) {
        std::cout << csv;
      } else {
        std::ofstream out(csv_file);
        out << csv;
        if (!out) fail(ErrorCode::kIoFailure, "cannot write " + csv_file);
      }
      int failures = 0;
      for (const auto& row : rows) {
        if (!row.failure.empty()) {
          ++failures;
          std::cerr << row.area << " " << row.method << ": " << row.failure << "\n";
        }
      }
      return failures == 0 ? 0 : 3;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
