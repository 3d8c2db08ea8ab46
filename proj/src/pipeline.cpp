#include "panav/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "panav/image.hpp"
#include "panav/text_io.hpp"

namespace panav {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

// Digit runs compare by value, so office_2 sorts before office_10.
bool natural_less(std::string_view a, std::string_view b) {
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    const bool da = std::isdigit(static_cast<unsigned char>(a[i])) != 0;
    const bool db = std::isdigit(static_cast<unsigned char>(b[j])) != 0;
    if (da && db) {
      std::size_t ie = i;
      std::size_t je = j;
      while (ie < a.size() && std::isdigit(static_cast<unsigned char>(a[ie]))) ++ie;
      while (je < b.size() && std::isdigit(static_cast<unsigned char>(b[je]))) ++je;
      const auto na = a.substr(i, ie - i);
      const auto nb = b.substr(j, je - j);
      const auto ta = na.substr(std::min(na.find_first_not_of('0'), na.size()));
      const auto tb = nb.substr(std::min(nb.find_first_not_of('0'), nb.size()));
      if (ta.size() != tb.size()) return ta.size() < tb.size();
      if (ta != tb) return ta < tb;
      i = ie;
      j = je;
      continue;
    }
    if (a[i] != b[j]) return a[i] < b[j];
    ++i;
    ++j;
  }
  return a.size() - i < b.size() - j;
}

std::vector<std::string> rooms_of(const SceneSet& scene, RoomCategory category) {
  std::vector<std::string> out;
  for (const auto& room : scene.rooms) {
    if (room.category == category) out.push_back(room.name);
  }
  std::sort(out.begin(), out.end(), [](const std::string& a, const std::string& b) { return natural_less(a, b); });
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? std::string(sep) : "") + parts[i];
  return out;
}

template <typename Fn>
void run_stage(Stage stage, EpisodeReport& report, Fn&& fn) {
  try {
    fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e);
  }
  report.completed = stage;
}

std::unique_ptr<VlmClient> configured_client(const PipelineParams& params) {
  ChatCompletionConfig cfg;
  cfg.endpoint = params.vlm_endpoint;
  cfg.model = params.vlm_model;
  cfg.timeout_seconds = params.vlm_timeout_seconds;
  if (const char* key = std::getenv("PANAV_VLM_KEY")) cfg.api_key = key;
  return std::make_unique<ChatCompletionClient>(cfg);
}

nlohmann::json path_json(const MetricPath& p) {
  return {{"path_id", p.path_id},
          {"nodes", p.nodes},
          {"cells", p.cells.size()},
          {"axis_steps", p.steps.axis},
          {"diagonal_steps", p.steps.diagonal},
          {"cell_length", p.cell_length},
          {"world_length", p.world_length}};
}

void write_text(const std::filesystem::path& file, const std::string& content) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIoFailure, "cannot write " + file.string());
  out << content;
  if (!out) fail(ErrorCode::kIoFailure, "write failed for " + file.string());
}

BenchmarkRow make_row(const std::string& area, std::string_view method) {
  BenchmarkRow row;
  row.area = area;
  row.method = std::string(method);
  return row;
}

std::vector<BenchmarkRow> report_rows(const EpisodeReport& report) {
  std::vector<BenchmarkRow> rows;
  BenchmarkRow base = make_row(report.area, kBaselineMethod);
  if (report.baseline && report.baseline_score) {
    base.p_risk = report.baseline_score->risk;
    base.cell_distance = report.baseline->cell_length;
    base.world_distance_m = report.baseline->world_length;
  } else {
    base.failure = report.baseline_failure.empty() ? "baseline not computed" : report.baseline_failure;
  }
  rows.push_back(base);

  BenchmarkRow ours = make_row(report.area, kPrivacyMethod);
  const int chosen = report.verdict.chosen;
  if (chosen >= 0 && static_cast<std::size_t>(chosen) < report.scores.size()) {
    ours.p_risk = report.scores[chosen].risk;
    ours.cell_distance = report.scores[chosen].cell_length;
    ours.world_distance_m = report.scores[chosen].world_length;
    ours.path_id = chosen;
  } else {
    ours.failure = "no selection";
  }
  rows.push_back(ours);
  return rows;
}

}  // namespace

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::kSceneIngest: return "scene_ingest";
    case Stage::kGridMaps: return "grid_maps";
    case Stage::kTopoGraph: return "topo_graph";
    case Stage::kPathPlanning: return "path_planning";
    case Stage::kPrivacyField: return "privacy_field";
    case Stage::kSelection: return "selection";
  }
  return "unknown";
}

StageError::StageError(Stage stage, const Error& cause)
    : Error(cause.code(), cause.detail()),
      stage_(stage),
      message_(std::string(to_string(stage)) + ": " + cause.what()) {}

std::shared_ptr<const SceneSet> load_scene(const SceneSource& source) {
  if (source.scene) return source.scene;
  switch (source.kind) {
    case SceneSourceKind::kSynthetic:
      return std::make_shared<const SceneSet>(generate_synthetic_world(source.seed, source.layout));
    case SceneSourceKind::kS3dis: {
      std::filesystem::path dir = source.path;
      const char* root = std::getenv("PANAV_DATA_DIR");
      if (dir.is_relative() && root && !std::filesystem::exists(dir)) dir = std::filesystem::path(root) / dir;
      return std::make_shared<const SceneSet>(parse_s3dis_area(dir));
    }
    case SceneSourceKind::kSceneFile:
      return std::make_shared<const SceneSet>(parse_scene_file(source.path));
    case SceneSourceKind::kInline:
      break;
  }
  fail(ErrorCode::kInvalidConfig, "inline scene source without a scene");
}

EpisodeReport run_episode(const EpisodeConfig& config, Stage until, VlmClient* client) {
  EpisodeReport r;
  r.config = config;
  r.config.source.scene.reset();
  r.area = config.label.empty() ? source_label(config.source) : config.label;
  const PipelineParams& p = config.params;

  run_stage(Stage::kSceneIngest, r, [&] {
    if (config.instruction.empty()) fail(ErrorCode::kInvalidEpisode, "instruction is empty");
    r.scene = load_scene(config.source);
    if (config.source.kind == SceneSourceKind::kInline) r.area = config.label.empty() ? r.scene->area_name : config.label;
    r.start_room = config.start_room;
    r.goal_room = config.goal_room;
    if (r.start_room.empty() || r.goal_room.empty()) {
      const auto offices = rooms_of(*r.scene, RoomCategory::kOffice);
      if (offices.size() < 2) fail(ErrorCode::kInvalidEpisode, "no default start/goal: fewer than two offices");
      if (r.start_room.empty()) r.start_room = offices.front();
      if (r.goal_room.empty()) r.goal_room = offices.back();
    }
  });
  if (until == Stage::kSceneIngest) return r;

  RoomMask mask;
  run_stage(Stage::kGridMaps, r, [&] {
    r.top = build_top_view(*r.scene, p.resolution, p.ceiling);
    r.tra = build_traversability(*r.scene, r.top.geometry, p.ceiling, p.bands);
    if (p.inflation_cells > 0) r.tra = inflate_obstacles(r.tra, p.inflation_cells);
    mask = build_room_mask(*r.scene, r.top.geometry, p.mask_categories);
  });
  if (until == Stage::kGridMaps) return r;

  run_stage(Stage::kTopoGraph, r, [&] {
    make_episode(r.scene, config.instruction, r.start_room, r.goal_room);
    r.graph = build_topology(*r.scene, r.tra, p.adjacency_threshold);
    for (const auto& room : {r.start_room, r.goal_room}) {
      if (!r.graph.find_node(room)) fail(ErrorCode::kUnknownRoom, "room '" + room + "' is not in the graph");
    }
  });
  if (until == Stage::kTopoGraph) return r;

  run_stage(Stage::kPathPlanning, r, [&] {
    auto topo = enumerate_simple_paths(r.graph, r.start_room, r.goal_room, EnumerateOptions{true});
    if (topo.empty()) {
      fail(ErrorCode::kUnreachable, "no topological path from " + r.start_room + " to " + r.goal_room);
    }
    const auto ranked = filter_candidates(std::move(topo), std::numeric_limits<std::size_t>::max());
    std::string first_failure;
    for (const auto& t : ranked) {
      if (r.candidates.size() == p.k) break;
      try {
        MetricPath m = realize_metric_path(t, r.graph, r.tra);
        m.path_id = static_cast<int>(r.candidates.size());
        r.candidates.push_back(std::move(m));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kSegmentUnreachable) throw;
        if (first_failure.empty()) first_failure = e.detail();
        r.skipped.push_back(join(t.nodes, ",") + ": " + e.detail());
      }
    }
    if (r.candidates.empty()) fail(ErrorCode::kSegmentUnreachable, first_failure);

    const TopoNode& s = r.graph.nodes[*r.graph.find_node(r.start_room)];
    const TopoNode& g = r.graph.nodes[*r.graph.find_node(r.goal_room)];
    try {
      const GridPath direct = astar(r.tra, s.center, g.center);
      MetricPath b;
      b.path_id = -1;
      b.nodes = {r.start_room, r.goal_room};
      b.cells = direct.cells;
      b.steps = direct.cost;
      b.cell_length = direct.cost.value();
      b.world_length = b.cell_length * r.tra.geometry.resolution;
      r.baseline = std::move(b);
    } catch (const Error& e) {
      r.baseline_failure = e.what();
    }
  });
  if (until == Stage::kPathPlanning) return r;

  run_stage(Stage::kPrivacyField, r, [&] {
    const auto sources = mask_sources(mask);
    const DistanceField distance = fmm_distance(r.tra, sources);
    r.field = gaussian_modulate(distance, p.sigma_d, p.field_mode);
    for (const auto& c : r.candidates) r.scores.push_back(path_risk(c, r.field));
    if (r.baseline) r.baseline_score = path_risk(*r.baseline, r.field);
  });
  if (until == Stage::kPrivacyField) return r;

  run_stage(Stage::kSelection, r, [&] {
    if (p.selector == SelectionMethod::kHeuristic) {
      r.verdict.method = SelectionMethod::kHeuristic;
      r.verdict.chosen = heuristic_select(r.scores);
      return;
    }
    std::vector<CandidateRendering> renderings;
    for (const auto& c : r.candidates) {
      renderings.push_back(render_candidate(r.top, c, p.render_scale, p.stroke_width));
    }
    std::unique_ptr<VlmClient> owned;
    if (!client) {
      owned = configured_client(p);
      client = owned.get();
    }
    const Episode episode = make_episode(r.scene, config.instruction, r.start_room, r.goal_room);
    r.verdict = vlm_select(*client, episode, renderings, p.vlm_model, p.temperature);
  });
  return r;
}

std::string report_json(const EpisodeReport& r) {
  using nlohmann::json;
  json doc;
  doc["area"] = r.area;
  doc["instruction"] = r.config.instruction;
  doc["start_room"] = r.start_room;
  doc["goal_room"] = r.goal_room;
  doc["completed_stage"] = std::string(to_string(r.completed));

  json params = json::object();
  for (const auto& [key, value] : config_entries(r.config)) params[key] = value;
  doc["parameters"] = params;

  if (r.completed >= Stage::kGridMaps) {
    const GridGeometry& g = r.tra.geometry;
    doc["grid"] = {{"width", g.width},
                   {"height", g.height},
                   {"resolution", g.resolution},
                   {"origin_x", g.origin_x},
                   {"origin_y", g.origin_y},
                   {"traversable_cells", r.tra.traversable_count()}};
  }
  if (r.completed >= Stage::kTopoGraph) {
    json nodes = json::array();
    for (const auto& n : r.graph.nodes) {
      nodes.push_back({{"room", n.room_name},
                       {"category", std::string(to_string(n.category))},
                       {"center", {n.center.x, n.center.y}}});
    }
    json edges = json::array();
    for (const auto& e : r.graph.edges) {
      edges.push_back({{"a", r.graph.nodes[e.a].room_name},
                       {"b", r.graph.nodes[e.b].room_name},
                       {"clearance", e.clearance},
                       {"length", e.length}});
    }
    doc["graph"] = {{"nodes", nodes}, {"edges", edges}};
  }
  if (r.completed >= Stage::kPathPlanning) {
    json cands = json::array();
    for (std::size_t i = 0; i < r.candidates.size(); ++i) {
      json c = path_json(r.candidates[i]);
      if (i < r.scores.size()) c["p_risk"] = r.scores[i].risk;
      cands.push_back(std::move(c));
    }
    doc["candidates"] = cands;
    doc["skipped"] = r.skipped;
    if (r.baseline) {
      json b = path_json(*r.baseline);
      if (r.baseline_score) b["p_risk"] = r.baseline_score->risk;
      doc["baseline"] = b;
    } else {
      doc["baseline"] = {{"failure", r.baseline_failure}};
    }
  }
  if (r.completed >= Stage::kPrivacyField) {
    doc["field"] = {{"mode", std::string(to_string(r.field.mode))},
                    {"mu", r.field.mu},
                    {"sigma", r.field.sigma},
                    {"sigma_d", r.field.sigma_d}};
  }
  if (r.completed >= Stage::kSelection) {
    json runs = json::array();
    for (const auto& run : r.verdict.runs) {
      runs.push_back({{"path_id", run.path_id ? json(*run.path_id) : json(nullptr)}, {"failure", run.failure}});
    }
    doc["selection"] = {{"method", std::string(to_string(r.verdict.method))},
                        {"chosen", r.verdict.chosen},
                        {"runs", runs}};
  }
  return doc.dump(2) + "\n";
}

void export_artifacts(const EpisodeReport& r, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir)) {
    fail(ErrorCode::kIoFailure, "cannot create " + out_dir.string());
  }
  if (r.completed >= Stage::kGridMaps) {
    write_top_view_png(out_dir / "top_view.png", r.top);
    write_traversability_pgm(out_dir / "traversability.pgm", r.tra);
    write_geometry_meta(out_dir / "grid.meta", r.tra.geometry);
  }
  if (r.completed >= Stage::kTopoGraph) write_graph_file(out_dir / "graph.txt", r.graph);
  if (r.completed >= Stage::kPathPlanning) {
    std::ostringstream paths;
    write_path_records(paths, r.candidates, true);
    write_text(out_dir / "paths.txt", paths.str());
    const int scale = r.config.params.render_scale;
    const int stroke = r.config.params.stroke_width;
    for (const auto& c : r.candidates) {
      const auto img = render_candidate(r.top, c, scale, stroke);
      write_bytes(out_dir / ("candidate_path_" + std::to_string(c.path_id) + ".png"), img.png);
    }
  }
  if (r.completed >= Stage::kPrivacyField) {
    write_field_file(out_dir / "field.bin", r.field.geometry, r.field.values);
    write_field_heatmap_png(out_dir / "field_heatmap.png", r.field);
    std::ostringstream csv;
    csv << "path_id,nodes,p_risk,cell_distance,world_distance_m\n";
    for (std::size_t i = 0; i < r.scores.size(); ++i) {
      csv << r.scores[i].path_id << ',' << join(r.candidates[i].nodes, "|") << ','
          << text::format_double(r.scores[i].risk) << ',' << text::format_double(r.scores[i].cell_length)
          << ',' << text::format_double(r.scores[i].world_length) << '\n';
    }
    write_text(out_dir / "scores.csv", csv.str());
  }
  if (r.completed >= Stage::kSelection) {
    const int chosen = r.verdict.chosen;
    if (chosen >= 0 && static_cast<std::size_t>(chosen) < r.candidates.size()) {
      const auto img = render_candidate(r.top, r.candidates[chosen], r.config.params.render_scale,
                                        r.config.params.stroke_width);
      write_bytes(out_dir / "selected_path.png", img.png);
    }
    write_text(out_dir / "benchmark.csv", benchmark_csv(report_rows(r), false));
    if (r.verdict.method == SelectionMethod::kVlm) {
      Episode episode{r.scene, r.config.instruction, r.start_room, r.goal_room};
      write_transcript_log(out_dir / "transcripts.json", episode, r.verdict);
    }
  }
  write_text(out_dir / "report.json", report_json(r));
}

std::vector<BenchmarkRow> run_benchmark(const std::vector<EpisodeConfig>& configs, VlmClient* client) {
  if (configs.empty()) fail(ErrorCode::kInvalidArgument, "benchmark needs at least one episode config");
  std::vector<BenchmarkRow> rows;
  for (const auto& config : configs) {
    const std::string area = config.label.empty() ? source_label(config.source) : config.label;
    const auto t0 = Clock::now();
    try {
      const EpisodeReport report = run_episode(config, Stage::kSelection, client);
      const double total_ms = elapsed_ms(t0);
      auto pair = report_rows(report);
      if (report.baseline) {
        // Time the baseline on its own: one grid search plus scoring.
        const auto t1 = Clock::now();
        const GridPath direct = astar(report.tra, report.baseline->cells.front(), report.baseline->cells.back());
        MetricPath probe = *report.baseline;
        probe.cells = direct.cells;
        path_risk(probe, report.field);
        pair[0].runtime_ms = elapsed_ms(t1);
      }
      pair[1].runtime_ms = total_ms;
      rows.insert(rows.end(), pair.begin(), pair.end());
    } catch (const Error& e) {
      for (auto method : {kBaselineMethod, kPrivacyMethod}) {
        BenchmarkRow row = make_row(area, method);
        row.failure = e.what();
        rows.push_back(row);
      }
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const BenchmarkRow& a, const BenchmarkRow& b) {
    return std::tie(a.area, a.method) < std::tie(b.area, b.method);
  });
  return rows;
}

std::string benchmark_csv(const std::vector<BenchmarkRow>& rows, bool with_runtime) {
  std::ostringstream out;
  out << "area,method,p_risk,cell_distance,world_distance_m,path_id,runtime_ms\n";
  for (const auto& row : rows) {
    out << row.area << ',' << row.method << ',';
    if (!row.failure.empty()) {
      out << ",,,,\n";
      continue;
    }
    out << text::format_double(row.p_risk) << ',' << text::format_double(row.cell_distance) << ','
        << text::format_double(row.world_distance_m) << ',' << row.path_id << ',';
    if (with_runtime) out << text::format_double(std::round(row.runtime_ms * 1000.0) / 1000.0);
    out << '\n';
  }
  return out.str();
}

std::vector<EpisodeConfig> s3dis_episodes(const std::filesystem::path& area_dir, const PipelineParams& params) {
  SceneSource source;
  source.kind = SceneSourceKind::kS3dis;
  source.path = area_dir;
  source.scene = load_scene(source);
  const auto offices = rooms_of(*source.scene, RoomCategory::kOffice);
  if (offices.empty()) fail(ErrorCode::kInvalidEpisode, source_label(source) + " has no office");

  struct Scenario {
    std::string_view tag;
    std::string_view instruction;
    std::optional<std::string> goal;
  };
  const auto conference = rooms_of(*source.scene, RoomCategory::kConference);
  const auto bathroom = rooms_of(*source.scene, RoomCategory::kBathroom);
  const std::vector<Scenario> scenarios = {
      {"office", "send a classified file from the office to the HR office",
       offices.size() > 1 ? std::optional(offices.back()) : std::nullopt},
      {"conference", "send fragile equipment from the office to the meeting room",
       conference.empty() ? std::nullopt : std::optional(conference.front())},
      {"bathroom", "send medicine from the office to the bathroom",
       bathroom.empty() ? std::nullopt : std::optional(bathroom.front())},
  };
  std::vector<EpisodeConfig> out;
  for (const auto& s : scenarios) {
    if (!s.goal) continue;
    EpisodeConfig c;
    c.source = source;
    c.label = source_label(source) + ":" + std::string(s.tag);
    c.instruction = std::string(s.instruction);
    c.start_room = offices.front();
    c.goal_room = *s.goal;
    c.params = params;
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace panav
