#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "panav/config.hpp"
#include "panav/error.hpp"
#include "panav/image.hpp"
#include "panav/pipeline.hpp"
#include "support/oracles.hpp"
#include "support/temp_dir.hpp"

using namespace panav;

namespace {

const std::string kScenario1 = "send a classified file from the office to the HR office";

// Two offices joined by five separate parallel hallways.
std::shared_ptr<const SceneSet> ladder_scene() {
  SceneSet s;
  s.area_name = "ladder";
  s.rooms.push_back(oracle::box_room("office_1", 0, 0, 2, 9, 0.05));
  s.rooms.push_back(oracle::box_room("office_2", 12, 0, 14, 9, 0.05));
  for (int i = 0; i < 5; ++i) {
    s.rooms.push_back(oracle::box_room("hallway_" + std::to_string(i + 1), 2, 2.0 * i, 12, 2.0 * i + 1, 0.05));
  }
  std::sort(s.rooms.begin(), s.rooms.end(), [](auto& a, auto& b) { return a.name < b.name; });
  return std::make_shared<const SceneSet>(std::move(s));
}

EpisodeConfig ladder_config() {
  EpisodeConfig c;
  c.source.kind = SceneSourceKind::kInline;
  c.source.scene = ladder_scene();
  c.start_room = "office_1";
  c.goal_room = "office_2";
  c.params.resolution = 0.1;
  return c;
}

EpisodeConfig synthetic_config(std::uint64_t seed) {
  EpisodeConfig c;
  c.source.kind = SceneSourceKind::kSynthetic;
  c.source.seed = seed;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("default config lists every setting and round-trips") {
  const EpisodeConfig defaults;
  const std::string text = format_config(defaults);
  for (const auto& [key, value] : config_entries(defaults)) {
    const auto dot = key.find('.');
    CHECK(text.find("[" + key.substr(0, dot) + "]") != std::string::npos);
    CHECK(text.find(key.substr(dot + 1) + " = " + value) != std::string::npos);
  }
  for (const char* expected : {"resolution = 0.05", "sigma_d = 3", "k = 5", "field_mode = risk-inverted",
                               "adjacency_threshold = 0.5", "temperature = 0.5", "floor_band = 0.2",
                               "obstacle_low = 0.3", "obstacle_high = 1.8", "ceiling_fraction = 0.85",
                               "mask_categories = office,conference", "selector = heuristic"}) {
    CHECK(text.find(expected) != std::string::npos);
  }
  std::istringstream in(text);
  CHECK(config_entries(parse_config(in)) == config_entries(defaults));

  EpisodeConfig changed;
  set_config_value(changed, "privacy_field.sigma_d", "2.5");
  set_config_value(changed, "privacy_field.field_mode", "paper-eq5");
  set_config_value(changed, "path_planning.k", "3");
  set_config_value(changed, "scene.topology", "linear");
  std::istringstream in2(format_config(changed));
  CHECK(config_entries(parse_config(in2)) == config_entries(changed));
}

TEST_CASE("config errors") {
  EpisodeConfig c;
  for (auto [key, value] : std::vector<std::pair<std::string, std::string>>{
           {"grid_maps.resolution", "-1"},
           {"path_planning.k", "0"},
           {"privacy_field.field_mode", "eq5"},
           {"selection.selector", "oracle"},
           {"nope.key", "1"},
           {"privacy_field.mask_categories", "office,garage"}}) {
    try {
      set_config_value(c, key, value);
      FAIL("expected InvalidConfig for " << key);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kInvalidConfig);
    }
  }
  std::istringstream orphan("k = 1\n");
  CHECK_THROWS_AS(parse_config(orphan), Error);
}

TEST_CASE("heuristic episode picks the minimum-risk candidate") {
  EpisodeConfig c = synthetic_config(3);
  c.instruction = kScenario1;
  const EpisodeReport r = run_episode(c);
  REQUIRE(r.candidates.size() >= 2);
  REQUIRE(r.scores.size() == r.candidates.size());
  for (const auto& s : r.scores) CHECK(r.scores[r.verdict.chosen].risk <= s.risk);
  const auto doc = nlohmann::json::parse(report_json(r));
  CHECK(doc["instruction"] == kScenario1);
  CHECK(doc["selection"]["chosen"] == r.verdict.chosen);
  CHECK(doc["parameters"]["privacy_field.sigma_d"] == "3");
  CHECK(r.start_room == "office_1");
  CHECK(r.goal_room == "office_4");
}

TEST_CASE("stage attribution") {
  EpisodeConfig c = synthetic_config(1);
  c.goal_room = "office_42";
  try {
    run_episode(c);
    FAIL("expected StageError");
  } catch (const StageError& e) {
    CHECK(e.stage() == Stage::kTopoGraph);
    CHECK(e.code() == ErrorCode::kUnknownRoom);
    CHECK(std::string(e.what()).rfind("topo_graph: UnknownRoom:", 0) == 0);
  }

  EpisodeConfig bad_res = synthetic_config(1);
  bad_res.params.resolution = 2.0;
  try {
    run_episode(bad_res);
    FAIL("expected StageError");
  } catch (const StageError& e) {
    CHECK(e.stage() == Stage::kGridMaps);
  }

  EpisodeConfig missing;
  missing.source.kind = SceneSourceKind::kSceneFile;
  missing.source.path = "/nonexistent/scene.txt";
  try {
    run_episode(missing);
    FAIL("expected StageError");
  } catch (const StageError& e) {
    CHECK(e.stage() == Stage::kSceneIngest);
    CHECK(e.code() == ErrorCode::kIoFailure);
  }
}

TEST_CASE("staged runs stop early") {
  const EpisodeReport r = run_episode(synthetic_config(2), Stage::kTopoGraph);
  CHECK(r.completed == Stage::kTopoGraph);
  CHECK(r.candidates.empty());
  CHECK(!r.graph.nodes.empty());
  const auto doc = nlohmann::json::parse(report_json(r));
  CHECK_FALSE(doc.contains("candidates"));
}

TEST_CASE("k caps the candidate set and exports one image per candidate") {
  TempDir dir;
  const EpisodeReport r = run_episode(ladder_config());
  REQUIRE(r.candidates.size() == 5);
  for (int i = 0; i < 5; ++i) CHECK(r.candidates[i].path_id == i);
  export_artifacts(r, dir.path());
  int pngs = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir.path())) {
    if (entry.path().filename().string().rfind("candidate_path_", 0) == 0) ++pngs;
  }
  CHECK(pngs == 5);
  for (int i = 0; i < 5; ++i) CHECK(std::filesystem::exists(dir.path() / ("candidate_path_" + std::to_string(i) + ".png")));
  for (const char* f : {"top_view.png", "traversability.pgm", "grid.meta", "graph.txt", "paths.txt", "field.bin",
                        "field_heatmap.png", "scores.csv", "selected_path.png", "report.json", "benchmark.csv"}) {
    CHECK(std::filesystem::exists(dir.path() / f));
  }
  CHECK_FALSE(std::filesystem::exists(dir.path() / "transcripts.json"));

  EpisodeConfig three = ladder_config();
  three.params.k = 3;
  CHECK(run_episode(three).candidates.size() == 3);
}

TEST_CASE("export is byte-identical and reports write failures") {
  TempDir a;
  TempDir b;
  const EpisodeReport r = run_episode(ladder_config());
  export_artifacts(r, a.path());
  export_artifacts(r, b.path());
  for (const auto& entry : std::filesystem::directory_iterator(a.path())) {
    CHECK(slurp(entry.path()) == slurp(b.path() / entry.path().filename()));
  }

  // A path below a regular file cannot be created, even by root.
  std::ofstream(a.path() / "plain") << "x";
  try {
    export_artifacts(r, a.path() / "plain" / "out");
    FAIL("expected IoFailure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIoFailure);
  }
}

TEST_CASE("vlm episode with a scripted client") {
  TempDir dir;
  EpisodeConfig c = ladder_config();
  c.params.selector = SelectionMethod::kVlm;
  ScriptedVlmClient client({"FINAL: path_3", "FINAL: path_3", "FINAL: path_1", "junk", "FINAL: path_3"});
  const EpisodeReport r = run_episode(c, Stage::kSelection, &client);
  CHECK(r.verdict.chosen == 3);
  CHECK(client.calls() == 5);
  REQUIRE(client.requests().size() == 5);
  CHECK(client.requests()[0].images.size() == 5);
  CHECK(decode_png(client.requests()[0].images[0].png).width > 0);
  export_artifacts(r, dir.path());
  const auto log = nlohmann::json::parse(slurp(dir.path() / "transcripts.json"));
  CHECK(log["runs"].size() == 5);
  CHECK(log["runs"][3]["transcript"] == "junk");

  EpisodeConfig unconfigured = ladder_config();
  unconfigured.params.selector = SelectionMethod::kVlm;
  try {
    run_episode(unconfigured);
    FAIL("expected StageError");
  } catch (const StageError& e) {
    CHECK(e.stage() == Stage::kSelection);
    CHECK(e.code() == ErrorCode::kInvalidConfig);
  }
}

TEST_CASE("benchmark rows") {
  CHECK_THROWS_AS(run_benchmark({}), Error);

  EpisodeConfig broken = synthetic_config(4);
  broken.goal_room = "office_77";
  const auto rows = run_benchmark({synthetic_config(5), broken, synthetic_config(4)});
  REQUIRE(rows.size() == 6);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(std::tie(rows[i - 1].area, rows[i - 1].method) <= std::tie(rows[i].area, rows[i].method));
  }
  int failures = 0;
  for (const auto& row : rows) failures += row.failure.empty() ? 0 : 1;
  CHECK(failures == 2);

  const EpisodeReport r = run_episode(synthetic_config(5));
  std::set<int> ids;
  for (const auto& c : r.candidates) ids.insert(c.path_id);
  for (const auto& row : rows) {
    if (row.area == "synthetic_5" && row.method == kPrivacyMethod) CHECK(ids.count(row.path_id) == 1);
  }

  const std::string csv = benchmark_csv(rows);
  CHECK(csv.rfind("area,method,p_risk,cell_distance,world_distance_m,path_id,runtime_ms\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
}

TEST_CASE("risky shortcut versus quiet detour") {
  const EpisodeReport r = run_episode(synthetic_config(8));
  REQUIRE(r.baseline.has_value());
  // Direct field summation, independent of path_risk.
  double direct = 0.0;
  for (std::size_t i = 0; i < r.baseline->cells.size(); ++i) {
    if (i > 0 && r.baseline->cells[i] == r.baseline->cells[i - 1]) continue;
    direct += r.field.values[r.field.geometry.index(r.baseline->cells[i])];
  }
  CHECK(direct == doctest::Approx(r.baseline_score->risk).epsilon(1e-12));
  const auto rows = run_benchmark({synthetic_config(8)});
  const BenchmarkRow& ours = rows[0].method == kPrivacyMethod ? rows[0] : rows[1];
  const BenchmarkRow& base = rows[0].method == kPrivacyMethod ? rows[1] : rows[0];
  CHECK(base.p_risk > ours.p_risk);
  CHECK(base.cell_distance < ours.cell_distance);
}

TEST_CASE("s3dis episodes follow the three scenarios") {
  TempDir dir;
  const auto area = dir.path() / "Area_9";
  const std::vector<std::pair<std::string, std::array<double, 4>>> rooms = {
      {"office_1", {0, 1, 2, 3}}, {"office_2", {2, 1, 4, 3}}, {"conferenceRoom_1", {4, 1, 6, 3}},
      {"WC_1", {6, 1, 8, 3}},     {"hallway_1", {0, 0, 8, 1}}};
  for (const auto& [name, box] : rooms) {
    std::filesystem::create_directories(area / name);
    std::ofstream out(area / name / (name + ".txt"));
    const Room r = oracle::box_room(name, box[0], box[1], box[2], box[3], 0.1);
    for (const auto& p : r.points) out << p.x << ' ' << p.y << ' ' << p.z << " 1 2 3\n";
  }
  const auto episodes = s3dis_episodes(area, PipelineParams{});
  REQUIRE(episodes.size() == 3);
  CHECK(episodes[0].goal_room == "office_2");
  CHECK(episodes[1].goal_room == "conferenceRoom_1");
  CHECK(episodes[1].instruction == "send fragile equipment from the office to the meeting room");
  CHECK(episodes[2].goal_room == "WC_1");
  CHECK(episodes[2].label == "Area_9:bathroom");
  for (const auto& e : episodes) CHECK(e.start_room == "office_1");
}
