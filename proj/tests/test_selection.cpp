#include <algorithm>
#include <fstream>
#include <thread>

#include "doctest.h"
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"
#include "json.hpp"
#include "panav/error.hpp"
#include "panav/image.hpp"
#include "panav/selection.hpp"
#include "support/oracles.hpp"
#include "support/temp_dir.hpp"

using namespace panav;

namespace {

const std::string kScenario1 = "send a classified file from the office to the HR office";

TopViewMap blank_top(int w, int h) {
  TopViewMap top;
  top.geometry = GridGeometry{0, 0, 0.05, w, h};
  top.occupied.assign(top.geometry.cell_count(), 1);
  top.height.assign(top.geometry.cell_count(), 0.0);
  top.color.assign(top.geometry.cell_count(), {200, 200, 200});
  return top;
}

MetricPath diagonal_path(int id, int n) {
  MetricPath p;
  p.path_id = id;
  for (int i = 0; i < n; ++i) p.cells.push_back({10 + i, 10 + i});
  return p;
}

Episode scenario() {
  SceneSet s;
  s.area_name = "t";
  s.rooms.push_back(oracle::box_room("office_1", 0, 0, 1, 1, 0.5));
  s.rooms.push_back(oracle::box_room("office_2", 2, 0, 3, 1, 0.5));
  return make_episode(std::make_shared<const SceneSet>(s), kScenario1, "office_1", "office_2");
}

std::vector<CandidateRendering> fake_candidates(int n) {
  std::vector<CandidateRendering> out;
  for (int i = 0; i < n; ++i) out.push_back({i, {1, 2, 3}, "path_" + std::to_string(i)});
  return out;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST_CASE("candidate rendering") {
  const TopViewMap top = blank_top(100, 100);
  const MetricPath path = diagonal_path(3, 5);
  const CandidateRendering a = render_candidate(top, path, 4);
  const CandidateRendering b = render_candidate(top, path, 4);
  CHECK(a.png == b.png);
  CHECK(a.caption == "path_3");
  CHECK(a.path_id == 3);
  const RgbImage img = decode_png(a.png);
  CHECK(img.width == 400);
  CHECK(img.height == 400);
  // Cell (10, 10) covers pixels x 40..43 and rows (99 - 10) * 4 .. +3.
  for (int dy = 0; dy < 4; ++dy) {
    for (int dx = 0; dx < 4; ++dx) CHECK(img.at(40 + dx, 356 + dy) == Rgb{255, 0, 0});
  }
  CHECK(img.at(200, 200) == Rgb{200, 200, 200});
  CHECK(img.at(1, 1) == Rgb{255, 255, 255});  // label box

  const RgbImage thick = decode_png(render_candidate(top, path, 1, 3).png);
  CHECK(thick.at(11, 88) == Rgb{255, 0, 0});
  CHECK(thick.at(9, 89) == Rgb{255, 0, 0});

  MetricPath outside = path;
  outside.cells.push_back({100, 0});
  CHECK(code_of([&] { render_candidate(top, outside, 1); }) == ErrorCode::kGeometryMismatch);
}

TEST_CASE("prompt contents") {
  const auto cands = fake_candidates(3);
  const VlmRequest req = build_prompt(scenario(), cands);
  CHECK(req.user_text.find(kScenario1) != std::string::npos);
  CHECK(req.user_text.find("office_1") != std::string::npos);
  CHECK(req.user_text.find("office_2") != std::string::npos);
  CHECK(req.user_text.find("step by step") != std::string::npos);
  CHECK(req.user_text.find("FINAL: path_<id>") != std::string::npos);
  CHECK(req.temperature == 0.5);
  REQUIRE(req.images.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(req.images[i].label == "path_" + std::to_string(i));
    CHECK(req.user_text.find("path_" + std::to_string(i)) != std::string::npos);
  }
  CHECK(code_of([&] { build_prompt(scenario(), {}); }) == ErrorCode::kNoCandidates);
  CHECK(code_of([&] { build_prompt(scenario(), cands, "m", 2.5); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("verdict parsing") {
  CHECK(parse_verdict("...therefore FINAL: path_1", 3) == 1);
  CHECK(code_of([] { parse_verdict("FINAL: path_7", 3); }) == ErrorCode::kOutOfRange);
  CHECK(code_of([] { parse_verdict("I cannot decide.", 3); }) == ErrorCode::kMalformedVerdict);
  CHECK(parse_verdict("FINAL: path_0\nsecond thoughts\nFINAL: path_2", 3) == 2);
  CHECK(parse_verdict("path_2 looks long, path_1 is quieter", 3) == 1);
  CHECK(parse_verdict("FINAL: path_1 (not path_2)", 3) == 1);
  CHECK(code_of([] { parse_verdict("mypath_1", 3); }) == ErrorCode::kMalformedVerdict);
  CHECK(code_of([] { parse_verdict("FINAL: path_99999999999999999999", 3); }) == ErrorCode::kOutOfRange);
  for (int k = 0; k < 12; ++k) CHECK(parse_verdict("FINAL: path_" + std::to_string(k), 12) == k);
}

TEST_CASE("majority vote") {
  CHECK(majority_select(std::vector<int>{1, 1, 2, 0, 1}) == 1);
  CHECK(majority_select(std::vector<int>{0, 0, 1, 1, 2}) == 0);
  CHECK(majority_select(std::vector<int>{3}) == 3);
  oracle::Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<int> v(rng.integer(1, 7));
    for (int& x : v) x = rng.integer(0, 4);
    const int m = majority_select(v);
    CHECK(std::find(v.begin(), v.end(), m) != v.end());
    std::shuffle(v.begin(), v.end(), rng.engine());
    CHECK(majority_select(v) == m);
  }
}

TEST_CASE("scripted five-run selection") {
  const auto cands = fake_candidates(3);
  ScriptedVlmClient votes({"FINAL: path_1", "FINAL: path_1", "FINAL: path_2", "FINAL: path_0", "FINAL: path_1"});
  const SelectorVerdict v = vlm_select(votes, scenario(), cands);
  CHECK(v.chosen == 1);
  CHECK(v.runs.size() == 5);
  CHECK(votes.calls() == 5);
  CHECK(v.method == SelectionMethod::kVlm);

  ScriptedVlmClient partial({"garbage", "FINAL: path_9", "no idea", "FINAL: path_2", "FINAL: path_2"});
  const SelectorVerdict p = vlm_select(partial, scenario(), cands);
  CHECK(p.chosen == 2);
  CHECK(std::count_if(p.runs.begin(), p.runs.end(), [](auto& r) { return !r.failure.empty(); }) == 3);
  CHECK(p.runs[0].transcript == "garbage");

  ScriptedVlmClient down({ErrorCode::kTransport}, true);
  try {
    vlm_select(down, scenario(), cands);
    FAIL("expected AllRunsFailed");
  } catch (const AllRunsFailed& e) {
    CHECK(e.code() == ErrorCode::kAllRunsFailed);
    CHECK(e.runs().size() == 5);
  }
  CHECK(down.calls() == 5);

  ScriptedVlmClient rejected({ErrorCode::kUnauthorized}, true);
  CHECK(code_of([&] { vlm_select(rejected, scenario(), cands); }) == ErrorCode::kUnauthorized);
  CHECK(rejected.calls() == 1);

  for (int k = 0; k < 3; ++k) {
    ScriptedVlmClient constant({"FINAL: path_" + std::to_string(k)}, true);
    CHECK(vlm_select(constant, scenario(), cands).chosen == k);
  }
}

TEST_CASE("heuristic selection") {
  CHECK(heuristic_select(std::vector<RiskScore>{{0, 5.0, 1, 1}, {1, 2.0, 1, 1}, {2, 9.0, 1, 1}}) == 1);
  CHECK(heuristic_select(std::vector<RiskScore>{{0, 2.0, 40, 1}, {1, 2.0, 30, 1}}) == 1);
  CHECK(heuristic_select(std::vector<RiskScore>{{0, 2.0, 30, 1}, {1, 2.0, 30, 1}}) == 0);
  CHECK(heuristic_select(std::vector<RiskScore>{{0, 7.0, 3, 1}}) == 0);
  CHECK(code_of([] { heuristic_select({}); }) == ErrorCode::kNoCandidates);
}

TEST_CASE("transcript log") {
  TempDir dir;
  ScriptedVlmClient client({"FINAL: path_1", "junk"}, true);
  const SelectorVerdict v = vlm_select(client, scenario(), fake_candidates(2));
  write_transcript_log(dir.path() / "t.json", scenario(), v);
  std::ifstream in(dir.path() / "t.json");
  const auto doc = nlohmann::json::parse(in);
  CHECK(doc["instruction"] == kScenario1);
  CHECK(doc["runs"].size() == 5);
  CHECK(doc["runs"][0]["transcript"] == "FINAL: path_1");
  CHECK(doc["runs"][0]["path_id"] == 1);
  CHECK(doc["runs"][1]["path_id"].is_null());
  CHECK(doc["chosen"] == 1);
}

TEST_CASE("base64") {
  const auto enc = [](std::string s) {
    return base64_encode(std::vector<std::uint8_t>(s.begin(), s.end()));
  };
  CHECK(enc("") == "");
  CHECK(enc("f") == "Zg==");
  CHECK(enc("fo") == "Zm8=");
  CHECK(enc("foobar") == "Zm9vYmFy");
}

TEST_CASE("chat completion wire format") {
  httplib::Server server;
  nlohmann::json seen;
  std::string auth;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    seen = nlohmann::json::parse(req.body);
    auth = req.get_header_value("Authorization");
    res.set_content(R"({"choices":[{"message":{"role":"assistant","content":"ok FINAL: path_1"}}]})",
                    "application/json");
  });
  server.Post("/deny", [](const httplib::Request&, httplib::Response& res) { res.status = 401; });
  server.Post("/broken", [](const httplib::Request&, httplib::Response& res) { res.status = 500; });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread worker([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  const std::string base = "http://127.0.0.1:" + std::to_string(port);

  VlmRequest req = build_prompt(scenario(), fake_candidates(2));
  ChatCompletionClient client({base + "/v1/chat/completions", "some-model", "secret", 10});
  CHECK(client.complete(req) == "ok FINAL: path_1");
  CHECK(auth == "Bearer secret");
  CHECK(seen["model"] == "some-model");
  CHECK(seen["temperature"] == 0.5);
  REQUIRE(seen["messages"].size() == 2);
  CHECK(seen["messages"][0]["role"] == "system");
  const auto& content = seen["messages"][1]["content"];
  CHECK(content[0]["text"] == req.user_text);
  int images = 0;
  for (const auto& part : content) {
    if (part["type"] != "image_url") continue;
    ++images;
    CHECK(part["image_url"]["url"] == "data:image/png;base64,AQID");
  }
  CHECK(images == 2);

  ChatCompletionClient denied({base + "/deny", "m", "bad", 10});
  CHECK(code_of([&] { denied.complete(req); }) == ErrorCode::kUnauthorized);
  ChatCompletionClient broken({base + "/broken", "m", "", 10});
  CHECK(code_of([&] { broken.complete(req); }) == ErrorCode::kTransport);

  server.stop();
  worker.join();
  ChatCompletionClient offline({base + "/v1/chat/completions", "m", "", 2});
  CHECK(code_of([&] { offline.complete(req); }) == ErrorCode::kTransport);

  CHECK(code_of([] { ChatCompletionClient::response_text("{}"); }) == ErrorCode::kTransport);
  CHECK(code_of([] { ChatCompletionClient::response_text("not json"); }) == ErrorCode::kTransport);
}
