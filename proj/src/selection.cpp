#include "panav/selection.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

#include "json.hpp"
#include "panav/image.hpp"

namespace panav {

namespace {

constexpr Rgb kPathRed{255, 0, 0};

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

int checked_id(std::string_view digits, int candidate_count) {
  int id = 0;
  auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), id);
  if (ec != std::errc() || end != digits.data() + digits.size() || id >= candidate_count) {
    fail(ErrorCode::kOutOfRange, "path_" + std::string(digits) + " is not one of " +
                                     std::to_string(candidate_count) + " candidates");
  }
  return id;
}

}  // namespace

CandidateRendering render_candidate(const TopViewMap& top, const MetricPath& path, int scale,
                                    int stroke_width) {
  if (scale < 1) fail(ErrorCode::kInvalidArgument, "render scale must be >= 1");
  const GridGeometry& g = top.geometry;
  for (const Cell& c : path.cells) {
    if (!g.contains(c)) fail(ErrorCode::kGeometryMismatch, "path leaves the top-view grid");
  }
  RgbImage image(g.width * scale, g.height * scale, {255, 255, 255});
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      const std::size_t i = g.index({x, y});
      if (!top.occupied[i]) continue;
      const int py = (g.height - 1 - y) * scale;
      image.fill_rect(x * scale, py, (x + 1) * scale, py + scale, top.color[i]);
    }
  }
  const int stroke = std::max(scale, stroke_width);
  const int pad = (stroke - scale) / 2;
  for (const Cell& c : path.cells) {
    const int px = c.x * scale - pad;
    const int py = (g.height - 1 - c.y) * scale - pad;
    image.fill_rect(px, py, px + stroke, py + stroke, kPathRed);
  }

  CandidateRendering out;
  out.path_id = path.path_id;
  out.caption = "path_" + std::to_string(path.path_id);
  const int font = std::max(1, image.width / 200);
  const int margin = font * 2;
  image.fill_rect(0, 0, text_width(out.caption, font) + 2 * margin, 7 * font + 2 * margin,
                  {255, 255, 255});
  draw_text(image, margin, margin, out.caption, font, {0, 0, 0});
  out.png = encode_png(image);
  return out;
}

VlmRequest build_prompt(const Episode& episode, std::span<const CandidateRendering> candidates,
                        std::string model, double temperature) {
  if (candidates.empty()) fail(ErrorCode::kNoCandidates, "no candidate paths to choose from");
  if (!(temperature >= 0.0 && temperature <= 2.0)) {
    fail(ErrorCode::kInvalidArgument, "temperature must be in [0, 2]");
  }
  VlmRequest req;
  req.model = std::move(model);
  req.temperature = temperature;
  req.system_text =
      "You are the route planner of a mobile service robot in a shared office building. "
      "You choose routes that keep the robot's task and the people around it private.";

  std::ostringstream user;
  user << "Navigational instruction: " << episode.instruction << "\n"
       << "Start room: " << episode.start_room << "\n"
       << "Destination room: " << episode.goal_room << "\n\n"
       << "You are given " << candidates.size()
       << " top-view maps of the building. Each map shows one candidate path in red and is "
          "labeled with its path ID:\n";
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    user << "Image " << (i + 1) << ": " << candidates[i].caption << "\n";
  }
  user << "\nSelect the path that best preserves privacy for this task: avoid passing offices, "
          "conference rooms and other places with human activity, while still reaching the "
          "destination.\n"
       << "Let's think step by step. After your reasoning, end your answer with one line of the "
          "exact form:\nFINAL: path_<id>\n";
  req.user_text = user.str();
  for (const auto& c : candidates) req.images.push_back(VlmImage{c.caption, c.png});
  return req;
}

int parse_verdict(std::string_view transcript, int candidate_count) {
  if (candidate_count < 1) fail(ErrorCode::kInvalidArgument, "candidate_count must be >= 1");
  static const std::regex kFinal(R"(FINAL:\s*path_(\d+))");
  const std::string text(transcript);
  std::string last;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), kFinal); it != std::sregex_iterator();
       ++it) {
    last = (*it)[1].str();
  }
  if (!last.empty()) return checked_id(last, candidate_count);

  // Fallback: last standalone path_<digits> token.
  std::string_view found;
  for (std::size_t pos = text.find("path_"); pos != std::string::npos; pos = text.find("path_", pos + 1)) {
    if (pos > 0 && is_word_char(text[pos - 1])) continue;
    std::size_t end = pos + 5;
    while (end < text.size() && std::isdigit(static_cast<unsigned char>(text[end]))) ++end;
    if (end == pos + 5 || (end < text.size() && is_word_char(text[end]))) continue;
    found = std::string_view(text).substr(pos + 5, end - pos - 5);
  }
  if (found.empty()) fail(ErrorCode::kMalformedVerdict, "no path id in transcript");
  return checked_id(found, candidate_count);
}

int majority_select(std::span<const int> verdicts) {
  if (verdicts.empty()) fail(ErrorCode::kInvalidArgument, "no verdicts to vote on");
  std::map<int, int> histogram;
  for (int v : verdicts) ++histogram[v];
  int best = histogram.begin()->first;
  int best_count = 0;
  for (const auto& [id, count] : histogram) {  // ascending id: first max wins
    if (count > best_count) {
      best = id;
      best_count = count;
    }
  }
  return best;
}

ScriptedVlmClient::ScriptedVlmClient(std::vector<Reply> script, bool repeat_last)
    : script_(std::move(script)), repeat_last_(repeat_last) {}

std::string ScriptedVlmClient::complete(const VlmRequest& request) {
  const std::size_t i = requests_.size();
  requests_.push_back(request);
  if (script_.empty() || (i >= script_.size() && !repeat_last_)) {
    fail(ErrorCode::kTransport, "script exhausted");
  }
  const Reply& reply = script_[std::min(i, script_.size() - 1)];
  if (const auto* code = std::get_if<ErrorCode>(&reply)) {
    fail(*code, "scripted failure on call " + std::to_string(i));
  }
  return std::get<std::string>(reply);
}

std::string_view to_string(SelectionMethod method) {
  return method == SelectionMethod::kVlm ? "vlm" : "heuristic";
}

SelectorVerdict vlm_select(VlmClient& client, const Episode& episode,
                           std::span<const CandidateRendering> candidates, std::string model,
                           double temperature) {
  const VlmRequest request = build_prompt(episode, candidates, std::move(model), temperature);
  const int count = static_cast<int>(candidates.size());

  SelectorVerdict verdict;
  verdict.method = SelectionMethod::kVlm;
  std::vector<int> votes;
  for (int run = 0; run < kVoteRuns; ++run) {
    SelectorRun record;
    try {
      record.transcript = client.complete(request);
      const int local = parse_verdict(record.transcript, count);
      record.path_id = candidates[static_cast<std::size_t>(local)].path_id;
      votes.push_back(*record.path_id);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kUnauthorized) throw;
      record.failure = e.what();
    }
    verdict.runs.push_back(std::move(record));
  }
  if (votes.empty()) {
    std::string causes;
    for (std::size_t i = 0; i < verdict.runs.size(); ++i) {
      causes += (i ? "; " : "") + std::string("run ") + std::to_string(i) + ": " + verdict.runs[i].failure;
    }
    throw AllRunsFailed("all " + std::to_string(kVoteRuns) + " selector runs failed (" + causes + ")",
                        verdict.runs);
  }
  verdict.chosen = majority_select(votes);
  return verdict;
}

int heuristic_select(std::span<const RiskScore> scores) {
  if (scores.empty()) fail(ErrorCode::kNoCandidates, "no scored candidates");
  const auto best = std::min_element(scores.begin(), scores.end(), [](const RiskScore& a, const RiskScore& b) {
    if (a.risk != b.risk) return a.risk < b.risk;
    if (a.world_length != b.world_length) return a.world_length < b.world_length;
    return a.path_id < b.path_id;
  });
  return best->path_id;
}

void write_transcript_log(const std::filesystem::path& file, const Episode& episode,
                          const SelectorVerdict& verdict) {
  nlohmann::json doc;
  doc["instruction"] = episode.instruction;
  doc["start_room"] = episode.start_room;
  doc["goal_room"] = episode.goal_room;
  doc["method"] = std::string(to_string(verdict.method));
  doc["chosen"] = verdict.chosen;
  doc["runs"] = nlohmann::json::array();
  for (const auto& run : verdict.runs) {
    nlohmann::json r;
    r["transcript"] = run.transcript;
    r["path_id"] = run.path_id ? nlohmann::json(*run.path_id) : nlohmann::json(nullptr);
    r["failure"] = run.failure;
    doc["runs"].push_back(std::move(r));
  }
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIoFailure, "cannot write " + file.string());
  out << doc.dump(2) << '\n';
  if (!out) fail(ErrorCode::kIoFailure, "write failed for " + file.string());
}

}  // namespace panav
