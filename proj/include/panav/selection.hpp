#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "panav/error.hpp"
#include "panav/grid_maps.hpp"
#include "panav/path_planning.hpp"
#include "panav/privacy_field.hpp"
#include "panav/scene.hpp"

namespace panav {

/// Number of independent selector runs whose verdicts are voted on.
inline constexpr int kVoteRuns = 5;

struct CandidateRendering {
  int path_id = -1;
  std::vector<std::uint8_t> png;
  std::string caption;  // "path_<id>"
};

/// Top-view map with the path drawn in pure red and a "path_<id>" label in the
/// top-left corner. `stroke_width` is in pixels; 0 means one cell.
CandidateRendering render_candidate(const TopViewMap& top, const MetricPath& path, int scale,
                                    int stroke_width = 0);

struct VlmImage {
  std::string label;
  std::vector<std::uint8_t> png;
};

struct VlmRequest {
  std::string model;
  double temperature = 0.5;
  std::string system_text;
  std::string user_text;
  std::vector<VlmImage> images;
};

/// Zero-shot chain-of-thought prompt over the labeled candidate maps.
VlmRequest build_prompt(const Episode& episode, std::span<const CandidateRendering> candidates,
                        std::string model = {}, double temperature = 0.5);

/// Path id from the last "FINAL: path_<id>" in the transcript, else the last
/// standalone "path_<n>" token. Throws kMalformedVerdict or kOutOfRange.
int parse_verdict(std::string_view transcript, int candidate_count);

/// Most frequent id; ties go to the lowest id.
int majority_select(std::span<const int> verdicts);

/// Chat-completion backend. Implementations throw Error with kTransport for
/// recoverable failures and kUnauthorized for rejected credentials.
class VlmClient {
 public:
  virtual ~VlmClient() = default;
  virtual std::string complete(const VlmRequest& request) = 0;
};

/// Replays a fixed script, one entry per call; an ErrorCode entry is thrown.
class ScriptedVlmClient : public VlmClient {
 public:
  using Reply = std::variant<std::string, ErrorCode>;
  explicit ScriptedVlmClient(std::vector<Reply> script, bool repeat_last = false);

  std::string complete(const VlmRequest& request) override;
  std::size_t calls() const { return requests_.size(); }
  const std::vector<VlmRequest>& requests() const { return requests_; }

 private:
  std::vector<Reply> script_;
  bool repeat_last_;
  std::vector<VlmRequest> requests_;
};

struct ChatCompletionConfig {
  std::string endpoint;  // e.g. https://host/v1/chat/completions
  std::string model;
  std::string api_key;
  int timeout_seconds = 120;
};

/// OpenAI-style chat-completion client: text plus base-64 PNG image parts.
class ChatCompletionClient : public VlmClient {
 public:
  explicit ChatCompletionClient(ChatCompletionConfig config);
  std::string complete(const VlmRequest& request) override;

  /// Request body as sent on the wire.
  static std::string request_body(const VlmRequest& request);
  /// Assistant text from a response body; throws kTransport when absent.
  static std::string response_text(std::string_view body);

 private:
  ChatCompletionConfig config_;
};

std::string base64_encode(std::span<const std::uint8_t> bytes);

enum class SelectionMethod { kVlm, kHeuristic };
std::string_view to_string(SelectionMethod method);

struct SelectorRun {
  std::string transcript;
  std::optional<int> path_id;
  std::string failure;  // empty when parsed
};

struct SelectorVerdict {
  std::vector<SelectorRun> runs;
  int chosen = -1;
  SelectionMethod method = SelectionMethod::kHeuristic;
};

/// Raised when every run failed; keeps the per-run causes.
class AllRunsFailed : public Error {
 public:
  AllRunsFailed(const std::string& message, std::vector<SelectorRun> runs)
      : Error(ErrorCode::kAllRunsFailed, message), runs_(std::move(runs)) {}
  const std::vector<SelectorRun>& runs() const { return runs_; }

 private:
  std::vector<SelectorRun> runs_;
};

/// Five independent queries, each parsed; failed runs are recorded and left out
/// of the vote. Unauthorized is rethrown at once.
SelectorVerdict vlm_select(VlmClient& client, const Episode& episode,
                           std::span<const CandidateRendering> candidates, std::string model = {},
                           double temperature = 0.5);

/// Lowest risk; ties by shorter world_length, then lower path_id.
int heuristic_select(std::span<const RiskScore> scores);

/// One JSON document with every raw transcript and parsed id.
void write_transcript_log(const std::filesystem::path& file, const Episode& episode,
                          const SelectorVerdict& verdict);

}  // namespace panav
