#pragma once

// Pairwise judging with position swap: every question is judged twice, once
// with each answer in the first slot, and the two runs are averaged.

#include <array>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "scibench/http_client.hpp"
#include "scibench/records.hpp"

namespace scibench {

enum class SlotOrder { kAFirst, kBFirst };
std::string_view to_string(SlotOrder o);
SlotOrder parse_slot_order(std::string_view s);

struct JudgeRequest {
  std::string question_id;
  SlotOrder order = SlotOrder::kAFirst;
  std::string prompt;
};

/// Scores for the answer in slot 1 and slot 2 of the prompt.
struct JudgeScores {
  double score_1 = 0.0;
  double score_2 = 0.0;
};

class ExternalJudge {
 public:
  virtual ~ExternalJudge() = default;
  /// Must be thread-safe.
  virtual JudgeScores score(const JudgeRequest& request) = 0;
};

/// Wraps a callable; handy for deterministic mocks.
class FunctionJudge : public ExternalJudge {
 public:
  using Fn = std::function<JudgeScores(const JudgeRequest&)>;
  explicit FunctionJudge(Fn fn) : fn_(std::move(fn)) {}
  JudgeScores score(const JudgeRequest& request) override { return fn_(request); }

 private:
  Fn fn_;
};

/// Offline judge keyed on (question_id, order). Fixture lines:
/// {"question_id": ..., "order": "a_first"|"b_first", "score_1": x, "score_2": y}
class FixtureJudge : public ExternalJudge {
 public:
  using Key = std::pair<std::string, SlotOrder>;
  explicit FixtureJudge(std::map<Key, JudgeScores> table) : table_(std::move(table)) {}
  static FixtureJudge from_file(const std::filesystem::path& path);
  /// Throws kJudgeUnavailable when the key is missing.
  JudgeScores score(const JudgeRequest& request) override;

 private:
  std::map<Key, JudgeScores> table_;
};

/// Parses {"score_1": real, "score_2": real}; anything else is
/// kMalformedJudgeReply.
JudgeScores parse_judge_reply(std::string_view body);

/// POSTs {"prompt"} (SCIBENCH_JUDGE_URL / SCIBENCH_JUDGE_API_KEY).
class HttpJudge : public ExternalJudge {
 public:
  explicit HttpJudge(HttpEndpoint endpoint);
  JudgeScores score(const JudgeRequest& request) override;

 private:
  JsonHttpClient client_;
};

/// Versioned prompt asset with {question}, {answer_1}, {answer_2}.
struct PromptTemplate {
  std::string version;
  std::string text;

  /// Single left-to-right pass; substituted values are never re-expanded
  /// and unknown braces are copied through.
  std::string render(std::string_view question, std::string_view answer_1, std::string_view answer_2) const;

  static PromptTemplate builtin_v1();
  static PromptTemplate from_file(const std::filesystem::path& path, std::string version);
};

enum class Winner { kA, kB, kTie };
std::string_view to_string(Winner w);

struct JudgeRun {
  SlotOrder order = SlotOrder::kAFirst;
  double score_first = 0.0;
  double score_second = 0.0;
};

struct PairVerdict {
  std::string question_id;
  double score_a = 0.0;
  double score_b = 0.0;
  Winner winner = Winner::kTie;
  std::array<JudgeRun, 2> raw_runs{};
};

/// a iff score_a > score_b + margin, b iff score_b > score_a + margin.
Winner decide_winner(double score_a, double score_b, double tie_margin);

/// Throws kInvalidConfig for a negative margin.
PairVerdict judge_pair(const JudgeItem& item, ExternalJudge& judge, const PromptTemplate& prompt,
                       double tie_margin = 0.0);

struct Tally {
  std::size_t wins_a = 0;
  std::size_t wins_b = 0;
  std::size_t ties = 0;

  std::size_t total() const { return wins_a + wins_b + ties; }
  bool operator==(const Tally&) const = default;
};

Tally tally(const std::vector<PairVerdict>& verdicts);

/// Judges every item with at most `max_in_flight` questions outstanding.
/// Verdicts come back sorted by question_id.
std::vector<PairVerdict> judge_all(const std::vector<JudgeItem>& items, ExternalJudge& judge,
                                   const PromptTemplate& prompt, double tie_margin, std::size_t max_in_flight);

std::string to_line(const PairVerdict& v);

}  // namespace scibench
