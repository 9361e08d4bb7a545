#include "scibench/judge.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "scibench/io.hpp"
#include "scibench/parallel.hpp"

namespace scibench {

using json = nlohmann::json;

namespace {

constexpr std::string_view kPromptV1 =
    "You are reviewing two answers to the same scientific question.\n"
    "Rate each answer from 1 to 10 for correctness, completeness and clarity.\n"
    "Judge the content only; the order in which the answers appear carries no information.\n"
    "\n"
    "[Question]\n"
    "{question}\n"
    "\n"
    "[Answer 1]\n"
    "{answer_1}\n"
    "\n"
    "[Answer 2]\n"
    "{answer_2}\n"
    "\n"
    "Reply with a JSON object and nothing else: {\"score_1\": <number>, \"score_2\": <number>}\n";

double number_field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw Error(ErrorCode::kMalformedJudgeReply, std::string("missing ") + key);
  if (!it->is_number()) throw Error(ErrorCode::kMalformedJudgeReply, std::string(key) + " is not a number");
  const double v = it->get<double>();
  if (!std::isfinite(v)) throw Error(ErrorCode::kMalformedJudgeReply, std::string(key) + " is not finite");
  return v;
}

}  // namespace

std::string_view to_string(SlotOrder o) { return o == SlotOrder::kAFirst ? "a_first" : "b_first"; }

SlotOrder parse_slot_order(std::string_view s) {
  if (s == "a_first") return SlotOrder::kAFirst;
  if (s == "b_first") return SlotOrder::kBFirst;
  throw Error(ErrorCode::kInvalidEnumValue, "order \"" + std::string(s) + "\"");
}

std::string_view to_string(Winner w) {
  switch (w) {
    case Winner::kA: return "a";
    case Winner::kB: return "b";
    case Winner::kTie: return "tie";
  }
  return "tie";
}

FixtureJudge FixtureJudge::from_file(const std::filesystem::path& path) {
  std::map<Key, JudgeScores> table;
  io::for_each_line(path, [&](std::string_view line, std::size_t n) {
    if (line.empty() || line.front() == '#') return;
    const std::string where = path.string() + ":" + std::to_string(n);
    json j;
    try {
      j = json::parse(line);
      const Key key{j.at("question_id").get<std::string>(), parse_slot_order(j.at("order").get<std::string>())};
      table[key] = {number_field(j, "score_1"), number_field(j, "score_2")};
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kMalformedRecord, where + ": " + e.what());
    } catch (const Error& e) {
      throw Error(e.code(), where + ": " + e.detail());
    }
  });
  return FixtureJudge(std::move(table));
}

JudgeScores FixtureJudge::score(const JudgeRequest& request) {
  auto it = table_.find({request.question_id, request.order});
  if (it == table_.end()) {
    throw Error(ErrorCode::kJudgeUnavailable,
                "no fixture entry for " + request.question_id + " " + std::string(to_string(request.order)));
  }
  return it->second;
}

JudgeScores parse_judge_reply(std::string_view body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception&) {
    throw Error(ErrorCode::kMalformedJudgeReply, "reply is not JSON");
  }
  if (!j.is_object()) throw Error(ErrorCode::kMalformedJudgeReply, "reply is not an object");
  return {number_field(j, "score_1"), number_field(j, "score_2")};
}

HttpJudge::HttpJudge(HttpEndpoint endpoint) : client_(std::move(endpoint), ErrorCode::kJudgeUnavailable) {}

JudgeScores HttpJudge::score(const JudgeRequest& request) {
  const json body = {{"prompt", request.prompt}};
  return parse_judge_reply(client_.post(body.dump(-1, ' ', false, json::error_handler_t::replace)));
}

std::string PromptTemplate::render(std::string_view question, std::string_view answer_1,
                                   std::string_view answer_2) const {
  static constexpr std::array<std::pair<std::string_view, int>, 3> kSlots{
      {{"{question}", 0}, {"{answer_1}", 1}, {"{answer_2}", 2}}};
  const std::array<std::string_view, 3> values{question, answer_1, answer_2};
  std::string out;
  out.reserve(text.size() + question.size() + answer_1.size() + answer_2.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '{') {
      bool hit = false;
      for (const auto& [name, slot] : kSlots) {
        if (text.compare(i, name.size(), name) == 0) {
          out += values[static_cast<std::size_t>(slot)];
          i += name.size();
          hit = true;
          break;
        }
      }
      if (hit) continue;
    }
    out += text[i++];
  }
  return out;
}

PromptTemplate PromptTemplate::builtin_v1() { return {"v1", std::string(kPromptV1)}; }

PromptTemplate PromptTemplate::from_file(const std::filesystem::path& path, std::string version) {
  return {std::move(version), io::read_file(path)};
}

Winner decide_winner(double score_a, double score_b, double tie_margin) {
  if (score_a > score_b + tie_margin) return Winner::kA;
  if (score_b > score_a + tie_margin) return Winner::kB;
  return Winner::kTie;
}

PairVerdict judge_pair(const JudgeItem& item, ExternalJudge& judge, const PromptTemplate& prompt,
                       double tie_margin) {
  if (!(tie_margin >= 0.0)) throw Error(ErrorCode::kInvalidConfig, "tie_margin must be >= 0");
  const JudgeScores first =
      judge.score({item.question_id, SlotOrder::kAFirst, prompt.render(item.question, item.answer_a, item.answer_b)});
  const JudgeScores second =
      judge.score({item.question_id, SlotOrder::kBFirst, prompt.render(item.question, item.answer_b, item.answer_a)});
  PairVerdict v;
  v.question_id = item.question_id;
  v.score_a = (first.score_1 + second.score_2) / 2.0;
  v.score_b = (first.score_2 + second.score_1) / 2.0;
  v.winner = decide_winner(v.score_a, v.score_b, tie_margin);
  v.raw_runs = {JudgeRun{SlotOrder::kAFirst, first.score_1, first.score_2},
                JudgeRun{SlotOrder::kBFirst, second.score_1, second.score_2}};
  return v;
}

Tally tally(const std::vector<PairVerdict>& verdicts) {
  Tally t;
  for (const auto& v : verdicts) {
    switch (v.winner) {
      case Winner::kA: ++t.wins_a; break;
      case Winner::kB: ++t.wins_b; break;
      case Winner::kTie: ++t.ties; break;
    }
  }
  return t;
}

std::vector<PairVerdict> judge_all(const std::vector<JudgeItem>& items, ExternalJudge& judge,
                                   const PromptTemplate& prompt, double tie_margin, std::size_t max_in_flight) {
  std::vector<const JudgeItem*> order;
  order.reserve(items.size());
  for (const auto& it : items) order.push_back(&it);
  std::stable_sort(order.begin(), order.end(),
                   [](const JudgeItem* a, const JudgeItem* b) { return a->question_id < b->question_id; });

  // Interleaved assignment so a slow question does not stall a whole chunk.
  std::vector<PairVerdict> verdicts(order.size());
  const std::size_t workers = std::max<std::size_t>(1, std::min(max_in_flight, order.size()));
  parallel_for(workers, workers, [&](std::size_t w) {
    for (std::size_t i = w; i < order.size(); i += workers) {
      verdicts[i] = judge_pair(*order[i], judge, prompt, tie_margin);
    }
  });
  return verdicts;
}

std::string to_line(const PairVerdict& v) {
  nlohmann::ordered_json j;
  j["question_id"] = v.question_id;
  j["score_a"] = v.score_a;
  j["score_b"] = v.score_b;
  j["winner"] = to_string(v.winner);
  j["raw_runs"] = nlohmann::ordered_json::array();
  for (const auto& r : v.raw_runs) {
    j["raw_runs"].push_back(
        {{"order", to_string(r.order)}, {"score_first", r.score_first}, {"score_second", r.score_second}});
  }
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

}  // namespace scibench
