#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "scibench/curriculum.hpp"
#include "support.hpp"

using namespace scibench;
using scibench::testing::Gen;

namespace {

// Integer oracle for targets p_c / q: the largest K with p_c * K <= q * n_c
// for every category, then Hamilton apportionment of K using exact integer
// remainders, ties to the smaller category name.
std::map<std::string, std::size_t> balance_oracle(const std::map<std::string, std::size_t>& n,
                                                  const std::map<std::string, std::size_t>& p, std::size_t q) {
  std::size_t total_available = 0;
  for (const auto& [c, v] : n) total_available += v;
  std::size_t k = 0;
  for (std::size_t cand = 0; cand <= total_available * q; ++cand) {
    bool ok = true;
    for (const auto& [c, pc] : p) ok = ok && pc * cand <= q * n.at(c);
    if (ok) k = cand;
  }
  std::map<std::string, std::size_t> out;
  std::vector<std::pair<std::size_t, std::string>> rem;
  std::size_t assigned = 0;
  for (const auto& [c, pc] : p) {
    out[c] = pc * k / q;
    assigned += out[c];
    rem.emplace_back(pc * k % q, c);
  }
  std::sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  for (const auto& [r, c] : rem) {
    if (assigned == k) break;
    ++out[c];
    ++assigned;
  }
  return out;
}

InstructionPair pair(std::string id, TaskType task, Domain domain, std::string response = "x") {
  InstructionPair p;
  p.id = std::move(id);
  p.instruction = "do";
  p.response = std::move(response);
  p.task = task;
  p.domain = domain;
  return p;
}

class TableScorer : public DifficultyScorer {
 public:
  explicit TableScorer(std::map<std::string, Scores> t) : table_(std::move(t)) {}
  Scores score(const InstructionPair& p) const override { return table_.at(p.id); }

 private:
  std::map<std::string, Scores> table_;
};

}  // namespace

TEST_CASE("balance counts on a worked case") {
  const auto c = balance_counts({{"a", 10}, {"b", 100}}, {{"a", 0.5}, {"b", 0.5}});
  CHECK(c.at("a") == 10);
  CHECK(c.at("b") == 10);

  // K = floor(min(7 / 0.3, 7 / 0.7)) = 10.
  const auto d = balance_counts({{"x", 7}, {"y", 7}}, {{"x", 0.3}, {"y", 0.7}});
  CHECK(d.at("x") == 3);
  CHECK(d.at("y") == 7);
}

TEST_CASE("balance counts match an exhaustive integer oracle") {
  Gen g(29);
  const std::size_t q = 10;
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t cats = g.range(1, 4);
    std::map<std::string, std::size_t> n;
    std::map<std::string, std::size_t> p;
    std::size_t left = q;
    for (std::size_t i = 0; i < cats; ++i) {
      const std::string name(1, static_cast<char>('a' + i));
      n[name] = g.range(1, 25);
      const std::size_t share = i + 1 == cats ? left : g.range(0, left);
      p[name] = share;
      left -= share;
    }
    std::map<std::string, double> targets;
    for (const auto& [c, pc] : p) targets[c] = static_cast<double>(pc) / static_cast<double>(q);
    const auto got = balance_counts(n, targets);
    const auto want = balance_oracle(n, p, q);
    CHECK(got == want);
    for (const auto& [c, v] : got) CHECK(v <= n.at(c));
  }
}

TEST_CASE("balance target validation") {
  CHECK_THROWS_AS(balance_counts({{"a", 1}}, {{"a", 0.9}}), Error);
  CHECK_THROWS_AS(balance_counts({{"a", 1}}, {{"a", 1.2}, {"b", -0.2}}), Error);
  try {
    balance_counts({{"a", 1}}, {{"a", 0.5}, {"b", 0.5}});
    FAIL("expected kMissingCategory");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMissingCategory);
  }
}

TEST_CASE("balance_proportions keeps input order and is seeded") {
  std::vector<InstructionPair> pairs;
  for (int i = 0; i < 30; ++i) pairs.push_back(pair("p" + std::to_string(i), TaskType::kOther, Domain::kPatent));
  for (int i = 30; i < 40; ++i) pairs.push_back(pair("p" + std::to_string(i), TaskType::kOther, Domain::kGeneral));
  const std::map<std::string, double> t{{"patent", 0.5}, {"general", 0.5}};
  const auto a = balance_proportions(pairs, t, 1);
  CHECK(a.size() == 20);
  CHECK(balance_proportions(pairs, t, 1) == a);
  CHECK(std::count_if(a.begin(), a.end(), [](const auto& x) { return x.domain == Domain::kGeneral; }) == 10);
  std::vector<std::size_t> pos;
  for (const auto& x : a) pos.push_back(std::stoul(x.id.substr(1)));
  CHECK(std::is_sorted(pos.begin(), pos.end()));
  CHECK(balance_proportions(pairs, t, 2) != a);
}

TEST_CASE("default scorer") {
  DefaultScorer s;
  auto p = pair("a", TaskType::kRelationshipComplete, Domain::kSciencePaper, "one two three four");
  s.length_norm = 8;
  CHECK(s.score(p).difficulty == doctest::Approx(0.5));
  CHECK(s.score(p).quality == doctest::Approx(0.8));
  p.origin = Source::kSynthetic;
  CHECK(s.score(p).quality == 1.0);
  // Han characters count one token each.
  p.response = "\xE7\x9F\xB3\xE5\xA2\xA8\xE7\x83\xAF";
  CHECK(s.score(p).difficulty == doctest::Approx(3.0 / 8.0));

  const auto custom = default_scorer_from_json(nlohmann::json::parse(R"({"length_norm": 2, "origin_priors": {"patent": 0.1}})"));
  CHECK(custom.length_norm == 2);
  CHECK(custom.origin_prior.at(Source::kPatent) == 0.1);
  CHECK_THROWS_AS(default_scorer_from_json(nlohmann::json::parse(R"({"task_weights": {"other": 2}})")), Error);
}

TEST_CASE("stage schedule ordering and replay") {
  StageConfig cfg;
  cfg.stage1_tasks = {TaskType::kNamedEntityRecognition};
  cfg.stage2_tasks = {TaskType::kAbstractToTitle};
  cfg.stage1_target_count = 4;
  cfg.stage2_new_count = 2;
  cfg.replay_fraction = 0.5;

  std::vector<InstructionPair> pairs{
      pair("s1", TaskType::kNamedEntityRecognition, Domain::kPatent),
      pair("s2", TaskType::kNamedEntityRecognition, Domain::kPatent),
      pair("g1", TaskType::kAbstractToTitle, Domain::kPatent),
      pair("s3", TaskType::kNamedEntityRecognition, Domain::kPatent),
      pair("s4", TaskType::kNamedEntityRecognition, Domain::kPatent),
      pair("g2", TaskType::kAbstractToTitle, Domain::kPatent),
      pair("o1", TaskType::kOther, Domain::kPatent),
  };
  TableScorer scorer({{"s1", {0.5, 0.9}},
                      {"s2", {0.1, 0.9}},
                      {"s3", {0.2, 1.0}},
                      {"s4", {0.1, 0.9}},
                      {"g1", {0.9, 0.5}},
                      {"g2", {0.3, 0.5}}});
  const auto s = build_stage_schedule(pairs, cfg, scorer, 42);
  std::vector<std::string> stage1;
  std::vector<ScheduleEntry> stage2;
  for (const auto& e : s.entries) {
    if (e.stage == 1) {
      stage1.push_back(e.pair_id);
    } else {
      stage2.push_back(e);
    }
  }
  // Quality descending, then difficulty ascending, stable on full ties.
  CHECK(stage1 == std::vector<std::string>{"s3", "s2", "s4", "s1"});
  CHECK(s.stage1_count == 4);
  CHECK(s.stage2_new_count == 2);
  CHECK(s.stage2_replay_count == 2);
  CHECK(stage2.size() == 4);
  CHECK(std::count_if(stage2.begin(), stage2.end(), [](const auto& e) { return e.replay; }) == 2);
  for (std::size_t i = 1; i < stage2.size(); ++i) {
    CHECK(stage2[i - 1].quality >= stage2[i].quality);
    if (stage2[i - 1].quality == stage2[i].quality) CHECK(stage2[i - 1].difficulty <= stage2[i].difficulty);
  }
  CHECK(s.warnings.empty());
  CHECK(build_stage_schedule(pairs, cfg, scorer, 42, 3).entries == s.entries);

  cfg.replay_fraction = 0.6;  // floor(2.4) = 2
  CHECK(build_stage_schedule(pairs, cfg, scorer, 42).stage2_replay_count == 2);
  cfg.replay_fraction = 0.0;
  CHECK(build_stage_schedule(pairs, cfg, scorer, 42).stage2_replay_count == 0);
  cfg.stage1_target_count = 5;
  CHECK(build_stage_schedule(pairs, cfg, scorer, 42).warnings.size() == 1);
}

TEST_CASE("empty stages are errors") {
  StageConfig cfg = StageConfig::defaults();
  DefaultScorer scorer;
  std::vector<InstructionPair> only_gen{pair("g", TaskType::kAbstractToTitle, Domain::kGeneral)};
  try {
    build_stage_schedule(only_gen, cfg, scorer, 1);
    FAIL("expected kEmptyStage");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kEmptyStage);
  }
  std::vector<InstructionPair> only_struct{pair("s", TaskType::kNamedEntityRecognition, Domain::kGeneral)};
  CHECK_THROWS_AS(build_stage_schedule(only_struct, cfg, scorer, 1), Error);
}

TEST_CASE("stage config parsing") {
  const auto c = stage_config_from_json(nlohmann::json::parse(
      R"({"stage1_tasks": ["named_entity_recognition"], "replay_fraction": 0.25, "quality_order": "asc"})"));
  CHECK(c.stage1_tasks == std::set<TaskType>{TaskType::kNamedEntityRecognition});
  CHECK(c.replay_fraction == 0.25);
  CHECK(c.quality_order == SortDirection::kAscending);
  CHECK(c.stage2_tasks == StageConfig::defaults().stage2_tasks);
  CHECK_THROWS_AS(stage_config_from_json(nlohmann::json::parse(R"({"replay_fraction": 2})")), Error);
  CHECK_THROWS_AS(stage_config_from_json(nlohmann::json::parse(R"({"quality_order": "up"})")), Error);
}
