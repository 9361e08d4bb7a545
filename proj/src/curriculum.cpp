#include "scibench/curriculum.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numeric>
#include <random>

#include "scibench/io.hpp"
#include "scibench/parallel.hpp"
#include "scibench/text.hpp"

namespace scibench {

namespace {

using json = nlohmann::json;

std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = std::mt19937_64::max() - std::mt19937_64::max() % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

// First `k` positions of a seeded partial Fisher-Yates shuffle, sorted.
std::vector<std::size_t> sample_sorted(std::vector<std::size_t> items, std::size_t k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  k = std::min(k, items.size());
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(bounded(rng, items.size() - i));
    std::swap(items[i], items[j]);
  }
  items.resize(k);
  std::sort(items.begin(), items.end());
  return items;
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view salt) { return io::fnv1a64(salt, seed ^ 0xcbf29ce484222325ULL); }

std::set<TaskType> tasks_from_json(const json& j) {
  std::set<TaskType> out;
  for (const auto& t : j) out.insert(parse_task_type(t.get<std::string>()));
  return out;
}

SortDirection direction_from(const std::string& s) {
  if (s == "asc" || s == "ascending") return SortDirection::kAscending;
  if (s == "desc" || s == "descending") return SortDirection::kDescending;
  throw Error(ErrorCode::kInvalidConfig, "sort direction must be asc or desc, got \"" + s + "\"");
}

}  // namespace

std::string domain_category(const InstructionPair& p) { return std::string(to_string(p.domain)); }

std::map<std::string, std::size_t> balance_counts(const std::map<std::string, std::size_t>& available,
                                                  const std::map<std::string, double>& targets) {
  if (targets.empty()) throw Error(ErrorCode::kInvalidTargets, "no targets");
  double sum = 0.0;
  for (const auto& [c, t] : targets) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw Error(ErrorCode::kInvalidTargets, fmt::format("target {}={}", c, t));
    sum += t;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw Error(ErrorCode::kInvalidTargets, fmt::format("targets sum to {}", sum));
  for (const auto& [c, t] : targets) {
    auto it = available.find(c);
    if (it == available.end() || it->second == 0) throw Error(ErrorCode::kMissingCategory, c);
  }

  constexpr double kEps = 1e-9;
  double limit = std::numeric_limits<double>::infinity();
  for (const auto& [c, t] : targets) {
    if (t > 0) limit = std::min(limit, static_cast<double>(available.at(c)) / t);
  }
  auto fits = [&](std::size_t total) {
    for (const auto& [c, t] : targets) {
      if (t * static_cast<double>(total) > static_cast<double>(available.at(c)) + kEps) return false;
    }
    return true;
  };
  auto total = static_cast<std::size_t>(std::floor(limit + kEps));
  while (total > 0 && !fits(total)) --total;

  std::map<std::string, std::size_t> counts;
  // remainders quantized so that float noise cannot reorder exact ties
  std::vector<std::pair<long long, std::string>> remainders;
  std::size_t assigned = 0;
  for (const auto& [c, t] : targets) {
    const double exact = t * static_cast<double>(total);
    const auto base = static_cast<std::size_t>(std::floor(exact + kEps));
    counts[c] = base;
    assigned += base;
    remainders.emplace_back(std::llround((exact - static_cast<double>(base)) * 1e9), c);
  }
  // largest fractional part first; std::map order already breaks ties by name
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (const auto& [frac, c] : remainders) {
    if (assigned >= total) break;
    if (counts[c] + 1 > available.at(c)) continue;
    ++counts[c];
    ++assigned;
  }
  return counts;
}

std::vector<InstructionPair> balance_proportions(const std::vector<InstructionPair>& pairs,
                                                 const std::map<std::string, double>& targets, std::uint64_t seed,
                                                 const CategoryFn& category) {
  std::map<std::string, std::vector<std::size_t>> by_category;
  for (std::size_t i = 0; i < pairs.size(); ++i) by_category[category(pairs[i])].push_back(i);
  std::map<std::string, std::size_t> available;
  for (const auto& [c, idx] : by_category) available[c] = idx.size();

  const auto counts = balance_counts(available, targets);
  std::vector<std::size_t> keep;
  for (const auto& [c, k] : counts) {
    if (k == 0) continue;
    auto chosen = sample_sorted(by_category.at(c), k, derive_seed(seed, c));
    keep.insert(keep.end(), chosen.begin(), chosen.end());
  }
  std::sort(keep.begin(), keep.end());
  std::vector<InstructionPair> out;
  out.reserve(keep.size());
  for (std::size_t i : keep) out.push_back(pairs[i]);
  return out;
}

DefaultScorer::DefaultScorer() {
  task_weight = {
      {TaskType::kNamedEntityRecognition, 0.6},
      {TaskType::kRelationExtraction, 0.7},
      {TaskType::kKnowledgeLinking, 0.6},
      {TaskType::kMachineTranslation, 0.8},
      {TaskType::kAbstractExtract, 0.5},
      {TaskType::kRelationPredict, 0.8},
      {TaskType::kKnowledgeExtract, 0.6},
      {TaskType::kSemanticMatching, 0.7},
      {TaskType::kAbstractToTitle, 0.8},
      {TaskType::kSummaryToTitle, 0.8},
      {TaskType::kSummaryToTopic, 0.7},
      {TaskType::kTitleToKeywords, 0.6},
      {TaskType::kTopicAndSummaryToTitle, 0.9},
      {TaskType::kTopicModeling, 0.7},
      {TaskType::kKnowledgeFusion, 0.9},
      {TaskType::kRelationshipComplete, 1.0},
      {TaskType::kGeneralDialogue, 0.5},
      {TaskType::kOther, 0.5},
  };
  origin_prior = {
      {Source::kSynthetic, 1.0},
      {Source::kAcademicPaper, 0.8},
      {Source::kPatent, 0.7},
      {Source::kGeneral, 0.5},
  };
}

Scores DefaultScorer::score(const InstructionPair& pair) const {
  const double tokens = static_cast<double>(text::split_tokens(pair.response, true).size());
  const double length = std::min(1.0, tokens / length_norm);
  auto w = task_weight.find(pair.task);
  auto q = origin_prior.find(pair.effective_origin());
  return {length * (w == task_weight.end() ? 1.0 : w->second), q == origin_prior.end() ? 0.0 : q->second};
}

DefaultScorer default_scorer_from_json(const json& j) {
  DefaultScorer s;
  if (j.is_null()) return s;
  try {
    s.length_norm = j.value("length_norm", s.length_norm);
    if (j.contains("task_weights")) {
      for (const auto& [k, v] : j.at("task_weights").items()) s.task_weight[parse_task_type(k)] = v.get<double>();
    }
    if (j.contains("origin_priors")) {
      for (const auto& [k, v] : j.at("origin_priors").items()) s.origin_prior[parse_source(k)] = v.get<double>();
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("scorer: ") + e.what());
  }
  if (!(s.length_norm > 0)) throw Error(ErrorCode::kInvalidConfig, "scorer length_norm must be > 0");
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  for (const auto& [t, w] : s.task_weight) {
    if (!in_unit(w)) throw Error(ErrorCode::kInvalidConfig, "task weights must lie in [0, 1]");
  }
  for (const auto& [o, q] : s.origin_prior) {
    if (!in_unit(q)) throw Error(ErrorCode::kInvalidConfig, "origin priors must lie in [0, 1]");
  }
  return s;
}

Scores score_difficulty(const InstructionPair& pair, const DifficultyScorer& scorer) { return scorer.score(pair); }

StageConfig StageConfig::defaults() {
  StageConfig c;
  c.stage1_tasks = {TaskType::kNamedEntityRecognition, TaskType::kRelationExtraction,
                    TaskType::kKnowledgeLinking,       TaskType::kMachineTranslation,
                    TaskType::kAbstractExtract,        TaskType::kRelationPredict,
                    TaskType::kKnowledgeExtract,       TaskType::kSemanticMatching};
  c.stage2_tasks = {TaskType::kAbstractToTitle,  TaskType::kSummaryToTitle, TaskType::kSummaryToTopic,
                    TaskType::kTitleToKeywords,  TaskType::kTopicAndSummaryToTitle,
                    TaskType::kTopicModeling,    TaskType::kKnowledgeFusion,
                    TaskType::kRelationshipComplete, TaskType::kGeneralDialogue};
  return c;
}

void StageConfig::validate() const {
  if (!(replay_fraction >= 0.0 && replay_fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "replay_fraction must lie in [0, 1]");
  }
}

StageConfig stage_config_from_json(const json& j) {
  StageConfig c = StageConfig::defaults();
  if (j.is_null()) return c;
  try {
    if (j.contains("stage1_tasks")) c.stage1_tasks = tasks_from_json(j.at("stage1_tasks"));
    if (j.contains("stage2_tasks")) c.stage2_tasks = tasks_from_json(j.at("stage2_tasks"));
    c.stage1_target_count = j.value("stage1_target_count", c.stage1_target_count);
    c.stage2_new_count = j.value("stage2_new_count", c.stage2_new_count);
    c.replay_fraction = j.value("replay_fraction", c.replay_fraction);
    if (j.contains("quality_order")) c.quality_order = direction_from(j.at("quality_order").get<std::string>());
    if (j.contains("difficulty_order")) {
      c.difficulty_order = direction_from(j.at("difficulty_order").get<std::string>());
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("curriculum: ") + e.what());
  }
  c.validate();
  return c;
}

TrainingSchedule build_stage_schedule(const std::vector<InstructionPair>& pairs, const StageConfig& cfg,
                                      const DifficultyScorer& scorer, std::uint64_t seed, std::size_t jobs) {
  cfg.validate();
  std::vector<std::size_t> stage1;
  std::vector<std::size_t> stage2_new;
  std::vector<std::size_t> replay_pool;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const bool in1 = cfg.stage1_tasks.count(pairs[i].task) > 0;
    const bool in2 = cfg.stage2_tasks.count(pairs[i].task) > 0;
    if (in1) stage1.push_back(i);
    if (in2) stage2_new.push_back(i);
    // pairs of tasks listed in both stages already recur as stage-2 data
    if (in1 && !in2) replay_pool.push_back(i);
  }
  if (stage1.empty()) throw Error(ErrorCode::kEmptyStage, "stage 1 matched no pairs");
  if (stage2_new.empty()) throw Error(ErrorCode::kEmptyStage, "stage 2 matched no pairs");

  std::vector<Scores> scores(pairs.size());
  std::vector<char> needed(pairs.size(), 0);
  for (std::size_t i : stage1) needed[i] = 1;
  for (std::size_t i : stage2_new) needed[i] = 1;
  parallel_for(pairs.size(), jobs, [&](std::size_t i) {
    if (needed[i]) scores[i] = scorer.score(pairs[i]);
  });

  const auto replay_count = static_cast<std::size_t>(
      std::floor(cfg.replay_fraction * static_cast<double>(replay_pool.size()) + 1e-9));
  const auto replayed = sample_sorted(replay_pool, replay_count, derive_seed(seed, "replay"));

  auto before = [&](std::size_t a, std::size_t b) {
    const Scores& sa = scores[a];
    const Scores& sb = scores[b];
    if (sa.quality != sb.quality) {
      return cfg.quality_order == SortDirection::kDescending ? sa.quality > sb.quality : sa.quality < sb.quality;
    }
    if (sa.difficulty != sb.difficulty) {
      return cfg.difficulty_order == SortDirection::kAscending ? sa.difficulty < sb.difficulty
                                                                : sa.difficulty > sb.difficulty;
    }
    return false;
  };

  TrainingSchedule schedule;
  std::stable_sort(stage1.begin(), stage1.end(), before);
  for (std::size_t i : stage1) {
    schedule.entries.push_back({1, pairs[i].id, scores[i].difficulty, scores[i].quality, false});
  }

  // (input index, replay flag) merged in input order, then sorted stably
  std::vector<std::pair<std::size_t, bool>> tagged;
  tagged.reserve(replayed.size() + stage2_new.size());
  {
    std::size_t r = 0;
    std::size_t s = 0;
    while (r < replayed.size() || s < stage2_new.size()) {
      if (s == stage2_new.size() || (r < replayed.size() && replayed[r] <= stage2_new[s])) {
        tagged.emplace_back(replayed[r++], true);
      } else {
        tagged.emplace_back(stage2_new[s++], false);
      }
    }
  }
  std::stable_sort(tagged.begin(), tagged.end(), [&](const auto& a, const auto& b) { return before(a.first, b.first); });
  for (const auto& [i, is_replay] : tagged) {
    schedule.entries.push_back({2, pairs[i].id, scores[i].difficulty, scores[i].quality, is_replay});
  }

  schedule.stage1_count = stage1.size();
  schedule.stage2_new_count = stage2_new.size();
  schedule.stage2_replay_count = replayed.size();
  if (schedule.stage1_count != cfg.stage1_target_count) {
    schedule.warnings.push_back(
        fmt::format("stage 1 has {} pairs, target {}", schedule.stage1_count, cfg.stage1_target_count));
  }
  if (schedule.stage2_new_count != cfg.stage2_new_count) {
    schedule.warnings.push_back(fmt::format("stage 2 has {} new pairs (plus {} replayed), target {}",
                                            schedule.stage2_new_count, schedule.stage2_replay_count,
                                            cfg.stage2_new_count));
  }
  return schedule;
}

std::string to_line(const ScheduleEntry& e) {
  nlohmann::ordered_json j;
  j["stage"] = e.stage;
  j["pair_id"] = e.pair_id;
  j["difficulty"] = e.difficulty;
  j["quality"] = e.quality;
  if (e.replay) j["replay"] = true;
  return j.dump();
}

}  // namespace scibench
