#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "scibench/records.hpp"

namespace scibench {

using CategoryFn = std::function<std::string(const InstructionPair&)>;

/// Default category key: the pair's domain name.
std::string domain_category(const InstructionPair& p);

/// Per-category integer counts for a downsample-only rebalance.
///
/// The output total is the largest K whose exact real allocation t_c * K fits
/// inside every category (K = floor(min_c n_c / t_c)); counts are the floors
/// of t_c * K with the remainder handed out by largest fractional part, ties
/// to the lexicographically smaller category.
/// Throws kInvalidTargets (sum != 1 within 1e-9, or a negative target) and
/// kMissingCategory (a target category with no items).
std::map<std::string, std::size_t> balance_counts(const std::map<std::string, std::size_t>& available,
                                                  const std::map<std::string, double>& targets);

/// Uniform per-category sampling (seeded) down to balance_counts; kept
/// pairs stay in input order. Categories absent from `targets` are dropped.
std::vector<InstructionPair> balance_proportions(const std::vector<InstructionPair>& pairs,
                                                 const std::map<std::string, double>& targets, std::uint64_t seed,
                                                 const CategoryFn& category = domain_category);

struct Scores {
  double difficulty = 0.0;
  double quality = 0.0;
};

class DifficultyScorer {
 public:
  virtual ~DifficultyScorer() = default;
  /// Must be thread-safe; both scores in [0, 1].
  virtual Scores score(const InstructionPair& pair) const = 0;
};

/// difficulty = min(1, response_tokens / length_norm) * task_weight(task)
/// quality    = origin_prior(origin)
/// Response tokens use the CJK tokenization rule (one token per Han
/// character, Latin runs whole).
class DefaultScorer : public DifficultyScorer {
 public:
  DefaultScorer();

  Scores score(const InstructionPair& pair) const override;

  double length_norm = 1024.0;
  std::map<TaskType, double> task_weight;
  std::map<Source, double> origin_prior;
};

/// Overrides the defaults from a JSON object with optional keys
/// "length_norm", "task_weights" {task: w} and "origin_priors" {source: q}.
DefaultScorer default_scorer_from_json(const nlohmann::json& j);

Scores score_difficulty(const InstructionPair& pair, const DifficultyScorer& scorer);

enum class SortDirection { kAscending, kDescending };

struct StageConfig {
  std::set<TaskType> stage1_tasks;
  std::set<TaskType> stage2_tasks;
  std::size_t stage1_target_count = 340000;
  std::size_t stage2_new_count = 490000;
  double replay_fraction = 1.0;
  SortDirection quality_order = SortDirection::kDescending;
  SortDirection difficulty_order = SortDirection::kAscending;

  /// Structured-understanding tasks in stage 1, generation tasks in stage 2.
  static StageConfig defaults();
  void validate() const;
};

/// Reads the "curriculum" config object (see docs/configuration.md).
StageConfig stage_config_from_json(const nlohmann::json& j);

struct ScheduleEntry {
  int stage = 1;
  std::string pair_id;
  double difficulty = 0.0;
  double quality = 0.0;
  bool replay = false;  // stage-2 entry replayed from stage 1

  bool operator==(const ScheduleEntry&) const = default;
};

struct TrainingSchedule {
  std::vector<ScheduleEntry> entries;
  std::size_t stage1_count = 0;
  std::size_t stage2_new_count = 0;
  std::size_t stage2_replay_count = 0;
  std::vector<std::string> warnings;  // count deviations from the configured targets
};

/// Stage 1: pairs whose task is a stage-1 task. Stage 2: a seeded uniform
/// sample of round-down(replay_fraction * |stage 1|) stage-1 pairs plus
/// every stage-2-task pair. Each stage is sorted by quality then difficulty
/// (directions from the config), stable on ties with respect to input order.
/// Throws Error(kEmptyStage) naming the stage that matched no pairs.
TrainingSchedule build_stage_schedule(const std::vector<InstructionPair>& pairs, const StageConfig& cfg,
                                      const DifficultyScorer& scorer, std::uint64_t seed, std::size_t jobs = 1);

std::string to_line(const ScheduleEntry& e);

}  // namespace scibench
