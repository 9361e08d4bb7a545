#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "scibench/metrics.hpp"
#include "scibench/records.hpp"
#include "scibench/report.hpp"

namespace scibench {

/// How a task's instances are scored and aggregated.
enum class MetricKind {
  kEntityF1,     // micro F1 over entity mentions
  kTripleF1,     // micro F1 over relation triples
  kItemF1,       // micro set F1 over `items`
  kRougeL,       // mean ROUGE-L of `text` against the best reference
  kCorpusBleu,   // corpus BLEU-4 of `text`
  kAccuracy,     // exact match of `text`
  kTopicTerms,   // mean topic-term score of `items` (mode from EvalConfig)
};

std::string_view to_string(MetricKind k);
MetricKind parse_metric_kind(std::string_view s);

struct BenchTask {
  std::string key;      // task field of prediction records
  std::string group;    // report group
  std::string dataset;  // report row label
  MetricKind metric;
};

/// The ten benchmark rows, in report order.
const std::vector<BenchTask>& benchmark_tasks();
const BenchTask* find_benchmark_task(std::string_view key);

struct EvalConfig {
  TopicMode topic_mode = TopicMode::kBleu;
  BleuSmoothing bleu_smoothing = BleuSmoothing::kAddOne;
  TokenMode default_token_mode = TokenMode::kMixed;  // when a record has no lang
  std::map<std::string, MetricKind> overrides;      // task key -> metric
  std::size_t bootstrap_samples = 0;                // 0 disables the interval
  std::uint64_t seed = 0;
};

/// Reads the "metrics" config object: {"topic_mode", "bleu_smoothing",
/// "token_mode", "overrides": {task: kind}, "bootstrap_samples"}.
EvalConfig eval_config_from_json(const nlohmann::json& j);

/// Display name of a metric kind for the report's metric column.
std::string metric_display_name(MetricKind kind);

struct TaskScore {
  std::string task;
  MetricKind metric = MetricKind::kItemF1;
  double score = 0.0;
  std::size_t instances = 0;
  std::size_t invalid_topic_counts = 0;  // topic predictions outside 3..7 terms
  std::optional<std::pair<double, double>> interval;  // bootstrap 95% interval
};

/// Scores aligned prediction and gold instances of one task.
/// Throws kIdMismatch when the id sets or tasks differ, kUnknownTask for
/// tasks outside the benchmark.
std::vector<TaskScore> score_predictions(const std::vector<Prediction>& gold, const std::vector<Prediction>& pred,
                                         const EvalConfig& config);

/// Scores model A (and optionally model B) against the gold set and lays
/// the results out as report rows in benchmark order.
MetricReport run_eval(const std::vector<Prediction>& gold, const std::vector<Prediction>& pred_a,
                      const std::vector<Prediction>* pred_b, const EvalConfig& config);

}  // namespace scibench
