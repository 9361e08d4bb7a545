#pragma once

// Config loading and the clean -> dedup -> balance -> sequence pipeline.
// Every stage reads its predecessor's output file from output_dir, so the
// stages can also be run one at a time.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "scibench/cleaning.hpp"
#include "scibench/curriculum.hpp"
#include "scibench/dedup.hpp"
#include "scibench/dpo.hpp"
#include "scibench/eval.hpp"
#include "scibench/http_client.hpp"

namespace scibench {

enum class ClassifierMode { kNone, kFixture, kHttp };

struct ClassifierSettings {
  ClassifierMode mode = ClassifierMode::kNone;
  std::filesystem::path fixture;
  std::optional<std::string> default_label;
  HttpEndpoint endpoint;  // from SCIBENCH_CLASSIFIER_URL / SCIBENCH_API_KEY
};

struct JudgeSettings {
  double tie_margin = 0.0;
  std::size_t max_in_flight = 4;
  std::filesystem::path prompt_template;  // empty: built-in v1
  std::string prompt_version = "v1";
  std::filesystem::path fixture;          // empty: HTTP judge from the environment
};

struct PipelineConfig {
  std::vector<std::filesystem::path> documents;
  std::vector<std::filesystem::path> instruction_pairs;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 0;
  std::size_t jobs = 0;  // 0: hardware concurrency

  FilterConfig cleaning;
  ClassifierSettings classifier;
  DedupConfig dedup;
  std::map<std::string, double> balance_targets;  // empty: no rebalancing
  std::string balance_key = "domain";             // domain | origin | task
  StageConfig curriculum = StageConfig::defaults();
  DefaultScorer scorer;
  EvalConfig metrics;
  JudgeSettings judge;
  DpoHyperparams dpo;

  /// FNV-1a of the canonical config JSON (keys sorted, "jobs" excluded).
  std::string config_hash;
};

struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs;
};

/// Relative paths resolve against `base_dir`; referenced input files must
/// exist. Throws kInvalidConfig.
PipelineConfig pipeline_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir,
                                         const ConfigOverrides& overrides = {});
PipelineConfig load_pipeline_config(const std::filesystem::path& path, const ConfigOverrides& overrides = {});

std::unique_ptr<ExternalClassifier> make_classifier(const ClassifierSettings& s);

struct StageSummary {
  std::string stage;
  std::size_t in = 0;
  std::size_t out = 0;
  std::map<std::string, std::size_t> reasons;  // rejection / removal histogram
  std::map<std::string, std::size_t> counters;  // stage-specific counts
  std::vector<std::string> warnings;
  bool skipped = false;
};

struct PipelineSummary {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<StageSummary> stages;
};

/// Output file names inside output_dir.
namespace outputs {
inline constexpr const char* kClean = "clean.jsonl";
inline constexpr const char* kCleanRejects = "clean.rejects.jsonl";
inline constexpr const char* kDedup = "dedup.jsonl";
inline constexpr const char* kDedupClusters = "dedup.clusters.tsv";
inline constexpr const char* kBalance = "balance.jsonl";
inline constexpr const char* kSchedule = "schedule.jsonl";
inline constexpr const char* kSummary = "pipeline.summary.json";
}  // namespace outputs

/// Each stage writes its output plus "<stage>.summary.json" atomically.
StageSummary run_clean_stage(const PipelineConfig& cfg, ExternalClassifier* classifier);
StageSummary run_dedup_stage(const PipelineConfig& cfg);
StageSummary run_balance_stage(const PipelineConfig& cfg);
StageSummary run_sequence_stage(const PipelineConfig& cfg);

/// Runs the four stages in order and writes pipeline.summary.json. A stage
/// error is rethrown as kStageFailure naming the stage; outputs of the
/// stages that finished stay on disk.
PipelineSummary run_pipeline(const PipelineConfig& cfg, ExternalClassifier* classifier);

std::string summary_to_json(const StageSummary& s, const PipelineConfig& cfg);
std::string summary_to_json(const PipelineSummary& s);

}  // namespace scibench
