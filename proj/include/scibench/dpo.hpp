#pragma once

// Preference-optimization numerics: the loss -log sigma(u) over the
// log-probability gap, its gradient, the warmup + cosine learning-rate
// schedule and checks on a preference dataset.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "scibench/manifest.hpp"
#include "scibench/records.hpp"

namespace scibench {

/// How beta scales the gap: u = gap / beta (default) or u = beta * gap.
enum class GapScaling { kInverseBeta, kBeta };

struct DpoOptions {
  GapScaling scaling = GapScaling::kInverseBeta;
  /// Use (logp_w - ref_logp_w) - (logp_l - ref_logp_l) as the gap.
  bool reference_adjusted = false;
};

struct PairLogProbs {
  PairLogProbs() = default;
  PairLogProbs(double w, double l, std::optional<double> ref_w = std::nullopt,
               std::optional<double> ref_l = std::nullopt)
      : logp_w(w), logp_l(l), ref_logp_w(ref_w), ref_logp_l(ref_l) {}

  double logp_w = 0.0;
  double logp_l = 0.0;
  std::optional<double> ref_logp_w;
  std::optional<double> ref_logp_l;
};

PairLogProbs to_pair_logprobs(const LogProbRecord& r);

/// The sigmoid argument u. Throws kNonPositiveBeta, kNonFiniteInput, and
/// kInvalidConfig when reference log-probs are required but absent.
double dpo_argument(const PairLogProbs& lp, double beta, const DpoOptions& opts = {});

/// softplus(-u) = log(1 + exp(-u)), evaluated without overflow.
double dpo_loss(const PairLogProbs& lp, double beta, const DpoOptions& opts = {});

struct DpoGrad {
  double d_logp_w = 0.0;
  double d_logp_l = 0.0;
};

/// d/dlogp_w = -s * sigma(-u), d/dlogp_l = +s * sigma(-u), s = du/dgap.
DpoGrad dpo_grad(const PairLogProbs& lp, double beta, const DpoOptions& opts = {});

struct BatchLoss {
  double mean = 0.0;
  std::vector<double> per_pair;
};

/// Mean over the batch, summed in input order. Throws kEmptyBatch.
BatchLoss batch_loss(const std::vector<PairLogProbs>& batch, double beta, const DpoOptions& opts = {},
                     std::size_t jobs = 1);

struct DpoHyperparams {
  double beta = 1.0;
  double lr_init = 5e-5;
  std::int64_t warmup_steps = 500;
  std::int64_t epochs = 3;
  std::int64_t batch_size = 64;
  std::int64_t dataset_size = 9000;
  DpoOptions options;

  /// Throws kNonPositiveBeta / kInvalidScheduleConfig.
  void validate() const;
  std::int64_t steps_per_epoch() const;  // ceil(dataset_size / batch_size)
  std::int64_t total_steps() const;      // steps_per_epoch * epochs
};

/// Reads the "dpo" config object; absent keys keep their defaults.
DpoHyperparams dpo_hyperparams_from_json(const nlohmann::json& j);

/// Linear warmup to lr_init, then cosine decay to 0 at total_steps.
/// Throws kInvalidScheduleConfig unless 0 <= step <= total_steps and
/// total_steps > warmup_steps.
double lr_schedule(std::int64_t step, std::int64_t total_steps, const DpoHyperparams& hp);

struct PreferenceExpectations {
  std::size_t human = 3000;
  std::size_t ai = 6000;
};

using LabelMap = std::unordered_map<std::string, std::string>;

/// JSONL of {"id": ..., "label": ...}.
LabelMap load_label_map(const std::filesystem::path& path);

struct PreferenceValidation {
  ValidationReport report;
  std::size_t human = 0;
  std::size_t ai = 0;
  std::size_t overlap = 0;
  std::optional<double> agreement_rate;  // set when the overlap is nonempty
  std::vector<std::string> identical_outputs;  // prompt_ids with y_w == y_l
};

/// Composition rows warn on a mismatch against `expected`; pairs with
/// y_w == y_l fail. The agreement rate is reported without a threshold.
PreferenceValidation validate_preference_dataset(const std::vector<PreferencePair>& pairs,
                                                 const LabelMap* human_labels, const LabelMap* ai_labels,
                                                 const PreferenceExpectations& expected = {});

/// Self-check suite behind `dpo-check`: loss, gradient and schedule
/// properties evaluated with the given hyperparameters.
std::vector<Check> run_dpo_checks(const DpoHyperparams& hp, std::uint64_t seed, std::size_t fd_trials = 1000);

}  // namespace scibench
