#include "scibench/dpo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <fmt/core.h>
#include <nlohmann/json.hpp>

#include "scibench/io.hpp"
#include "scibench/parallel.hpp"

namespace scibench {

using json = nlohmann::json;

namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw Error(ErrorCode::kNonFiniteInput, std::string(what) + " is not finite");
}

// du/dgap
double gap_scale(double beta, const DpoOptions& opts) {
  return opts.scaling == GapScaling::kInverseBeta ? 1.0 / beta : beta;
}

// sigma(-u) without overflow in either tail.
double sigmoid_neg(double u) {
  if (u >= 0) {
    const double e = std::exp(-u);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(u));
}

}  // namespace

PairLogProbs to_pair_logprobs(const LogProbRecord& r) { return {r.logp_w, r.logp_l, r.ref_logp_w, r.ref_logp_l}; }

double dpo_argument(const PairLogProbs& lp, double beta, const DpoOptions& opts) {
  if (std::isnan(beta) || beta <= 0.0) throw Error(ErrorCode::kNonPositiveBeta, fmt::format("beta = {}", beta));
  require_finite(beta, "beta");
  require_finite(lp.logp_w, "logp_w");
  require_finite(lp.logp_l, "logp_l");
  double gap = lp.logp_w - lp.logp_l;
  if (opts.reference_adjusted) {
    if (!lp.ref_logp_w || !lp.ref_logp_l) {
      throw Error(ErrorCode::kInvalidConfig, "reference-adjusted mode needs ref_logp_w and ref_logp_l");
    }
    require_finite(*lp.ref_logp_w, "ref_logp_w");
    require_finite(*lp.ref_logp_l, "ref_logp_l");
    gap = (lp.logp_w - *lp.ref_logp_w) - (lp.logp_l - *lp.ref_logp_l);
  }
  return gap * gap_scale(beta, opts);
}

double dpo_loss(const PairLogProbs& lp, double beta, const DpoOptions& opts) {
  const double u = dpo_argument(lp, beta, opts);
  return std::max(-u, 0.0) + std::log1p(std::exp(-std::abs(u)));
}

DpoGrad dpo_grad(const PairLogProbs& lp, double beta, const DpoOptions& opts) {
  const double u = dpo_argument(lp, beta, opts);
  const double g = gap_scale(beta, opts) * sigmoid_neg(u);
  return {-g, g};
}

BatchLoss batch_loss(const std::vector<PairLogProbs>& batch, double beta, const DpoOptions& opts,
                     std::size_t jobs) {
  if (batch.empty()) throw Error(ErrorCode::kEmptyBatch, "batch has no pairs");
  BatchLoss out;
  out.per_pair.resize(batch.size());
  parallel_for(batch.size(), jobs, [&](std::size_t i) { out.per_pair[i] = dpo_loss(batch[i], beta, opts); });
  double sum = 0.0;
  for (double l : out.per_pair) sum += l;
  out.mean = sum / static_cast<double>(batch.size());
  return out;
}

void DpoHyperparams::validate() const {
  if (std::isnan(beta) || beta <= 0.0) throw Error(ErrorCode::kNonPositiveBeta, fmt::format("beta = {}", beta));
  if (!(lr_init > 0.0) || !std::isfinite(lr_init)) {
    throw Error(ErrorCode::kInvalidScheduleConfig, fmt::format("lr_init = {}", lr_init));
  }
  if (warmup_steps <= 0 || epochs <= 0 || batch_size <= 0 || dataset_size <= 0) {
    throw Error(ErrorCode::kInvalidScheduleConfig,
                "warmup_steps, epochs, batch_size and dataset_size must be positive");
  }
}

std::int64_t DpoHyperparams::steps_per_epoch() const { return (dataset_size + batch_size - 1) / batch_size; }

std::int64_t DpoHyperparams::total_steps() const { return steps_per_epoch() * epochs; }

DpoHyperparams dpo_hyperparams_from_json(const json& j) {
  DpoHyperparams hp;
  if (j.is_null()) return hp;
  try {
    hp.beta = j.value("beta", hp.beta);
    hp.lr_init = j.value("lr_init", hp.lr_init);
    hp.warmup_steps = j.value("warmup_steps", hp.warmup_steps);
    hp.epochs = j.value("epochs", hp.epochs);
    hp.batch_size = j.value("batch_size", hp.batch_size);
    hp.dataset_size = j.value("dataset_size", hp.dataset_size);
    const std::string scaling = j.value("gap_scaling", std::string("inverse_beta"));
    if (scaling == "inverse_beta") {
      hp.options.scaling = GapScaling::kInverseBeta;
    } else if (scaling == "beta") {
      hp.options.scaling = GapScaling::kBeta;
    } else {
      throw Error(ErrorCode::kInvalidConfig, "dpo.gap_scaling must be inverse_beta or beta");
    }
    hp.options.reference_adjusted = j.value("reference_adjusted", false);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("dpo: ") + e.what());
  }
  hp.validate();
  return hp;
}

double lr_schedule(std::int64_t step, std::int64_t total_steps, const DpoHyperparams& hp) {
  if (!(hp.lr_init > 0.0) || hp.warmup_steps <= 0) {
    throw Error(ErrorCode::kInvalidScheduleConfig, "lr_init and warmup_steps must be positive");
  }
  if (total_steps <= hp.warmup_steps) {
    throw Error(ErrorCode::kInvalidScheduleConfig,
                fmt::format("total_steps {} does not exceed warmup_steps {}", total_steps, hp.warmup_steps));
  }
  if (step < 0 || step > total_steps) {
    throw Error(ErrorCode::kInvalidScheduleConfig, fmt::format("step {} outside [0, {}]", step, total_steps));
  }
  if (step < hp.warmup_steps) {
    return hp.lr_init * static_cast<double>(step) / static_cast<double>(hp.warmup_steps);
  }
  const double progress =
      static_cast<double>(step - hp.warmup_steps) / static_cast<double>(total_steps - hp.warmup_steps);
  return hp.lr_init * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

LabelMap load_label_map(const std::filesystem::path& path) {
  LabelMap labels;
  io::for_each_line(path, [&](std::string_view line, std::size_t n) {
    if (line.empty() || line.front() == '#') return;
    try {
      const json j = json::parse(line);
      labels[j.at("id").get<std::string>()] = j.at("label").get<std::string>();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kMalformedRecord, path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  });
  return labels;
}

PreferenceValidation validate_preference_dataset(const std::vector<PreferencePair>& pairs,
                                                 const LabelMap* human_labels, const LabelMap* ai_labels,
                                                 const PreferenceExpectations& expected) {
  PreferenceValidation out;
  for (const auto& p : pairs) {
    (p.source == PreferenceSource::kHuman ? out.human : out.ai) += 1;
    if (p.y_w == p.y_l) out.identical_outputs.push_back(p.prompt_id);
  }
  auto& checks = out.report.checks;
  auto composition = [&](const char* name, std::size_t got, std::size_t want) {
    checks.push_back({name, got == want ? CheckStatus::kPass : CheckStatus::kWarn,
                      fmt::format("{} pairs, expected {}", got, want)});
  };
  composition("composition:human", out.human, expected.human);
  composition("composition:ai", out.ai, expected.ai);
  composition("composition:total", pairs.size(), expected.human + expected.ai);

  if (out.identical_outputs.empty()) {
    checks.push_back({"distinct_outputs", CheckStatus::kPass, "every pair has y_w != y_l"});
  } else {
    std::string ids;
    for (std::size_t i = 0; i < out.identical_outputs.size() && i < 10; ++i) {
      ids += (i ? ", " : "") + out.identical_outputs[i];
    }
    if (out.identical_outputs.size() > 10) ids += ", ...";
    checks.push_back({"distinct_outputs", CheckStatus::kFail,
                      fmt::format("{} pairs with y_w == y_l: {}", out.identical_outputs.size(), ids)});
  }

  if (human_labels && ai_labels) {
    std::size_t agree = 0;
    for (const auto& [id, label] : *human_labels) {
      auto it = ai_labels->find(id);
      if (it == ai_labels->end()) continue;
      ++out.overlap;
      agree += it->second == label;
    }
    if (out.overlap > 0) {
      out.agreement_rate = static_cast<double>(agree) / static_cast<double>(out.overlap);
      checks.push_back({"agreement_rate", CheckStatus::kPass,
                        fmt::format("{:.4f} ({} of {} overlapping items)", *out.agreement_rate, agree, out.overlap)});
    } else {
      checks.push_back({"agreement_rate", CheckStatus::kWarn, "human and ai label sets do not overlap"});
    }
  }
  return out;
}

std::vector<Check> run_dpo_checks(const DpoHyperparams& hp, std::uint64_t seed, std::size_t fd_trials) {
  hp.validate();
  std::vector<Check> checks;
  auto add = [&](std::string name, bool ok, std::string detail) {
    checks.push_back({std::move(name), ok ? CheckStatus::kPass : CheckStatus::kFail, std::move(detail)});
  };
  const DpoOptions plain{hp.options.scaling, false};

  {
    const double l = dpo_loss({-3.0, -3.0}, hp.beta, plain);
    add("loss_equal_logprobs", std::abs(l - std::log(2.0)) <= 1e-12, fmt::format("loss = {:.15f}", l));
  }
  {
    const double l = dpo_loss({-1.0, -2.0}, 1.0);
    add("loss_unit_gap", std::abs(l - std::log1p(std::exp(-1.0))) <= 1e-12, fmt::format("loss = {:.15f}", l));
  }
  {
    const double far = dpo_loss({-0.5, -700.5}, 1.0);
    const double near = dpo_loss({-700.5, -0.5}, 1.0);
    add("loss_extreme_arguments", std::isfinite(far) && far >= 0.0 && std::abs(near - 700.0) <= 1e-9,
        fmt::format("u=+700 -> {:.3e}, u=-700 -> {:.9f}", far, near));
  }
  {
    const DpoGrad g = dpo_grad({-2.0, -2.0}, 1.0);
    add("grad_equal_logprobs", std::abs(g.d_logp_w + 0.5) <= 1e-15 && std::abs(g.d_logp_l - 0.5) <= 1e-15,
        fmt::format("({}, {})", g.d_logp_w, g.d_logp_l));
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> logp(-20.0, 0.0);
  std::uniform_real_distribution<double> betas(0.5, 20.0);
  std::uniform_real_distribution<double> shift(-10.0, 10.0);
  const double h = 1e-5;
  std::size_t fd_bad = 0, sum_bad = 0, sign_bad = 0, shift_bad = 0, mono_bad = 0;
  double worst = 0.0;
  for (std::size_t t = 0; t < fd_trials; ++t) {
    const double w = logp(rng);
    const double l = logp(rng);
    const double b = betas(rng);
    const double c = shift(rng);
    const DpoGrad g = dpo_grad({w, l}, b, plain);
    const double fd_w = (dpo_loss({w + h, l}, b, plain) - dpo_loss({w - h, l}, b, plain)) / (2 * h);
    const double fd_l = (dpo_loss({w, l + h}, b, plain) - dpo_loss({w, l - h}, b, plain)) / (2 * h);
    const double rel_w = std::abs(g.d_logp_w - fd_w) / std::max(std::abs(g.d_logp_w), 1e-300);
    const double rel_l = std::abs(g.d_logp_l - fd_l) / std::max(std::abs(g.d_logp_l), 1e-300);
    worst = std::max({worst, rel_w, rel_l});
    fd_bad += rel_w >= 1e-6 || rel_l >= 1e-6;
    sum_bad += g.d_logp_w + g.d_logp_l != 0.0;
    sign_bad += !(g.d_logp_w < 0.0 && g.d_logp_l > 0.0);
    shift_bad += std::abs(dpo_loss({w + c, l + c}, b, plain) - dpo_loss({w, l}, b, plain)) > 1e-12;
    const double base = dpo_loss({w, l}, b, plain);
    mono_bad += !(dpo_loss({w + 0.5, l}, b, plain) < base) || !(dpo_loss({w, l + 0.5}, b, plain) > base);
  }
  add("grad_finite_difference", fd_bad == 0,
      fmt::format("{} trials, worst relative error {:.3e}", fd_trials, worst));
  add("grad_sum_zero", sum_bad == 0, fmt::format("{} violations", sum_bad));
  add("grad_direction", sign_bad == 0, fmt::format("{} violations", sign_bad));
  add("translation_invariance", shift_bad == 0, fmt::format("{} violations", shift_bad));
  add("loss_monotone", mono_bad == 0, fmt::format("{} violations", mono_bad));
  add("loss_large_beta", std::abs(dpo_loss({-1.0, -2.0}, 1e6) - std::log(2.0)) <= 1e-6, "gap 1, beta = 1e6");

  std::int64_t total = hp.total_steps();
  if (total <= hp.warmup_steps) {
    const std::int64_t fallback = 2 * hp.warmup_steps;
    checks.push_back({"schedule_length", CheckStatus::kWarn,
                      fmt::format("{} steps per epoch x {} epochs = {} steps, not more than the {} warmup steps; "
                                  "schedule checks below use {} steps",
                                  hp.steps_per_epoch(), hp.epochs, total, hp.warmup_steps, fallback)});
    total = fallback;
  } else {
    checks.push_back({"schedule_length", CheckStatus::kPass, fmt::format("{} total steps", total)});
  }
  add("lr_warmup_start", lr_schedule(0, total, hp) == 0.0, "lr(0) = 0");
  {
    const double v = lr_schedule(hp.warmup_steps, total, hp);
    add("lr_warmup_end", v == hp.lr_init, fmt::format("lr({}) = {}", hp.warmup_steps, v));
  }
  {
    const std::int64_t span = total - hp.warmup_steps;
    if (span % 2 == 0) {
      const double v = lr_schedule(hp.warmup_steps + span / 2, total, hp);
      add("lr_cosine_midpoint", std::abs(v - hp.lr_init / 2) <= 1e-12, fmt::format("lr = {}", v));
    } else {
      checks.push_back({"lr_cosine_midpoint", CheckStatus::kWarn, "cosine phase has an odd length"});
    }
  }
  add("lr_end_zero", lr_schedule(total, total, hp) == 0.0, fmt::format("lr({}) = 0", total));
  {
    // left limit of the linear ramp at the boundary vs the cosine value there
    const double left = hp.lr_init * static_cast<double>(hp.warmup_steps) / static_cast<double>(hp.warmup_steps);
    const double right = lr_schedule(hp.warmup_steps, total, hp);
    add("lr_continuity", std::abs(left - right) <= 1e-15, "warmup boundary");
  }
  {
    bool ok = true;
    double prev = lr_schedule(hp.warmup_steps, total, hp);
    for (std::int64_t s = hp.warmup_steps + 1; s <= total; ++s) {
      const double v = lr_schedule(s, total, hp);
      ok = ok && v <= prev;
      prev = v;
    }
    add("lr_nonincreasing", ok, "after warmup");
  }
  return checks;
}

}  // namespace scibench
