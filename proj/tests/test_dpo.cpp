#include <doctest.h>

#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "scibench/dpo.hpp"
#include "support.hpp"

using namespace scibench;
using scibench::testing::Gen;
using scibench::testing::TempDir;

namespace {

// Direct formula, fine while |u| stays moderate.
double naive_loss(double gap, double beta) { return std::log1p(std::exp(-gap / beta)); }

double rel_err(double got, double want) { return std::abs(got - want) / std::max(1.0, std::abs(want)); }

template <class Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::kIoError;
}

PreferencePair pref(std::string id, PreferenceSource src, std::string w = "good", std::string l = "bad") {
  return {std::move(id), "x", std::move(w), std::move(l), src};
}

}  // namespace

TEST_CASE("loss anchors") {
  CHECK(std::abs(dpo_loss({-3.0, -3.0}, 1.0) - std::log(2.0)) <= 1e-12);
  CHECK(std::abs(dpo_loss({-1.0, -2.0}, 1.0) - 0.313261687518223) <= 1e-12);
  CHECK(dpo_loss({0.0, -1e6}, 1.0) >= 0.0);
  CHECK(dpo_loss({0.0, -1e6}, 1.0) < 1e-300);
  CHECK(std::abs(dpo_loss({-1e6, 0.0}, 1.0) - 1e6) <= 1e-6);
  CHECK(std::isfinite(dpo_loss({-700.0, 700.0}, 0.5)));
}

TEST_CASE("loss agrees with the direct formula on moderate arguments") {
  Gen g(41);
  for (int i = 0; i < 1000; ++i) {
    const double w = g.uniform(-20.0, 0.0);
    const double l = g.uniform(-20.0, 0.0);
    const double beta = g.uniform(0.5, 20.0);
    CHECK(rel_err(dpo_loss({w, l}, beta), naive_loss(w - l, beta)) <= 1e-12);
  }
}

TEST_CASE("gap scaling and reference adjustment") {
  const DpoOptions times{GapScaling::kBeta, false};
  CHECK(dpo_argument({-1.0, -3.0}, 0.5) == 4.0);
  CHECK(dpo_argument({-1.0, -3.0}, 0.5, times) == 1.0);
  const DpoOptions ref{GapScaling::kInverseBeta, true};
  CHECK(dpo_argument({-1.0, -3.0, -2.0, -2.5}, 1.0, ref) == doctest::Approx(1.5));
  CHECK(code_of([&] { dpo_argument({-1.0, -3.0}, 1.0, ref); }) == ErrorCode::kInvalidConfig);
  CHECK(code_of([] { dpo_loss({0.0, 0.0}, 0.0); }) == ErrorCode::kNonPositiveBeta);
  CHECK(code_of([] { dpo_loss({0.0, 0.0}, -1.0); }) == ErrorCode::kNonPositiveBeta);
  CHECK(code_of([] { dpo_loss({std::nan(""), 0.0}, 1.0); }) == ErrorCode::kNonFiniteInput);
  CHECK(code_of([] { dpo_loss({std::numeric_limits<double>::infinity(), 0.0}, 1.0); }) ==
        ErrorCode::kNonFiniteInput);
}

TEST_CASE("analytic gradients match central differences") {
  Gen g(43);
  const double h = 1e-5;
  for (auto scaling : {GapScaling::kInverseBeta, GapScaling::kBeta}) {
    const DpoOptions opts{scaling, false};
    for (int i = 0; i < 1000; ++i) {
      const double w = g.uniform(-20.0, 0.0);
      const double l = g.uniform(-20.0, 0.0);
      const double beta = scaling == GapScaling::kBeta ? g.uniform(0.05, 2.0) : g.uniform(0.5, 20.0);
      const auto grad = dpo_grad({w, l}, beta, opts);
      const double fd_w = (dpo_loss({w + h, l}, beta, opts) - dpo_loss({w - h, l}, beta, opts)) / (2 * h);
      const double fd_l = (dpo_loss({w, l + h}, beta, opts) - dpo_loss({w, l - h}, beta, opts)) / (2 * h);
      CHECK(rel_err(grad.d_logp_w, fd_w) < 1e-6);
      CHECK(rel_err(grad.d_logp_l, fd_l) < 1e-6);
      CHECK(grad.d_logp_w + grad.d_logp_l == 0.0);
      CHECK(grad.d_logp_w < 0.0);
    }
  }
  const auto eq = dpo_grad({-2.0, -2.0}, 1.0);
  CHECK(eq.d_logp_w == -0.5);
  CHECK(eq.d_logp_l == 0.5);
}

TEST_CASE("loss is invariant to a shared shift and decreasing in the gap") {
  Gen g(47);
  for (int i = 0; i < 1000; ++i) {
    const double w = g.uniform(-20.0, 0.0);
    const double l = g.uniform(-20.0, 0.0);
    const double beta = g.uniform(0.5, 20.0);
    const double c = g.uniform(-5.0, 5.0);
    const double base = dpo_loss({w, l}, beta);
    const double shifted = dpo_loss({w + c, l + c}, beta);
    CHECK(std::abs(base - shifted) <= 1e-12);
    CHECK(dpo_loss({w + 0.5, l}, beta) < base);
  }
}

TEST_CASE("batch loss") {
  const auto b = batch_loss({{-1.0, -1.0}, {-1.0, -2.0}}, 1.0);
  REQUIRE(b.per_pair.size() == 2);
  CHECK(b.per_pair[0] == dpo_loss({-1.0, -1.0}, 1.0));
  CHECK(b.mean == doctest::Approx((std::log(2.0) + 0.313261687518223) / 2.0).epsilon(1e-14));
  CHECK(code_of([] { batch_loss({}, 1.0); }) == ErrorCode::kEmptyBatch);

  Gen g(53);
  std::vector<PairLogProbs> many;
  for (int i = 0; i < 500; ++i) many.emplace_back(g.uniform(-10, 0), g.uniform(-10, 0));
  CHECK(batch_loss(many, 2.0, {}, 1).mean == batch_loss(many, 2.0, {}, 4).mean);
}

TEST_CASE("learning-rate schedule anchors") {
  DpoHyperparams hp;
  CHECK(hp.steps_per_epoch() == 141);
  CHECK(hp.total_steps() == 423);
  // 423 total steps never leave warmup, so the schedule itself is rejected.
  CHECK(code_of([&] { lr_schedule(0, hp.total_steps(), hp); }) == ErrorCode::kInvalidScheduleConfig);

  const std::int64_t total = 1000;
  CHECK(lr_schedule(0, total, hp) == 0.0);
  CHECK(lr_schedule(500, total, hp) == 5e-5);
  CHECK(std::abs(lr_schedule(250, total, hp) - 2.5e-5) <= 1e-18);
  CHECK(std::abs(lr_schedule(750, total, hp) - 2.5e-5) <= 1e-12);
  CHECK(std::abs(lr_schedule(total, total, hp)) <= 1e-18);
  for (std::int64_t s = 501; s <= total; ++s) CHECK(lr_schedule(s, total, hp) <= lr_schedule(s - 1, total, hp));
  for (std::int64_t s = 1; s <= 500; ++s) CHECK(lr_schedule(s, total, hp) > lr_schedule(s - 1, total, hp));
  CHECK(code_of([&] { lr_schedule(-1, total, hp); }) == ErrorCode::kInvalidScheduleConfig);
  CHECK(code_of([&] { lr_schedule(total + 1, total, hp); }) == ErrorCode::kInvalidScheduleConfig);
}

TEST_CASE("hyperparameters from JSON") {
  const auto hp = dpo_hyperparams_from_json(
      nlohmann::json::parse(R"({"beta": 0.1, "warmup_steps": 10, "gap_scaling": "beta", "reference_adjusted": true})"));
  CHECK(hp.beta == 0.1);
  CHECK(hp.warmup_steps == 10);
  CHECK(hp.epochs == 3);
  CHECK(hp.options.scaling == GapScaling::kBeta);
  CHECK(hp.options.reference_adjusted);
  CHECK_THROWS_AS(dpo_hyperparams_from_json(nlohmann::json::parse(R"({"beta": 0})")), Error);
  CHECK_THROWS_AS(dpo_hyperparams_from_json(nlohmann::json::parse(R"({"gap_scaling": "sqrt"})")), Error);
}

TEST_CASE("preference dataset validation") {
  std::vector<PreferencePair> pairs;
  for (int i = 0; i < 3; ++i) pairs.push_back(pref("h" + std::to_string(i), PreferenceSource::kHuman));
  for (int i = 0; i < 6; ++i) pairs.push_back(pref("a" + std::to_string(i), PreferenceSource::kAi));
  auto v = validate_preference_dataset(pairs, nullptr, nullptr, {3, 6});
  CHECK(v.human == 3);
  CHECK(v.ai == 6);
  CHECK_FALSE(v.report.has_warnings());
  CHECK_FALSE(v.report.has_failures());

  // The published composition is 3,000 human and 6,000 AI pairs.
  v = validate_preference_dataset(pairs, nullptr, nullptr);
  CHECK(v.report.find("composition:human")->status == CheckStatus::kWarn);
  CHECK(v.report.find("composition:total")->status == CheckStatus::kWarn);

  pairs.push_back(pref("dup", PreferenceSource::kAi, "same", "same"));
  v = validate_preference_dataset(pairs, nullptr, nullptr, {3, 7});
  CHECK(v.report.find("distinct_outputs")->status == CheckStatus::kFail);
  CHECK(v.identical_outputs == std::vector<std::string>{"dup"});
}

TEST_CASE("human and AI label agreement") {
  LabelMap human;
  LabelMap ai;
  for (int i = 0; i < 100; ++i) {
    human["x" + std::to_string(i)] = "w";
    ai["x" + std::to_string(i)] = i < 88 ? "w" : "l";
  }
  ai["only_ai"] = "w";
  const auto v = validate_preference_dataset({}, &human, &ai);
  CHECK(v.overlap == 100);
  REQUIRE(v.agreement_rate.has_value());
  CHECK(*v.agreement_rate == 0.88);

  TempDir dir("labels");
  dir.write("l.jsonl", "{\"id\": \"a\", \"label\": \"w\"}\n# note\n{\"id\": \"b\", \"label\": \"l\"}\n");
  const auto labels = load_label_map(dir / "l.jsonl");
  CHECK(labels.size() == 2);
  CHECK(labels.at("b") == "l");
}

TEST_CASE("self-check suite passes with the defaults") {
  const auto checks = run_dpo_checks(DpoHyperparams{}, 7, 200);
  for (const auto& c : checks) {
    INFO(c.name << ": " << c.detail);
    CHECK(c.status != CheckStatus::kFail);
  }
  bool schedule_warned = false;
  for (const auto& c : checks) schedule_warned |= c.name == "schedule_length" && c.status == CheckStatus::kWarn;
  CHECK(schedule_warned);
}
