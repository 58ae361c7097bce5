// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "core/records.hpp"
#include "core/rng.hpp"
#include "core/types.hpp"
#include "support/fixtures.hpp"

using namespace ttc;

namespace {

CampaignConfig best_of_n_config(int n_tasks, int K, std::int64_t budget) {
  CampaignConfig c;
  for (int i = 0; i < n_tasks; ++i) {
    c.tasks.push_back({i + 1, Split::eval, std::nullopt, 4.0});
  }
  c.mode = CampaignMode::best_of_n;
  c.K = K;
  c.steps = 0;
  c.seeds = {42};
  c.rollout_budget = budget;
  return c;
}

}  // namespace

TEST_CASE("outcome invariant chain") {
  EvalOutcome o;
  o.compiled = false;
  o.correct = true;
  o.speedup = 3.0;
  const auto n = normalize_outcome(o);
  CHECK_FALSE(n.correct);
  CHECK(n.speedup == 0.0);
  CHECK(outcome_valid(n));

  EvalOutcome bad;
  bad.compiled = true;
  bad.correct = false;
  bad.speedup = 2.0;  // speedup without correctness
  CHECK_FALSE(outcome_valid(bad));
}

TEST_CASE("validate_config: budget arithmetic") {
  SUBCASE("matched best_of_n budget") {
    CHECK(validate_config(best_of_n_config(5, 64, 320)).empty());
  }
  SUBCASE("mismatched budget") {
    const auto violations = validate_config(best_of_n_config(5, 64, 100));
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].find("budget mismatch") != std::string::npos);
  }
  SUBCASE("adaptation mode requires steps >= 1") {
    auto c = best_of_n_config(5, 32, 0);
    c.mode = CampaignMode::batch_ttt;
    c.steps = 0;
    c.rollout_budget = 5 * 32;
    const auto violations = validate_config(c);
    bool found = false;
    for (const auto& v : violations) {
      if (v.find("steps must be >= 1") != std::string::npos) found = true;
    }
    CHECK(found);
  }
  SUBCASE("batch_ttt counts the step-0 batch") {
    auto c = best_of_n_config(5, 32, 0);
    c.mode = CampaignMode::batch_ttt;
    c.steps = 1;
    c.rollout_budget = 5 * 32 * 2;  // 320: step 0 evaluation plus one update batch
    CHECK(validate_config(c).empty());
  }
  SUBCASE("duplicate task ids and bad baselines are flagged") {
    auto c = best_of_n_config(2, 4, 8);
    c.tasks[1].task_id = c.tasks[0].task_id;
    c.tasks[0].baseline_time = 0.0;
    const auto violations = validate_config(c);
    CHECK(violations.size() >= 2);
  }
}

TEST_CASE("record line round-trip is identical") {
  // Round-trip property over a spread of awkward values.
  for (std::uint64_t i = 0; i < 200; ++i) {
    const std::uint64_t h = rng::mix(0xfeedu, i);
    const bool correct = (h & 1) != 0;
    const double speedup = correct ? rng::uniform01(rng::mix(h, 2)) * 900.0 : 0.0;
    auto r = testing::make_record(
        static_cast<int>(h % 97), static_cast<std::int64_t>(h % 1000), static_cast<int>(i),
        -1e-3 - rng::uniform01(rng::mix(h, 3)) * 200.0, correct, speedup,
        1 + static_cast<int>(h % 2048));
    if ((h & 4) != 0) r.code = "line1\nline2 \"quoted\" \\ and\ttabs";
    const auto line = io::record_to_line(r);
    const auto back = io::record_from_line(line);
    CHECK(back.task_id == r.task_id);
    CHECK(back.seed == r.seed);
    CHECK(back.sample_index == r.sample_index);
    CHECK(back.code == r.code);
    CHECK(back.token_count == r.token_count);
    CHECK(back.total_logprob == r.total_logprob);  // exact, not approximate
    CHECK(back.eval().correct == r.eval().correct);
    CHECK(back.eval().speedup == r.eval().speedup);
    CHECK(back.eval().runtime == r.eval().runtime);
    CHECK(back.eval().trials == r.eval().trials);
    CHECK(back.eval().error_trace == r.eval().error_trace);
    // Serialization itself is deterministic.
    CHECK(io::record_to_line(back) == line);
  }
}

TEST_CASE("record parsing rejects invariant violations") {
  auto r = testing::make_record(1, 42, 0, -10.0, true, 2.0);
  auto line = io::record_to_line(r);
  // Force correct=true with compiled=false in the raw text.
  const auto pos = line.find("\"compiled\":true");
  REQUIRE(pos != std::string::npos);
  line.replace(pos, 15, "\"compiled\":false");
  CHECK_THROWS_AS(io::record_from_line(line), Error);
}

TEST_CASE("duplicate record keys are rejected") {
  std::vector<SampleRecord> records = {testing::make_record(1, 42, 0, -10, true, 2.0),
                                       testing::make_record(1, 42, 0, -11, true, 1.5)};
  CHECK_THROWS_AS(io::check_record_set(records), Error);
  records[1].sample_index = 1;
  CHECK_NOTHROW(io::check_record_set(records));
}

TEST_CASE("config document round-trip") {
  auto c = best_of_n_config(5, 64, 320);
  c.tasks[0].subset_tag = SubsetTag::subset1;
  c.temperature = 0.25;
  c.max_tokens = 1024;
  c.learning_rate = 1e-5;
  c.patience = 2;
  c.beta = 1.0;
  c.seeds = {42, 43, 44};
  c.strategy_list = {SelectionStrategy::surprisal_guided, SelectionStrategy::oracle_best_correct};
  c.scenario["eta_scale"] = 12345.0;
  const auto text = io::config_to_json(c);
  const auto back = io::config_from_json(text);
  CHECK(back.tasks.size() == c.tasks.size());
  CHECK(back.tasks[0].subset_tag == c.tasks[0].subset_tag);
  CHECK(back.mode == c.mode);
  CHECK(back.K == c.K);
  CHECK(back.temperature == c.temperature);
  CHECK(back.patience == c.patience);
  CHECK(back.seeds == c.seeds);
  CHECK(back.strategy_list == c.strategy_list);
  CHECK(back.rollout_budget == c.rollout_budget);
  CHECK(back.scenario.at("eta_scale") == 12345.0);
  CHECK(io::config_to_json(back) == text);
}

TEST_CASE("config parse errors carry the config_invalid code") {
  try {
    io::config_from_json("{not json");
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::config_invalid);
  }
}

TEST_CASE("checkpoint lineage steps increase") {
  CheckpointRef root;
  root.id = "root";
  CHECK(root.step() == 0);
  CheckpointRef child;
  child.id = "child";
  child.lineage = {{1, "root"}, {2, "mid"}};
  CHECK(child.step() == 2);
}
