// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <random>

#include "core/rng.hpp"
#include "eval/synthetic_evaluator.hpp"
#include "select/selection.hpp"
#include "support/fixtures.hpp"

using namespace ttc;
namespace sel = ttc::select;
using sel::Regime;
using sel::SelectOptions;
using sel::detect_regime;
using sel::quartile_breakdown;
using sel::random_correct_expectation;

namespace {

// Random task sample set: mixes correct/incorrect, occasional logprob ties.
std::vector<SampleRecord> random_task(std::uint64_t trial, int n) {
  std::vector<SampleRecord> samples;
  for (int i = 0; i < n; ++i) {
    const auto h = rng::mix(0x5e1ec7u, trial, static_cast<std::uint64_t>(i));
    const bool correct = (h % 100) < 60;
    const double speedup = correct ? 0.2 + 8.0 * rng::uniform01(rng::mix(h, 1)) : 0.0;
    // Quantized logprobs force ties regularly.
    const double logprob = -1.0 * static_cast<double>(1 + (h % 40));
    samples.push_back(testing::make_record(9, 42, i, logprob, correct, speedup));
  }
  return samples;
}

}  // namespace

TEST_CASE("surprisal and confidence pick opposite ends of the correct set") {
  std::vector<SampleRecord> samples = {
      testing::make_record(1, 42, 0, -10.0, true, 5.0),
      testing::make_record(1, 42, 1, -2.0, true, 1.1),
      testing::make_record(1, 42, 2, -30.0, false, 0.0),  // most surprising overall: wrong
  };
  const auto surprisal = sel::select(SelectionStrategy::surprisal_guided, samples, 0);
  REQUIRE(surprisal.chosen.has_value());
  CHECK(surprisal.chosen->sample_index == 0);
  CHECK(surprisal.speedup == doctest::Approx(5.0));
  CHECK(surprisal.fast1);
  CHECK(surprisal.extra_evals_used == 0);

  const auto confidence = sel::select(SelectionStrategy::confidence_guided, samples, 0);
  REQUIRE(confidence.chosen.has_value());
  CHECK(confidence.chosen->sample_index == 1);
  CHECK(confidence.speedup == doctest::Approx(1.1));
}

TEST_CASE("a single correct sample wins under every strategy") {
  std::vector<SampleRecord> samples = {
      testing::make_record(2, 42, 0, -50.0, false, 0.0),
      testing::make_record(2, 42, 1, -40.0, true, 2.5),
      testing::make_record(2, 42, 2, -30.0, false, 0.0),
  };
  for (const auto strategy : all_strategies()) {
    const auto result = sel::select(strategy, samples, 7);
    REQUIRE(result.chosen.has_value());
    CHECK(result.chosen->sample_index == 1);
    CHECK(result.fast1);
  }
}

TEST_CASE("zero correct samples: chosen absent, counted as failure") {
  std::vector<SampleRecord> samples = {
      testing::make_record(95, 42, 0, -50.0, false, 0.0),
      testing::make_record(95, 42, 1, -40.0, false, 0.0),
  };
  for (const auto strategy : all_strategies()) {
    const auto result = sel::select(strategy, samples, 7);
    CHECK_FALSE(result.chosen.has_value());
    CHECK_FALSE(result.fast1);
    CHECK(result.speedup == 0.0);
  }
}

TEST_CASE("logprob ties break toward the lowest sample index") {
  std::vector<SampleRecord> samples = {
      testing::make_record(3, 42, 0, -20.0, true, 1.5),
      testing::make_record(3, 42, 1, -20.0, true, 3.0),
      testing::make_record(3, 42, 2, -20.0, true, 2.0),
  };
  CHECK(sel::select(SelectionStrategy::surprisal_guided, samples, 0).chosen->sample_index == 0);
  CHECK(sel::select(SelectionStrategy::confidence_guided, samples, 0).chosen->sample_index == 0);

  // All-equal logprobs: confidence and surprisal coincide (the degenerate
  // low-variance regime where selection loses its signal).
  const auto s = sel::select(SelectionStrategy::surprisal_guided, samples, 0);
  const auto c = sel::select(SelectionStrategy::confidence_guided, samples, 0);
  CHECK(s.chosen->sample_index == c.chosen->sample_index);
}

TEST_CASE("selection requires a single task and non-empty input") {
  CHECK_THROWS_AS(sel::select(SelectionStrategy::oracle_best_correct, {}, 0), Error);
  std::vector<SampleRecord> mixed = {testing::make_record(1, 42, 0, -1, true, 2.0),
                                     testing::make_record(2, 42, 1, -1, true, 2.0)};
  CHECK_THROWS_AS(sel::select(SelectionStrategy::oracle_best_correct, mixed, 0), Error);
}

TEST_CASE("selection properties over randomized task sets") {
  int nontrivial = 0;
  for (std::uint64_t trial = 0; trial < 300; ++trial) {
    auto samples = random_task(trial, 8 + static_cast<int>(trial % 40));
    bool any_correct = false;
    for (const auto& s : samples) any_correct = any_correct || s.eval().correct;
    if (!any_correct) continue;
    ++nontrivial;

    const auto oracle = sel::select(SelectionStrategy::oracle_best_correct, samples, trial);
    for (const auto strategy : all_strategies()) {
      const auto result = sel::select(strategy, samples, trial);
      REQUIRE(result.chosen.has_value());
      // Correctness filter.
      CHECK(result.chosen->eval().correct);
      // Oracle dominance in both speedup and fast_1.
      CHECK(oracle.speedup >= result.speedup - 1e-12);
      CHECK(static_cast<int>(oracle.fast1) >= static_cast<int>(result.fast1));
    }
    // Top3 dominates the single surprisal pick.
    const auto top3 = sel::select(SelectionStrategy::surprisal_guided_top3, samples, trial);
    const auto single = sel::select(SelectionStrategy::surprisal_guided, samples, trial);
    CHECK(top3.speedup >= single.speedup - 1e-12);
    CHECK(top3.extra_evals_used >= 1);
    CHECK(top3.extra_evals_used <= 3);

    // Permutation invariance: shuffling input changes nothing (random_correct
    // included, since its draw is keyed on (seed, task), not order).
    auto shuffled = samples;
    std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937_64(trial));
    for (const auto strategy : all_strategies()) {
      const auto a = sel::select(strategy, samples, trial);
      const auto b = sel::select(strategy, shuffled, trial);
      CHECK(a.chosen->sample_index == b.chosen->sample_index);
    }
  }
  CHECK(nontrivial > 250);
}

TEST_CASE("random_correct expectation matches the fast fraction") {
  std::vector<SampleRecord> samples;
  for (int i = 0; i < 10; ++i) {
    const bool correct = i < 8;
    const bool fast = i < 3;
    samples.push_back(
        testing::make_record(1, 42, i, -10.0 - i, correct, fast ? 2.0 : (correct ? 0.5 : 0.0)));
  }
  CHECK(random_correct_expectation(samples) == doctest::Approx(3.0 / 8.0));
  std::vector<SampleRecord> none = {testing::make_record(1, 42, 0, -1, false, 0.0)};
  CHECK(random_correct_expectation(none) == 0.0);
}

TEST_CASE("top3 re-timing consults the evaluator and logs its evals") {
  // Candidates whose recorded speedups disagree with the evaluator's law.
  eval::BehaviorTag tag;
  tag.compile_rate = 1.0;
  tag.correct_rate = 1.0;
  tag.speedup_median = 6.0;
  tag.speedup_dispersion = 0.0;
  tag.task_id = 3;
  std::vector<SampleRecord> samples;
  for (int i = 0; i < 3; ++i) {
    tag.sample_index = i;
    auto r = testing::make_record(3, 42, i, -10.0 - i, true, 1.01);  // recorded: barely fast
    r.code = eval::encode_tag(tag) + "\nbody";
    samples.push_back(r);
  }
  eval::EvaluatorProfile profile;
  profile.jitter = 0.0;
  eval::SyntheticEvaluator evaluator({{3, Split::eval, std::nullopt, 6.0}}, profile);

  SelectOptions options;
  options.retime_top3 = true;
  options.evaluator = &evaluator;
  const auto result = sel::select(SelectionStrategy::surprisal_guided_top3, samples, 0, options);
  CHECK(result.extra_evals_used == 3);
  CHECK(result.speedup == doctest::Approx(6.0).epsilon(1e-9));  // fresh timing, not 1.01

  SelectOptions missing;
  missing.retime_top3 = true;
  CHECK_THROWS_AS(sel::select(SelectionStrategy::surprisal_guided_top3, samples, 0, missing), Error);
}

TEST_CASE("regime detection against the variance threshold") {
  auto flat = [](double std_target) {
    std::vector<SampleRecord> unit;
    for (int i = 0; i < 8; ++i) {
      const double lp = -50.0 + (i < 4 ? -std_target : std_target);
      unit.push_back(testing::make_record(1, 42, i, lp, true, 1.2));
    }
    return unit;
  };
  CHECK(detect_regime(flat(1.5)).label == Regime::high_variance);
  CHECK(detect_regime(flat(0.10)).label == Regime::low_variance);
  CHECK(detect_regime(flat(1.5)).logprob_std == doctest::Approx(1.5).epsilon(1e-12));
  // Strictly-above semantics at the threshold.
  CHECK(detect_regime(flat(1.0)).label == Regime::low_variance);
  CHECK(detect_regime(flat(1.0 + 1e-9)).label == Regime::high_variance);
  // Too few samples.
  std::vector<SampleRecord> tiny = {testing::make_record(1, 42, 0, -1, true, 1.0)};
  CHECK_THROWS_AS(detect_regime(tiny), Error);
}

TEST_CASE("regime gate on the 20-task mixed-variance fixture") {
  int high = 0, low = 0;
  for (const auto& unit : testing::regime_fixture_units()) {
    const auto label = detect_regime(unit);
    (label.label == Regime::high_variance ? high : low) += 1;
  }
  CHECK(high == 9);
  CHECK(low == 11);
}

TEST_CASE("quartile breakdown by hand on eight samples") {
  // Ascending logprob: Q1 holds the two most surprising correct samples.
  std::vector<SampleRecord> samples;
  const double speedups[8] = {4.0, 2.0, 1.5, 0.5, 3.0, 0.8, 1.2, 6.0};
  const int tokens[8] = {50, 60, 70, 80, 90, 100, 110, 120};
  for (int i = 0; i < 8; ++i) {
    samples.push_back(
        testing::make_record(1, 42, i, -80.0 + 10.0 * i, true, speedups[i], tokens[i]));
  }
  const auto buckets = quartile_breakdown(samples);
  REQUIRE(buckets.size() == 4);
  for (const auto& b : buckets) CHECK(b.count == 2);
  // Q1 = samples 0,1: both fast, mean 3.0, median tokens 55.
  CHECK(buckets[0].fast1_rate == doctest::Approx(1.0));
  CHECK(buckets[0].mean_speedup == doctest::Approx(3.0));
  CHECK(buckets[0].median_token_count == doctest::Approx(55.0));
  // Q2 = samples 2,3: one fast.
  CHECK(buckets[1].fast1_rate == doctest::Approx(0.5));
  CHECK(buckets[1].mean_speedup == doctest::Approx(1.0));
  // Q4 = samples 6,7.
  CHECK(buckets[3].fast1_rate == doctest::Approx(1.0));
  CHECK(buckets[3].mean_speedup == doctest::Approx(3.6));
  CHECK(buckets[3].median_token_count == doctest::Approx(115.0));
}

TEST_CASE("quartiles of identical samples report identical stats") {
  std::vector<SampleRecord> samples;
  for (int i = 0; i < 12; ++i) {
    samples.push_back(testing::make_record(1, 42, i, -33.0, true, 2.0, 64));
  }
  const auto buckets = quartile_breakdown(samples);
  for (const auto& b : buckets) {
    CHECK(b.fast1_rate == 1.0);
    CHECK(b.mean_speedup == doctest::Approx(2.0));
    CHECK(b.median_token_count == doctest::Approx(64.0));
  }
}

TEST_CASE("golden pooled quartile replay") {
  const auto records = testing::quartile_fixture_records();
  const auto buckets = quartile_breakdown(records);
  REQUIRE(buckets.size() == 4);
  // Sizes differ by at most one (4000 splits evenly here).
  for (const auto& b : buckets) CHECK(b.count == 1000);
  CHECK(buckets[0].fast1_rate == doctest::Approx(0.474).epsilon(1e-12));
  CHECK(buckets[1].fast1_rate == doctest::Approx(0.810).epsilon(1e-12));
  CHECK(buckets[2].fast1_rate == doctest::Approx(0.723).epsilon(1e-12));
  CHECK(buckets[3].fast1_rate == doctest::Approx(0.439).epsilon(1e-12));
  CHECK(buckets[0].mean_speedup == doctest::Approx(37.0).epsilon(1e-9));
  CHECK(buckets[1].mean_speedup == doctest::Approx(26.2).epsilon(1e-9));
  CHECK(buckets[2].mean_speedup == doctest::Approx(46.8).epsilon(1e-9));
  CHECK(buckets[3].mean_speedup == doctest::Approx(30.6).epsilon(1e-9));
  CHECK(buckets[0].median_token_count == doctest::Approx(7));
  CHECK(buckets[1].median_token_count == doctest::Approx(8));
  CHECK(buckets[2].median_token_count == doctest::Approx(10));
  CHECK(buckets[3].median_token_count == doctest::Approx(15));

  // Uneven pool: sizes differ by at most 1.
  auto uneven = records;
  uneven.pop_back();
  uneven.pop_back();
  const auto buckets2 = quartile_breakdown(uneven);
  std::size_t lo = buckets2[0].count, hi = buckets2[0].count;
  for (const auto& b : buckets2) {
    lo = std::min(lo, b.count);
    hi = std::max(hi, b.count);
  }
  CHECK(hi - lo <= 1);
}

TEST_CASE("quartile breakdown needs at least four correct samples") {
  std::vector<SampleRecord> samples = {
      testing::make_record(1, 42, 0, -1, true, 2.0),
      testing::make_record(1, 42, 1, -2, true, 2.0),
      testing::make_record(1, 42, 2, -3, false, 0.0),
      testing::make_record(1, 42, 3, -4, false, 0.0),
  };
  CHECK_THROWS_AS(quartile_breakdown(samples), Error);
}
