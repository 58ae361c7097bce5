// SPDX-License-Identifier: Apache-2.0
//
// Selection strategies over a task's Best-of-N sample set, the logprob
// variance regime gate, and the surprisal quartile breakdown. Pure functions
// over immutable inputs; trivially parallel across tasks.
#pragma once

#include <optional>
#include <vector>

#include "core/types.hpp"
#include "eval/evaluator.hpp"

namespace ttc::select {

struct SelectionResult {
  SelectionStrategy strategy = SelectionStrategy::oracle_best_correct;
  std::optional<SampleRecord> chosen;  // absent iff the task had no correct sample
  int extra_evals_used = 0;            // > 0 only for surprisal_guided_top3
  bool fast1 = false;
  double speedup = 0.0;
};

struct SelectOptions {
  // Top3 default reuses recorded speedups; re-timing through an evaluator is
  // opt-in. Either way the cost column counts the timing evaluations.
  bool retime_top3 = false;
  const eval::Evaluator* evaluator = nullptr;
  int retime_trials = 5;
};

// All samples must share one task_id and carry evaluated outcomes. Ties on
// total_logprob break toward the lowest sample_index so replays are
// deterministic; random_correct draws from a counter RNG keyed on
// (rng_seed, task_id), independent of sample order.
SelectionResult select(SelectionStrategy strategy, const std::vector<SampleRecord>& samples,
                       std::int64_t rng_seed, const SelectOptions& options = {});

// Probability that a uniformly drawn correct sample is fast_1 (the analytic
// expectation of random_correct; 0 when no correct samples exist).
double random_correct_expectation(const std::vector<SampleRecord>& samples);

enum class Regime { high_variance, low_variance };

struct RegimeLabel {
  int task_id = 0;
  double logprob_std = 0.0;  // population standard deviation
  Regime label = Regime::low_variance;
};

// high_variance iff the population std of total_logprob strictly exceeds the
// threshold. Requires at least min_samples samples.
RegimeLabel detect_regime(const std::vector<SampleRecord>& samples, double threshold = 1.0,
                          int min_samples = 8);

struct QuartileStats {
  int quartile = 0;  // 1 = highest surprisal (lowest total_logprob)
  std::size_t count = 0;
  double fast1_rate = 0.0;
  double mean_speedup = 0.0;
  double median_token_count = 0.0;
};

// Quartiles over the globally pooled correct samples, sorted by ascending
// total_logprob (Q1 = highest surprisal). Bucket sizes differ by at most one.
std::vector<QuartileStats> quartile_breakdown(const std::vector<SampleRecord>& samples);

}  // namespace ttc::select
