// SPDX-License-Identifier: Apache-2.0
//
// Golden fixtures shared across test suites. Numeric targets live here once
// so every suite replays the same constructions.
#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "core/types.hpp"

namespace ttc::testing {

// Convenience record builder (outcome normalized).
SampleRecord make_record(int task_id, std::int64_t seed, int sample_index, double total_logprob,
                         bool correct, double speedup, int token_count = 100,
                         bool compiled = true);

// Subset-1 task specs {4, 5, 12, 14, 15} with synthetic baselines.
std::vector<TaskSpec> subset1_tasks();
// Subset-2 task specs {18, 28, 29, 30, 32}.
std::vector<TaskSpec> subset2_tasks();

// Scaling-curve fixture: per (task, seed) counts of fast_1 samples out of 64
// chosen so the estimator reproduces the golden curve
// (53.3% at K=1, 99.9% at K=16, saturation at 16).
std::map<std::pair<std::int64_t, int>, int> scaling_fixture_counts();
std::vector<SampleRecord> scaling_fixture_records();

// Selection fixture: 5 tasks x 2 seeds constructed so the strategy
// aggregates land exactly at oracle 100%, top3 100%, surprisal 80%,
// confidence 50%, and the random-correct expectation at 59.2%.
std::vector<SampleRecord> selection_fixture_records();

// 20-task logprob-variance fixture: 9 tasks above std 1.0, 7 below 0.15,
// 4 in between.
std::vector<std::vector<SampleRecord>> regime_fixture_units();

// Pooled-correct quartile fixture (4000 samples): fast_1 rates
// 47.4/81.0/72.3/43.9 percent with token medians 7/8/10/15.
std::vector<SampleRecord> quartile_fixture_records();

// Batch adaptation trajectory fixture: per-step per-task fast counts out of
// 32 whose aggregates are 37.5, 40.0, 42.5, 36.25, 36.25, 41.25 percent
// (argmax at step 2).
std::vector<std::map<int, int>> trajectory_fixture_fast_counts();

// Gaussian-copula pair with the sample Spearman tuned to target (bisection
// on the mixing coefficient). Deterministic in seed.
struct CorrelatedPair {
  std::vector<double> x;
  std::vector<double> y;
};
CorrelatedPair correlated_pair(std::size_t n, double target_rho, std::uint64_t seed,
                               double tolerance = 1e-4);

// Normal scores helper (deterministic pseudo-normals).
std::vector<double> gaussian_vector(std::size_t n, std::uint64_t seed);

}  // namespace ttc::testing
