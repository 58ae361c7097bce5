// SPDX-License-Identifier: Apache-2.0

#include "support/fixtures.hpp"

#include <cmath>
#include <stdexcept>

#include "core/rng.hpp"
#include "support/oracles.hpp"

namespace ttc::testing {

SampleRecord make_record(int task_id, std::int64_t seed, int sample_index, double total_logprob,
                         bool correct, double speedup, int token_count, bool compiled) {
  SampleRecord r;
  r.task_id = task_id;
  r.seed = seed;
  r.sample_index = sample_index;
  r.code = "// candidate t" + std::to_string(task_id) + " s" + std::to_string(seed) + " i" +
           std::to_string(sample_index);
  r.token_count = token_count;
  r.total_logprob = total_logprob;
  EvalOutcome o;
  o.compiled = compiled;
  o.correct = correct;
  o.speedup = speedup;
  o.runtime = speedup > 0.0 ? 4.0 / speedup : (compiled ? 4.0 : 0.0);
  o.trials = 5;
  if (!correct) o.error_trace = compiled ? "functional check failed" : "compile error";
  r.outcome = normalize_outcome(o);
  return r;
}

std::vector<TaskSpec> subset1_tasks() {
  std::vector<TaskSpec> tasks;
  for (int id : {4, 5, 12, 14, 15}) {
    tasks.push_back({id, Split::eval, SubsetTag::subset1, 4.0});
  }
  return tasks;
}

std::vector<TaskSpec> subset2_tasks() {
  std::vector<TaskSpec> tasks;
  for (int id : {18, 28, 29, 30, 32}) {
    tasks.push_back({id, Split::eval, SubsetTag::subset2, 4.0});
  }
  return tasks;
}

std::map<std::pair<std::int64_t, int>, int> scaling_fixture_counts() {
  // 64 samples per cell; fast counts tuned so the curve lands on the golden
  // values (see tests for the asserted points).
  std::map<std::pair<std::int64_t, int>, int> counts;
  counts[{42, 12}] = 64;
  counts[{42, 5}] = 14;
  counts[{42, 4}] = 27;
  counts[{42, 14}] = 29;
  counts[{42, 15}] = 36;
  counts[{43, 12}] = 64;
  counts[{43, 4}] = 24;
  counts[{43, 5}] = 24;
  counts[{43, 14}] = 24;
  counts[{43, 15}] = 35;
  return counts;
}

std::vector<SampleRecord> scaling_fixture_records() {
  std::vector<SampleRecord> records;
  for (const auto& [key, fast] : scaling_fixture_counts()) {
    const auto [seed, task] = key;
    for (int i = 0; i < 64; ++i) {
      const bool is_fast = i < fast;
      records.push_back(make_record(task, seed, i, -40.0 - 0.1 * i, is_fast,
                                    is_fast ? 2.0 : 0.0, 100 + (i % 5) * 8, true));
    }
  }
  return records;
}

namespace {

// One selection unit: correct-sample speedups listed from lowest
// total_logprob (the surprisal pick) to highest (the confidence pick), plus
// incorrect filler below and above the correct band.
std::vector<SampleRecord> selection_unit(int task_id, std::int64_t seed,
                                         const std::vector<double>& correct_speedups,
                                         int incorrect = 6) {
  std::vector<SampleRecord> unit;
  int index = 0;
  // Highest-surprisal fillers: incorrect, as the most surprising samples
  // overall tend to be.
  for (int j = 0; j < incorrect / 2; ++j) {
    unit.push_back(make_record(task_id, seed, index++, -150.0 - j, false, 0.0, 80 + j));
  }
  for (std::size_t j = 0; j < correct_speedups.size(); ++j) {
    unit.push_back(make_record(task_id, seed, index++, -90.0 + static_cast<double>(j), true,
                               correct_speedups[j], 100 + (index % 7) * 10));
  }
  for (int j = 0; j < incorrect - incorrect / 2; ++j) {
    unit.push_back(make_record(task_id, seed, index++, -20.0 + j, false, 0.0, 90 + j));
  }
  return unit;
}

std::vector<double> fraction_046_speedups(double surprisal_pick, double confidence_pick) {
  // 50 correct samples, 23 fast: the surprisal pick, 21 mid fast, the
  // confidence pick; 27 slow in between.
  std::vector<double> v;
  v.push_back(surprisal_pick);
  for (int j = 0; j < 21; ++j) v.push_back(1.2 + 0.1 * j);
  for (int j = 0; j < 27; ++j) v.push_back(0.5 + 0.01 * j);
  v.push_back(confidence_pick);
  return v;
}

}  // namespace

std::vector<SampleRecord> selection_fixture_records() {
  std::vector<SampleRecord> records;
  auto add = [&](std::vector<SampleRecord> unit) {
    for (auto& r : unit) records.push_back(std::move(r));
  };

  // Seed 42: confidence picks are fast on tasks 12 and 15 only; the
  // surprisal pick is slow on task 5 only.
  add(selection_unit(4, 42, {859.8, 2.5, 3.1, 1.5, 0.9, 0.95, 4.2, 0.7, 0.85, 0.8}));
  add(selection_unit(5, 42, {0.9, 191.7, 1.8, 2.2, 0.95, 0.8, 1.4, 0.75, 0.85, 0.6}));
  add(selection_unit(12, 42, {23.8, 5.0, 4.0, 3.5, 3.0, 2.5, 2.0, 1.5}));
  add(selection_unit(14, 42, {15.6, 2.0, 1.2, 3.0, 0.8, 1.1, 0.95, 2.4, 0.85, 0.9}));
  add(selection_unit(15, 42, fraction_046_speedups(13.6, 1.05)));

  // Seed 43: confidence fast on tasks 12, 14, 15; surprisal slow on task 5.
  add(selection_unit(4, 43, {620.0, 1.8, 0.95, 2.6, 0.7, 1.3, 0.99, 3.4, 0.8, 0.9}));
  add(selection_unit(5, 43, {0.85, 150.2, 2.1, 0.9, 1.6, 0.8, 1.9, 0.75, 0.88, 0.95}));
  add(selection_unit(12, 43, {19.5, 4.5, 3.8, 3.2, 2.8, 2.2, 1.8, 1.4}));
  add(selection_unit(14, 43, {12.8, 2.2, 0.9, 1.7, 0.85, 2.9, 0.95, 1.3, 0.8, 1.15}));
  add(selection_unit(15, 43, fraction_046_speedups(11.9, 1.08)));
  return records;
}

std::vector<std::vector<SampleRecord>> regime_fixture_units() {
  const std::vector<double> stds = {
      1.2, 1.5, 2.0, 1.01, 3.0, 1.1, 1.3, 1.7, 2.5,        // 9 high variance
      0.10, 0.05, 0.12, 0.08, 0.14, 0.01, 0.13,            // 7 near-identical
      0.5,  0.3,  0.8,  0.99};                             // 4 in between
  std::vector<std::vector<SampleRecord>> units;
  int task_id = 100;
  for (double sigma : stds) {
    std::vector<SampleRecord> unit;
    const double mu = -50.0 - task_id;
    for (int i = 0; i < 8; ++i) {
      const double lp = i < 4 ? mu - sigma : mu + sigma;  // population std == sigma
      unit.push_back(make_record(task_id, 42, i, lp, true, 1.5));
    }
    units.push_back(std::move(unit));
    ++task_id;
  }
  return units;
}

std::vector<SampleRecord> quartile_fixture_records() {
  struct Bucket {
    int fast;
    double mean_speedup;
    int tokens;
  };
  const std::vector<Bucket> buckets = {
      {474, 37.0, 7}, {810, 26.2, 8}, {723, 46.8, 10}, {439, 30.6, 15}};
  std::vector<SampleRecord> records;
  int index = 0;
  for (int q = 0; q < 4; ++q) {
    const auto& b = buckets[q];
    const int slow = 1000 - b.fast;
    const double slow_speedup = 0.9;
    const double fast_speedup =
        (1000.0 * b.mean_speedup - slow_speedup * slow) / static_cast<double>(b.fast);
    for (int i = 0; i < 1000; ++i) {
      const bool fast = i < b.fast;
      const double logprob = -100.0 + 0.01 * static_cast<double>(index);
      records.push_back(make_record(7, 42, index, logprob, true,
                                    fast ? fast_speedup : slow_speedup, b.tokens));
      ++index;
    }
  }
  return records;
}

std::vector<std::map<int, int>> trajectory_fixture_fast_counts() {
  return {
      {{4, 3}, {5, 1}, {12, 32}, {14, 12}, {15, 12}},   // 37.50
      {{4, 9}, {5, 5}, {12, 32}, {14, 7}, {15, 11}},    // 40.00
      {{4, 15}, {5, 2}, {12, 32}, {14, 6}, {15, 13}},   // 42.50  <- peak
      {{4, 8}, {5, 1}, {12, 32}, {14, 7}, {15, 10}},    // 36.25
      {{4, 7}, {5, 1}, {12, 32}, {14, 5}, {15, 13}},    // 36.25
      {{4, 8}, {5, 3}, {12, 32}, {14, 13}, {15, 10}},   // 41.25
  };
}

std::vector<double> gaussian_vector(std::size_t n, std::uint64_t seed) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = rng::gaussian(rng::mix(seed, static_cast<std::uint64_t>(i)));
  }
  return v;
}

CorrelatedPair correlated_pair(std::size_t n, double target_rho, std::uint64_t seed,
                               double tolerance) {
  const auto x = gaussian_vector(n, rng::mix(seed, 1));
  const auto e = gaussian_vector(n, rng::mix(seed, 2));
  auto mix_y = [&](double r) {
    std::vector<double> y(n);
    const double s = std::sqrt(std::max(0.0, 1.0 - r * r));
    for (std::size_t i = 0; i < n; ++i) y[i] = r * x[i] + s * e[i];
    return y;
  };
  double lo = -0.9999, hi = 0.9999;
  double best_r = 0.0, best_err = 1e9;
  for (int iter = 0; iter < 80; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double rho = naive_spearman(x, mix_y(mid));
    const double err = std::fabs(rho - target_rho);
    if (err < best_err) {
      best_err = err;
      best_r = mid;
    }
    if (rho < target_rho) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (best_err > tolerance) {
    throw std::runtime_error("correlated_pair: bisection missed target");
  }
  return {x, mix_y(best_r)};
}

}  // namespace ttc::testing
