// SPDX-License-Identifier: Apache-2.0

#include "select/selection.hpp"

#include <algorithm>
#include <cmath>

#include "core/rng.hpp"

namespace ttc::select {

namespace {

constexpr std::uint64_t kRandomSelectSalt = 0x73656c656374726eull;

// Correct samples ordered by (total_logprob, sample_index).
std::vector<const SampleRecord*> correct_sorted_by_logprob(
    const std::vector<SampleRecord>& samples) {
  std::vector<const SampleRecord*> correct;
  for (const auto& s : samples) {
    if (s.eval().correct) correct.push_back(&s);
  }
  std::sort(correct.begin(), correct.end(), [](const SampleRecord* a, const SampleRecord* b) {
    if (a->total_logprob != b->total_logprob) return a->total_logprob < b->total_logprob;
    return a->sample_index < b->sample_index;
  });
  return correct;
}

SelectionResult finish(SelectionStrategy strategy, const SampleRecord* chosen, int extra_evals,
                       std::optional<EvalOutcome> retimed = std::nullopt) {
  SelectionResult r;
  r.strategy = strategy;
  r.extra_evals_used = extra_evals;
  if (chosen != nullptr) {
    r.chosen = *chosen;
    const EvalOutcome& o = retimed ? *retimed : chosen->eval();
    r.fast1 = eval::is_fast1(o);
    r.speedup = o.speedup;
  }
  return r;
}

}  // namespace

SelectionResult select(SelectionStrategy strategy, const std::vector<SampleRecord>& samples,
                       std::int64_t rng_seed, const SelectOptions& options) {
  if (samples.empty()) fail(ErrorCode::invalid_argument, "select: empty sample set");
  const int task_id = samples.front().task_id;
  for (const auto& s : samples) {
    if (s.task_id != task_id) {
      fail(ErrorCode::invalid_argument, "select: samples span multiple tasks");
    }
  }
  auto correct = correct_sorted_by_logprob(samples);
  if (correct.empty()) return finish(strategy, nullptr, 0);  // the zero-correct (Task 95) case

  switch (strategy) {
    case SelectionStrategy::oracle_best_correct: {
      const SampleRecord* best = correct.front();
      for (const auto* s : correct) {
        if (s->eval().speedup > best->eval().speedup) best = s;
      }
      return finish(strategy, best, 0);
    }
    case SelectionStrategy::random_correct: {
      // Correct set is ordered by sample_index so the draw depends only on
      // (rng_seed, task_id), never on input order.
      std::vector<const SampleRecord*> by_index = correct;
      std::sort(by_index.begin(), by_index.end(),
                [](const SampleRecord* a, const SampleRecord* b) {
                  return a->sample_index < b->sample_index;
                });
      const std::uint64_t bits = rng::mix(kRandomSelectSalt,
                                          static_cast<std::uint64_t>(rng_seed),
                                          static_cast<std::uint64_t>(task_id));
      const auto pick = rng::bounded(bits, by_index.size());
      return finish(strategy, by_index[pick], 0);
    }
    case SelectionStrategy::confidence_guided: {
      // Max total_logprob, ties toward the lowest sample_index.
      const SampleRecord* best = correct.front();
      for (const auto* s : correct) {
        if (s->total_logprob > best->total_logprob ||
            (s->total_logprob == best->total_logprob && s->sample_index < best->sample_index)) {
          best = s;
        }
      }
      return finish(strategy, best, 0);
    }
    case SelectionStrategy::surprisal_guided:
      return finish(strategy, correct.front(), 0);  // min total_logprob
    case SelectionStrategy::surprisal_guided_top3: {
      const int m = static_cast<int>(std::min<std::size_t>(3, correct.size()));
      const SampleRecord* best = nullptr;
      double best_speedup = -1.0;
      std::optional<EvalOutcome> best_outcome;
      for (int i = 0; i < m; ++i) {
        const SampleRecord* cand = correct[i];
        EvalOutcome outcome = cand->eval();
        if (options.retime_top3) {
          if (options.evaluator == nullptr) {
            fail(ErrorCode::invalid_argument, "top3 re-timing requires an evaluator");
          }
          outcome = options.evaluator->evaluate(
              {cand->task_id, cand->code, options.retime_trials});
        }
        if (outcome.speedup > best_speedup) {
          best_speedup = outcome.speedup;
          best = cand;
          best_outcome = outcome;
        }
      }
      return finish(strategy, best, m, options.retime_top3 ? best_outcome : std::nullopt);
    }
  }
  fail(ErrorCode::invalid_argument, "unknown selection strategy");
}

double random_correct_expectation(const std::vector<SampleRecord>& samples) {
  std::size_t correct = 0, fast = 0;
  for (const auto& s : samples) {
    if (!s.eval().correct) continue;
    ++correct;
    if (eval::is_fast1(s.eval())) ++fast;
  }
  if (correct == 0) return 0.0;
  return static_cast<double>(fast) / static_cast<double>(correct);
}

RegimeLabel detect_regime(const std::vector<SampleRecord>& samples, double threshold,
                          int min_samples) {
  if (static_cast<int>(samples.size()) < min_samples) {
    fail(ErrorCode::invalid_argument, "detect_regime: too few samples");
  }
  RegimeLabel label;
  label.task_id = samples.front().task_id;
  double mean = 0.0;
  for (const auto& s : samples) mean += s.total_logprob;
  mean /= static_cast<double>(samples.size());
  double var = 0.0;
  for (const auto& s : samples) {
    const double d = s.total_logprob - mean;
    var += d * d;
  }
  var /= static_cast<double>(samples.size());
  label.logprob_std = std::sqrt(var);
  label.label = label.logprob_std > threshold ? Regime::high_variance : Regime::low_variance;
  return label;
}

std::vector<QuartileStats> quartile_breakdown(const std::vector<SampleRecord>& samples) {
  auto correct = correct_sorted_by_logprob(samples);
  if (correct.size() < 4) {
    fail(ErrorCode::invalid_argument, "quartile_breakdown: need >= 4 correct samples");
  }
  const std::size_t n = correct.size();
  const std::size_t base = n / 4;
  const std::size_t remainder = n % 4;

  std::vector<QuartileStats> out;
  std::size_t cursor = 0;
  for (int q = 0; q < 4; ++q) {
    const std::size_t size = base + (static_cast<std::size_t>(q) < remainder ? 1 : 0);
    QuartileStats stats;
    stats.quartile = q + 1;
    stats.count = size;
    std::vector<double> tokens;
    tokens.reserve(size);
    std::size_t fast = 0;
    double speedup_sum = 0.0;
    for (std::size_t i = cursor; i < cursor + size; ++i) {
      const auto& o = correct[i]->eval();
      if (eval::is_fast1(o)) ++fast;
      speedup_sum += o.speedup;
      tokens.push_back(static_cast<double>(correct[i]->token_count));
    }
    stats.fast1_rate = static_cast<double>(fast) / static_cast<double>(size);
    stats.mean_speedup = speedup_sum / static_cast<double>(size);
    std::sort(tokens.begin(), tokens.end());
    stats.median_token_count = size % 2 == 1
                                   ? tokens[size / 2]
                                   : 0.5 * (tokens[size / 2 - 1] + tokens[size / 2]);
    cursor += size;
    out.push_back(stats);
  }
  return out;
}

}  // namespace ttc::select
