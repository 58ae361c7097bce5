// SPDX-License-Identifier: Apache-2.0

#include "adapt/adaptation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "core/rng.hpp"

namespace ttc::adapt {

namespace {

constexpr std::uint64_t kStepSeedSalt = 0x626f617374657073ull;

struct StepBatch {
  std::vector<SampleRecord> rollouts;  // evaluated
  std::map<int, double> per_task_fast1;
  double aggregate_fast1 = 0.0;
  std::int64_t tokens = 0;
};

// Draw and evaluate one K-per-task batch. Per-rollout backend failures
// become failed outcomes and still consume budget; a draw failure for a task
// contributes zero fast_1 for that task.
StepBatch run_batch(const std::vector<TaskSpec>& tasks, const CheckpointRef& checkpoint,
                    policy::Policy& policy, const eval::Evaluator& evaluator,
                    const LoopOptions& options, std::int64_t seed) {
  StepBatch batch;
  std::size_t total = 0, fast_total = 0;
  for (const auto& task : tasks) {
    std::vector<SampleRecord> samples;
    try {
      policy::SampleBatchRequest req;
      req.checkpoint = checkpoint;
      req.task_id = task.task_id;
      req.K = options.K;
      req.temperature = options.temperature;
      req.max_tokens = options.max_tokens;
      req.seed = seed;
      samples = policy.draw_samples(req);
    } catch (const Error&) {
      batch.per_task_fast1[task.task_id] = 0.0;
      continue;
    }
    std::size_t fast = 0;
    for (auto& s : samples) {
      EvalOutcome outcome;
      try {
        outcome = evaluator.evaluate({s.task_id, s.code, options.trials});
      } catch (const Error& e) {
        outcome.compiled = false;
        outcome.error_trace = std::string("evaluation failed: ") + e.what();
        outcome.trials = options.trials;
        outcome = normalize_outcome(outcome);
      }
      s.outcome = outcome;
      if (eval::is_fast1(outcome)) ++fast;
      batch.tokens += s.token_count;
    }
    batch.per_task_fast1[task.task_id] =
        samples.empty() ? 0.0 : static_cast<double>(fast) / static_cast<double>(samples.size());
    total += samples.size();
    fast_total += fast;
    for (auto& s : samples) batch.rollouts.push_back(std::move(s));
  }
  batch.aggregate_fast1 =
      total == 0 ? 0.0 : static_cast<double>(fast_total) / static_cast<double>(total);
  return batch;
}

}  // namespace

std::int64_t step_seed(std::int64_t campaign_seed, int step) {
  const std::uint64_t bits = rng::mix(kStepSeedSalt, static_cast<std::uint64_t>(campaign_seed),
                                      static_cast<std::uint64_t>(step));
  return static_cast<std::int64_t>(bits & 0x7fffffffffffffffull);
}

BoaResult run_boa(const std::vector<TaskSpec>& tasks, const CheckpointRef& start,
                  policy::Policy& policy, const eval::Evaluator& evaluator,
                  const LoopOptions& options, const RecordSink& sink) {
  if (options.steps < 1) fail(ErrorCode::invalid_argument, "run_boa: steps must be >= 1");
  if (options.patience && *options.patience < 1) {
    fail(ErrorCode::invalid_argument, "run_boa: patience must be >= 1");
  }
  BoaResult result;
  CheckpointRef current = start;
  std::int64_t cumulative = 0;

  // Step 0: fresh evaluation batch of the unadapted checkpoint.
  StepBatch batch0 =
      run_batch(tasks, current, policy, evaluator, options, step_seed(options.seed, 0));
  cumulative += static_cast<std::int64_t>(batch0.rollouts.size());
  result.ledger.rollouts += static_cast<std::int64_t>(batch0.rollouts.size());
  result.ledger.student_tokens += batch0.tokens;
  if (sink) {
    for (const auto& r : batch0.rollouts) sink(r);
  }
  result.trajectory.push_back(
      {0, current, cumulative, batch0.aggregate_fast1, batch0.per_task_fast1});

  double running_best = batch0.aggregate_fast1;
  int consecutive_regressions = 0;

  for (int s = 1; s <= options.steps; ++s) {
    StepBatch batch =
        run_batch(tasks, current, policy, evaluator, options, step_seed(options.seed, s));
    cumulative += static_cast<std::int64_t>(batch.rollouts.size());
    result.ledger.rollouts += static_cast<std::int64_t>(batch.rollouts.size());
    result.ledger.student_tokens += batch.tokens;
    if (sink) {
      for (const auto& r : batch.rollouts) sink(r);
    }

    // In-batch validation: this step scores the batch that feeds its update.
    if (!batch.rollouts.empty()) {
      try {
        const auto outcome = policy.adapt(current, batch.rollouts, options.learning_rate);
        current = outcome.new_checkpoint;
      } catch (const Error&) {
        // Failed update: the checkpoint carries over; the step still
        // consumed its budget and scores its own batch.
      }
    }
    result.trajectory.push_back(
        {s, current, cumulative, batch.aggregate_fast1, batch.per_task_fast1});

    if (options.patience) {
      if (batch.aggregate_fast1 < running_best) {
        if (++consecutive_regressions >= *options.patience) break;
      } else {
        consecutive_regressions = 0;
        running_best = batch.aggregate_fast1;
      }
    } else {
      running_best = std::max(running_best, batch.aggregate_fast1);
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < result.trajectory.size(); ++i) {
    if (result.trajectory[i].aggregate_fast1 > result.trajectory[best].aggregate_fast1) {
      best = i;  // strict: ties keep the earliest (cheapest) step
    }
  }
  result.selected = result.trajectory[best].checkpoint;
  result.selected_step = result.trajectory[best].step;
  return result;
}

BoaResult run_boa_early_stop(const std::vector<TaskSpec>& tasks, const CheckpointRef& start,
                             policy::Policy& policy, const eval::Evaluator& evaluator,
                             LoopOptions options, int patience) {
  options.patience = patience;
  return run_boa(tasks, start, policy, evaluator, options);
}

SdpoAdvantages sdpo_advantages(const std::vector<double>& teacher_logprobs,
                               const std::vector<double>& student_logprobs, double beta,
                               SdpoVariant variant) {
  if (teacher_logprobs.size() != student_logprobs.size()) {
    fail(ErrorCode::invalid_argument, "sdpo_advantages: teacher/student length mismatch");
  }
  if (teacher_logprobs.empty()) {
    fail(ErrorCode::invalid_argument, "sdpo_advantages: empty logprob vectors");
  }
  SdpoAdvantages adv;
  adv.beta = beta;
  adv.variant = variant;
  adv.per_token.resize(teacher_logprobs.size());
  for (std::size_t t = 0; t < teacher_logprobs.size(); ++t) {
    adv.per_token[t] = beta * (teacher_logprobs[t] - student_logprobs[t]);
  }
  return adv;
}

std::string build_teacher_context(const std::string& task_prompt,
                                  const std::optional<std::string>& correct_solution,
                                  const std::optional<EvalOutcome>& feedback,
                                  SdpoVariant variant) {
  if (variant == SdpoVariant::prompt_only) return task_prompt;
  if (!feedback) {
    fail(ErrorCode::invalid_argument, "feedback variant requires an execution outcome");
  }
  std::ostringstream out;
  out << task_prompt << "\n";
  if (correct_solution) {
    out << "\n## Reference solution\n" << *correct_solution << "\n";
  }
  char line[128];
  out << "\n## Execution feedback\n";
  out << "compile status: " << (feedback->compiled ? "ok" : "failed") << "\n";
  out << "correct: " << (feedback->correct ? "true" : "false") << "\n";
  std::snprintf(line, sizeof(line), "speedup: %.4fx\n", feedback->speedup);
  out << line;
  std::snprintf(line, sizeof(line), "runtime: %.6f ms\n", feedback->runtime);
  out << line;
  out << "error trace: " << (feedback->error_trace ? *feedback->error_trace : "(none)") << "\n";
  out << "\nCorrectly solve the original question.";
  return out.str();
}

std::optional<std::string> enforce_equal_budget(const CampaignConfig& plan_a,
                                                const CampaignConfig& plan_b) {
  const std::int64_t budget_a = planned_rollouts(plan_a);
  const std::int64_t budget_b = planned_rollouts(plan_b);
  if (budget_a != budget_b) {
    std::ostringstream msg;
    msg << "rollout budget mismatch: " << budget_a << " vs " << budget_b << " (delta "
        << std::llabs(budget_a - budget_b) << ")";
    return msg.str();
  }
  if (plan_a.temperature != plan_b.temperature) {
    std::ostringstream msg;
    msg << "temperature mismatch: " << plan_a.temperature << " vs " << plan_b.temperature;
    return msg.str();
  }
  if (plan_a.max_tokens != plan_b.max_tokens) {
    std::ostringstream msg;
    msg << "max_tokens mismatch: " << plan_a.max_tokens << " vs " << plan_b.max_tokens;
    return msg.str();
  }
  if (plan_a.checkpoint_id != plan_b.checkpoint_id) {
    return "checkpoint origin mismatch: " + plan_a.checkpoint_id + " vs " + plan_b.checkpoint_id;
  }
  return std::nullopt;
}

TransferReport cross_subset_transfer(const CheckpointRef& adapted,
                                     const std::vector<TaskSpec>& eval_tasks, int K,
                                     policy::Policy& policy, const eval::Evaluator& evaluator,
                                     const LoopOptions& options, const RecordSink& sink) {
  const auto adapted_on = policy.adapted_task_ids(adapted);
  for (const auto& t : eval_tasks) {
    if (adapted_on.count(t.task_id) > 0) {
      fail(ErrorCode::invalid_argument,
           "overlap detected: task " + std::to_string(t.task_id) +
               " is in the checkpoint's adaptation lineage");
    }
  }
  LoopOptions batch_options = options;
  batch_options.K = K;
  StepBatch batch = run_batch(eval_tasks, adapted, policy, evaluator, batch_options,
                              step_seed(options.seed, 0));
  if (sink) {
    for (const auto& r : batch.rollouts) sink(r);
  }
  TransferReport report;
  report.per_task_fast1 = batch.per_task_fast1;
  report.aggregate_fast1 = batch.aggregate_fast1;
  report.rollouts = static_cast<std::int64_t>(batch.rollouts.size());
  return report;
}

}  // namespace ttc::adapt
