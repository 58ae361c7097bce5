// SPDX-License-Identifier: Apache-2.0
//
// Batch and per-task test-time adaptation loops with Best-of-Adaptation
// checkpoint selection, SDPO advantages, equal-budget enforcement, and
// cross-subset transfer evaluation.
#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "core/types.hpp"
#include "eval/evaluator.hpp"
#include "policy/policy.hpp"

namespace ttc::adapt {

struct TrajectoryStep {
  int step = 0;
  CheckpointRef checkpoint;
  std::int64_t cumulative_rollouts = 0;  // strictly increasing with step
  double aggregate_fast1 = 0.0;
  std::map<int, double> per_task_fast1;
};

struct BudgetLedger {
  std::int64_t rollouts = 0;
  std::int64_t student_tokens = 0;
  std::int64_t teacher_tokens = 0;
  std::int64_t extra_timing_evals = 0;
  double wall_clock_seconds = 0.0;

  std::int64_t total_tokens() const { return student_tokens + teacher_tokens; }
  void merge(const BudgetLedger& other) {
    rollouts += other.rollouts;
    student_tokens += other.student_tokens;
    teacher_tokens += other.teacher_tokens;
    extra_timing_evals += other.extra_timing_evals;
    wall_clock_seconds += other.wall_clock_seconds;
  }
};

using RecordSink = std::function<void(const SampleRecord&)>;

struct LoopOptions {
  int steps = 1;         // S >= 1
  int K = 32;            // rollouts per task per step
  double learning_rate = 1e-5;
  double temperature = 0.25;
  int max_tokens = 1024;
  int trials = 5;
  std::int64_t seed = 42;
  std::optional<int> patience;  // early stopping window P (>= 1)
};

struct BoaResult {
  std::vector<TrajectoryStep> trajectory;
  CheckpointRef selected;  // argmax aggregate_fast1, earliest step on ties
  int selected_step = 0;
  BudgetLedger ledger;
};

// Deterministic per-step sampling seed derivation (also used by tests).
std::int64_t step_seed(std::int64_t campaign_seed, int step);

// Best-of-Adaptation with in-batch validation. Step 0 scores a fresh
// evaluation batch of the starting checkpoint; steps 1..S score the batch
// that feeds that step's update. A step whose backend calls fail entirely
// records fast_1 = 0 and the loop continues. When options.patience is set,
// the loop halts after P consecutive steps below the running best.
BoaResult run_boa(const std::vector<TaskSpec>& tasks, const CheckpointRef& start,
                  policy::Policy& policy, const eval::Evaluator& evaluator,
                  const LoopOptions& options, const RecordSink& sink = {});

// Early-stopping variant; identical to run_boa with patience set.
BoaResult run_boa_early_stop(const std::vector<TaskSpec>& tasks, const CheckpointRef& start,
                             policy::Policy& policy, const eval::Evaluator& evaluator,
                             LoopOptions options, int patience);

enum class SdpoVariant { feedback, prompt_only };

struct SdpoAdvantages {
  double beta = 1.0;
  std::vector<double> per_token;  // length equals the student token count
  SdpoVariant variant = SdpoVariant::feedback;
};

// Token-level advantages: per_token[t] = beta * (teacher[t] - student[t]).
SdpoAdvantages sdpo_advantages(const std::vector<double>& teacher_logprobs,
                               const std::vector<double>& student_logprobs, double beta,
                               SdpoVariant variant = SdpoVariant::feedback);

// Teacher context construction. The feedback variant concatenates, in order:
// the task prompt, a correct same-batch solution when available, structured
// execution feedback, and a fixed closing instruction. The student's own
// code is never included. The prompt_only variant is the task prompt
// verbatim.
std::string build_teacher_context(const std::string& task_prompt,
                                  const std::optional<std::string>& correct_solution,
                                  const std::optional<EvalOutcome>& feedback,
                                  SdpoVariant variant);

// ok (nullopt) iff rollout budgets, temperature, max_tokens, and checkpoint
// origin all match between the two plans.
std::optional<std::string> enforce_equal_budget(const CampaignConfig& plan_a,
                                                const CampaignConfig& plan_b);

struct TransferReport {
  std::map<int, double> per_task_fast1;
  double aggregate_fast1 = 0.0;
  std::int64_t rollouts = 0;
};

// fast_1 of K fresh samples per eval task under an adapted checkpoint. The
// eval tasks must be disjoint from the checkpoint's adaptation tasks.
TransferReport cross_subset_transfer(const CheckpointRef& adapted,
                                     const std::vector<TaskSpec>& eval_tasks, int K,
                                     policy::Policy& policy, const eval::Evaluator& evaluator,
                                     const LoopOptions& options, const RecordSink& sink = {});

}  // namespace ttc::adapt
