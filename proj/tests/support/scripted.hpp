// SPDX-License-Identifier: Apache-2.0
//
// Scripted backend doubles: a policy that replays prescribed per-step fast
// counts and an evaluator that reads the verdict straight from the candidate
// text. Used to drive the adaptation loops down exact trajectories.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "eval/evaluator.hpp"
#include "policy/policy.hpp"

namespace ttc::testing {

class ScriptedEvaluator : public eval::Evaluator {
 public:
  EvalOutcome evaluate(const eval::EvalRequest& request) const override;
};

// Drawn samples are marked FAST / SLOW / BAD according to the per-step
// per-task counts; adaptation just advances a step counter. Steps are keyed
// by the request seed as derived by adapt::step_seed, so draws are
// order-independent.
class ScriptedPolicy : public policy::Policy {
 public:
  // counts[step][task] = fast samples out of K for that step's batch;
  // remaining samples split between SLOW and BAD.
  ScriptedPolicy(std::vector<std::map<int, int>> counts, std::int64_t campaign_seed);

  // Per-(checkpoint id, task) fast counts for transfer-style tests.
  static ScriptedPolicy for_checkpoints(std::map<std::string, std::map<int, int>> by_checkpoint,
                                        std::int64_t campaign_seed);

  const CheckpointRef& root() const { return root_; }

  std::vector<SampleRecord> draw_samples(const policy::SampleBatchRequest& request) override;
  double score_nll(const CheckpointRef& checkpoint, const SampleRecord& sample) const override;
  policy::AdaptOutcome adapt_scored(const CheckpointRef& checkpoint,
                                    const std::vector<SampleRecord>& rollouts,
                                    const std::vector<double>& scores,
                                    double learning_rate) override;
  std::vector<double> token_logprobs(const CheckpointRef& checkpoint,
                                     const SampleRecord& sample) const override;
  std::vector<double> teacher_token_logprobs(const CheckpointRef& checkpoint,
                                             const SampleRecord& sample,
                                             const std::string& context) const override;
  std::int64_t context_token_count(const std::string& context) const override;
  std::set<int> adapted_task_ids(const CheckpointRef& checkpoint) const override;

  void set_adapted_tasks(const std::string& checkpoint_id, std::set<int> tasks);

 private:
  std::vector<std::map<int, int>> counts_;          // by step
  std::map<std::string, std::map<int, int>> by_checkpoint_;
  std::map<std::int64_t, int> seed_to_step_;
  std::map<std::string, std::set<int>> adapted_;
  CheckpointRef root_;
};

}  // namespace ttc::testing
