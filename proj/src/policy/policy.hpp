// SPDX-License-Identifier: Apache-2.0
//
// Uniform contract for sampling, NLL scoring, and adaptation over
// checkpoints. draw_samples and score_nll are concurrent-safe; adapt calls
// on the same lineage are serialized by the implementation (one writer per
// lineage).
#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "core/types.hpp"
#include "eval/evaluator.hpp"

namespace ttc::policy {

struct SampleBatchRequest {
  CheckpointRef checkpoint;
  int task_id = 0;
  int K = 1;            // >= 1
  double temperature = 0.25;  // >= 0
  int max_tokens = 1024;
  std::int64_t seed = 0;
};

struct AdaptOutcome {
  CheckpointRef new_checkpoint;
  std::int64_t rollouts_consumed = 0;  // equals the update batch size
  std::int64_t student_tokens = 0;
};

class Policy {
 public:
  virtual ~Policy() = default;

  // Exactly K records with sample_index 0..K-1, outcomes unevaluated.
  virtual std::vector<SampleRecord> draw_samples(const SampleBatchRequest& request) = 0;

  // NLL of the fixed sample text under the given checkpoint.
  virtual double score_nll(const CheckpointRef& checkpoint, const SampleRecord& sample) const = 0;

  // One gradient-update-equivalent on scored rollouts. `scores` pairs with
  // `rollouts` positionally; SDPO passes token-advantage means here, the
  // plain TTT loop passes execution rewards.
  virtual AdaptOutcome adapt_scored(const CheckpointRef& checkpoint,
                                    const std::vector<SampleRecord>& rollouts,
                                    const std::vector<double>& scores,
                                    double learning_rate) = 0;

  // Reward-based adaptation: rollouts must carry evaluated outcomes.
  AdaptOutcome adapt(const CheckpointRef& checkpoint, const std::vector<SampleRecord>& rollouts,
                     double learning_rate) {
    std::vector<double> rewards;
    rewards.reserve(rollouts.size());
    for (const auto& r : rollouts) rewards.push_back(eval::compute_reward(r.eval()));
    return adapt_scored(checkpoint, rollouts, rewards, learning_rate);
  }

  // Per-token decomposition of a sample's total_logprob (sums to it).
  virtual std::vector<double> token_logprobs(const CheckpointRef& checkpoint,
                                             const SampleRecord& sample) const = 0;

  // Teacher scoring of the student's sampled tokens given a teacher context.
  virtual std::vector<double> teacher_token_logprobs(const CheckpointRef& checkpoint,
                                                     const SampleRecord& sample,
                                                     const std::string& context) const = 0;

  // Backend-reported token count for a context string (the ledger never
  // tokenizes locally).
  virtual std::int64_t context_token_count(const std::string& context) const = 0;

  // Tasks this checkpoint's lineage was adapted on.
  virtual std::set<int> adapted_task_ids(const CheckpointRef& checkpoint) const = 0;
};

}  // namespace ttc::policy
