// SPDX-License-Identifier: Apache-2.0
//
// Synthetic "sharpening policy": a per-task mixture over solution archetypes
// that reproduces over-sharpening dynamics at desk scale. Each task mixes
// three archetype classes:
//
//   naive_mode   common, high-confidence, modest speedups
//   expert_tail  rare, low-confidence, large speedups
//   broken       does not produce correct kernels
//
// A sample's total_logprob is  ln(weight) + intra_logprob + spread * z  with
// z ~ N(0,1) drawn per (task, seed, index). Scoring the same text under any
// checkpoint replays the formula with that checkpoint's weight and spread,
// so NLL under the generating checkpoint equals -total_logprob exactly, and
// checkpoints with identical state score identically.
//
// Adaptation is an exponentiated-weights update on batch-empirical
// advantages (mean archetype reward minus batch mean). Archetypes below a
// batch support floor cannot gain weight -- the gradient signal of rarely
// sampled sequences is too dilute to reinforce them -- they only hold or
// decay, and mass they lose flows to the well-supported block. Every update
// also contracts logprob_spread by a fixed sharpening factor, and effective
// correctness erodes with the contraction (degenerating diversity produces
// degenerate kernels). Together these yield the signature dynamics: an early
// fast_1 peak, expert-tail mass that never grows, and a deepening negative
// rank correlation between NLL and speedup.
#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "eval/tag.hpp"
#include "policy/policy.hpp"

namespace ttc::policy {

struct ArchetypeSpec {
  eval::ArchetypeClass klass = eval::ArchetypeClass::naive_mode;
  double weight = 1.0;           // in [0,1]; sums to 1 per task
  double mean_logprob = -10.0;   // <= 0, at the configured weight
  double logprob_spread = 1.0;   // >= 0
  double correct_rate = 1.0;     // in [0,1]
  double compile_rate = 1.0;
  double speedup_median = 1.0;
  double speedup_dispersion = 0.0;
  double token_base = 128.0;
};

struct ScenarioSpec {
  std::map<int, std::vector<ArchetypeSpec>> tasks;
  double sharpening_factor = 0.9;   // spread multiplier per adapt step
  double eta_scale = 4.0e4;         // eta = learning_rate * eta_scale
  double support_floor = 0.25;      // min batch fraction to receive gains
  double collapse_exponent = 1.3;   // correctness erosion vs spread ratio
};

// The stock desk-scale scenario: one identical 3-archetype mixture per task.
// All numbers are scenario parameters, not measurements.
ScenarioSpec stock_scenario(const std::vector<TaskSpec>& tasks,
                            const std::map<std::string, double>& overrides = {});

class SyntheticPolicy : public Policy {
 public:
  explicit SyntheticPolicy(ScenarioSpec scenario);

  const CheckpointRef& root() const { return root_; }

  std::vector<SampleRecord> draw_samples(const SampleBatchRequest& request) override;
  double score_nll(const CheckpointRef& checkpoint, const SampleRecord& sample) const override;
  AdaptOutcome adapt_scored(const CheckpointRef& checkpoint,
                            const std::vector<SampleRecord>& rollouts,
                            const std::vector<double>& scores, double learning_rate) override;
  std::vector<double> token_logprobs(const CheckpointRef& checkpoint,
                                     const SampleRecord& sample) const override;
  std::vector<double> teacher_token_logprobs(const CheckpointRef& checkpoint,
                                             const SampleRecord& sample,
                                             const std::string& context) const override;
  std::int64_t context_token_count(const std::string& context) const override;
  std::set<int> adapted_task_ids(const CheckpointRef& checkpoint) const override;

  // Introspection for tests and reports.
  double archetype_weight(const CheckpointRef& checkpoint, int task_id,
                          eval::ArchetypeClass klass) const;
  double archetype_spread(const CheckpointRef& checkpoint, int task_id, int index) const;

 private:
  struct ArchetypeState {
    ArchetypeSpec spec;
    double intra_logprob = 0.0;  // spec.mean_logprob - ln(spec.weight)
    double weight = 0.0;
    double spread = 0.0;
  };
  struct CheckpointState {
    std::map<int, std::vector<ArchetypeState>> tasks;
    std::set<int> adapted_tasks;
    int step = 0;
  };

  const CheckpointState& state_for(const CheckpointRef& checkpoint) const;
  static std::uint64_t fingerprint(const CheckpointState& state);
  double effective_correct_rate(const ArchetypeState& a) const;

  ScenarioSpec scenario_;
  CheckpointRef root_;
  mutable std::mutex mutex_;  // guards registry_; adapt serializes through it
  std::map<std::string, CheckpointState> registry_;
};

}  // namespace ttc::policy
