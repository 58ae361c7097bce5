// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <vector>

#include "eval/evaluator.hpp"
#include "eval/tag.hpp"

namespace ttc::eval {

// Deterministic stand-in for a compile-and-time service. Per-trial runtimes
// come from a fixed 64-bit mixing function of (task_id, tag line, trial
// index); the reported runtime is the median over trials, mirroring the
// median-of-CUDA-events protocol without hardware. Stateless and
// referentially transparent: identical requests give identical outcomes.
class SyntheticEvaluator : public Evaluator {
 public:
  SyntheticEvaluator(std::vector<TaskSpec> tasks, EvaluatorProfile profile = {});

  EvalOutcome evaluate(const EvalRequest& request) const override;

  const EvaluatorProfile& profile() const { return profile_; }

 private:
  std::map<int, TaskSpec> tasks_;
  EvaluatorProfile profile_;
};

}  // namespace ttc::eval
