// SPDX-License-Identifier: Apache-2.0
//
// Uniform contract for execution-grounded evaluation. Implementations must
// keep evaluate() safe to call concurrently from many workers.
#pragma once

#include <string>

#include "core/types.hpp"

namespace ttc::eval {

struct EvalRequest {
  int task_id = 0;
  std::string code;
  int trials = 5;  // 5 = fast proxy, 50 = full protocol
};

struct EvaluatorProfile {
  BackendKind kind = BackendKind::synthetic;
  int trials_default = 5;
  double timeout_seconds = 30.0;  // > 0
  double jitter = 0.05;           // per-trial multiplicative runtime jitter
  double runtime_floor_ms = 1e-6;
  bool strict_trials = true;  // restrict trials to {5, 50}
};

class Evaluator {
 public:
  virtual ~Evaluator() = default;
  virtual EvalOutcome evaluate(const EvalRequest& request) const = 0;
};

inline double compute_reward(const EvalOutcome& o) { return o.correct ? o.speedup : 0.0; }

// Correct AND strictly faster than baseline.
inline bool is_fast1(const EvalOutcome& o) { return o.correct && o.speedup > 1.0; }

}  // namespace ttc::eval
