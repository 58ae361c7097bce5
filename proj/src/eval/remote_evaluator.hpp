// SPDX-License-Identifier: Apache-2.0
//
// HTTP adapter for a real compile-and-time service. Wire contract (JSON):
//   POST /evaluate   {"task_id": int, "code": str, "trials": int}
//     -> 200 {"compiled": bool, "correct": bool, "speedup": num,
//             "runtime": num, "error_trace": str|null}
// Connection failures raise backend_unreachable. Timeouts after connection
// map to compiled=false with a synthetic error trace so budget accounting
// never loses a rollout.
#pragma once

#include <memory>
#include <string>

#include "eval/evaluator.hpp"

namespace ttc::eval {

class RemoteEvaluator : public Evaluator {
 public:
  RemoteEvaluator(std::string base_url, EvaluatorProfile profile = {});
  ~RemoteEvaluator() override;

  EvalOutcome evaluate(const EvalRequest& request) const override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ttc::eval
