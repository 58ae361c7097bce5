// SPDX-License-Identifier: Apache-2.0
//
// HTTP adapter for a real sampling/training service. Wire contract (JSON):
//   POST /sample {"checkpoint_id": str, "prompt_id": int, "K": int,
//                 "temperature": num, "max_tokens": int, "seed": int}
//     -> 200 {"samples": [{"code": str, "token_count": int,
//                          "total_logprob": num}]}
//   POST /score  {"checkpoint_id": str, "code": str}
//     -> 200 {"nll": num, "token_logprobs": [num]?, "context_token_count": int?}
//      (optional "context": str in the request for teacher scoring)
//   POST /adapt  {"checkpoint_id": str, "rollouts": [{"code": str,
//                 "reward": num}], "learning_rate": num}
//     -> 200 {"job_id": str}
//   POST /poll   {"job_id": str}
//     -> 200 {"status": "pending"} | {"status": "done",
//             "new_checkpoint_id": str, "adapted_task_ids": [int]?}
// Adaptation is asynchronous at the service: the adapter polls until the
// child checkpoint id is returned. Adapt calls on the same lineage are
// serialized by this adapter.
#pragma once

#include <memory>
#include <string>

#include "policy/policy.hpp"

namespace ttc::policy {

struct RemotePolicyOptions {
  double timeout_seconds = 30.0;
  double poll_interval_seconds = 0.05;
  int max_polls = 1200;
};

class RemotePolicy : public Policy {
 public:
  RemotePolicy(std::string base_url, RemotePolicyOptions options = {});
  ~RemotePolicy() override;

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

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ttc::policy
