// SPDX-License-Identifier: Apache-2.0

#include "support/scripted.hpp"

#include "adapt/adaptation.hpp"

namespace ttc::testing {

EvalOutcome ScriptedEvaluator::evaluate(const eval::EvalRequest& request) const {
  EvalOutcome out;
  out.trials = request.trials;
  if (request.code.find("FAST") != std::string::npos) {
    out.compiled = true;
    out.correct = true;
    out.speedup = 2.0;
    out.runtime = 2.0;
  } else if (request.code.find("SLOW") != std::string::npos) {
    out.compiled = true;
    out.correct = true;
    out.speedup = 0.5;
    out.runtime = 8.0;
  } else {
    out.compiled = false;
    out.error_trace = "scripted compile failure";
  }
  return normalize_outcome(out);
}

ScriptedPolicy::ScriptedPolicy(std::vector<std::map<int, int>> counts,
                               std::int64_t campaign_seed)
    : counts_(std::move(counts)) {
  root_.id = "scripted-step-0";
  for (int s = 0; s < static_cast<int>(counts_.size()) + 2; ++s) {
    seed_to_step_[adapt::step_seed(campaign_seed, s)] = s;
  }
}

ScriptedPolicy ScriptedPolicy::for_checkpoints(
    std::map<std::string, std::map<int, int>> by_checkpoint, std::int64_t campaign_seed) {
  ScriptedPolicy p({}, campaign_seed);
  p.by_checkpoint_ = std::move(by_checkpoint);
  return p;
}

std::vector<SampleRecord> ScriptedPolicy::draw_samples(
    const policy::SampleBatchRequest& request) {
  int fast = 0;
  if (!by_checkpoint_.empty()) {
    auto it = by_checkpoint_.find(request.checkpoint.id);
    if (it == by_checkpoint_.end()) {
      fail(ErrorCode::unknown_checkpoint, "scripted: unknown checkpoint " + request.checkpoint.id);
    }
    fast = it->second.at(request.task_id);
  } else {
    auto it = seed_to_step_.find(request.seed);
    if (it == seed_to_step_.end()) {
      fail(ErrorCode::invalid_argument, "scripted: unexpected draw seed");
    }
    const auto step = static_cast<std::size_t>(it->second);
    if (step >= counts_.size()) {
      fail(ErrorCode::invalid_argument, "scripted: no counts for step");
    }
    fast = counts_[step].at(request.task_id);
  }

  std::vector<SampleRecord> out;
  for (int i = 0; i < request.K; ++i) {
    SampleRecord r;
    r.task_id = request.task_id;
    r.seed = request.seed;
    r.sample_index = i;
    const char* verdict = i < fast ? "FAST" : (i % 2 == 0 ? "SLOW" : "BAD");
    r.code = std::string(verdict) + " t" + std::to_string(request.task_id) + " i" +
             std::to_string(i);
    r.token_count = 100;
    r.total_logprob = -50.0 - i;
    out.push_back(std::move(r));
  }
  return out;
}

double ScriptedPolicy::score_nll(const CheckpointRef&, const SampleRecord& sample) const {
  return -sample.total_logprob;
}

policy::AdaptOutcome ScriptedPolicy::adapt_scored(const CheckpointRef& checkpoint,
                                                  const std::vector<SampleRecord>& rollouts,
                                                  const std::vector<double>&, double) {
  if (rollouts.empty()) fail(ErrorCode::invalid_argument, "empty rollouts");
  policy::AdaptOutcome outcome;
  const int next = checkpoint.step() + 1;
  outcome.new_checkpoint.id = "scripted-step-" + std::to_string(next);
  outcome.new_checkpoint.lineage = checkpoint.lineage;
  outcome.new_checkpoint.lineage.emplace_back(next, checkpoint.id);
  outcome.rollouts_consumed = static_cast<std::int64_t>(rollouts.size());
  for (const auto& r : rollouts) outcome.student_tokens += r.token_count;
  return outcome;
}

std::vector<double> ScriptedPolicy::token_logprobs(const CheckpointRef&,
                                                   const SampleRecord& sample) const {
  const int n = std::max(1, sample.token_count);
  return std::vector<double>(n, sample.total_logprob / n);
}

std::vector<double> ScriptedPolicy::teacher_token_logprobs(const CheckpointRef& checkpoint,
                                                           const SampleRecord& sample,
                                                           const std::string&) const {
  auto v = token_logprobs(checkpoint, sample);
  for (auto& lp : v) lp += 0.1;
  return v;
}

std::int64_t ScriptedPolicy::context_token_count(const std::string& context) const {
  return static_cast<std::int64_t>(context.size() / 4);
}

std::set<int> ScriptedPolicy::adapted_task_ids(const CheckpointRef& checkpoint) const {
  auto it = adapted_.find(checkpoint.id);
  return it == adapted_.end() ? std::set<int>{} : it->second;
}

void ScriptedPolicy::set_adapted_tasks(const std::string& checkpoint_id, std::set<int> tasks) {
  adapted_[checkpoint_id] = std::move(tasks);
}

}  // namespace ttc::testing
