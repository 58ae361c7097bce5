// SPDX-License-Identifier: Apache-2.0

#include "policy/remote_policy.hpp"

#include <chrono>
#include <cmath>
#include <map>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace ttc::policy {

using nlohmann::json;

struct RemotePolicy::Impl {
  std::string base_url;
  RemotePolicyOptions options;
  mutable httplib::Client client;
  std::mutex adapt_mutex;  // one writer per lineage; the service owns ordering
  mutable std::mutex meta_mutex;
  std::map<std::string, std::set<int>> adapted_tasks;  // reported by the service

  Impl(std::string url, RemotePolicyOptions opts)
      : base_url(std::move(url)), options(opts), client(base_url) {
    const auto timeout = std::max(1, static_cast<int>(std::lround(options.timeout_seconds)));
    client.set_connection_timeout(timeout, 0);
    client.set_read_timeout(timeout, 0);
    client.set_write_timeout(timeout, 0);
  }

  json post(const std::string& path, const json& body) const {
    auto res = client.Post(path, body.dump(), "application/json");
    if (!res) {
      fail(ErrorCode::backend_unreachable,
           "policy backend unreachable: " + httplib::to_string(res.error()));
    }
    if (res->status == 404) {
      fail(ErrorCode::unknown_checkpoint, "policy backend: unknown checkpoint");
    }
    if (res->status != 200) {
      fail(ErrorCode::backend_unreachable,
           "policy backend returned status " + std::to_string(res->status));
    }
    try {
      return json::parse(res->body);
    } catch (const json::exception& e) {
      fail(ErrorCode::backend_unreachable,
           std::string("policy backend: malformed response: ") + e.what());
    }
  }
};

RemotePolicy::RemotePolicy(std::string base_url, RemotePolicyOptions options)
    : impl_(std::make_unique<Impl>(std::move(base_url), options)) {}

RemotePolicy::~RemotePolicy() = default;

std::vector<SampleRecord> RemotePolicy::draw_samples(const SampleBatchRequest& request) {
  if (request.K < 1) fail(ErrorCode::invalid_argument, "K must be >= 1");
  json body;
  body["checkpoint_id"] = request.checkpoint.id;
  body["prompt_id"] = request.task_id;
  body["K"] = request.K;
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_tokens;
  body["seed"] = request.seed;
  const json reply = impl_->post("/sample", body);

  std::vector<SampleRecord> out;
  try {
    const auto& samples = reply.at("samples");
    if (static_cast<int>(samples.size()) != request.K) {
      fail(ErrorCode::backend_unreachable, "policy backend returned wrong sample count");
    }
    int index = 0;
    for (const auto& s : samples) {
      SampleRecord r;
      r.task_id = request.task_id;
      r.seed = request.seed;
      r.sample_index = index++;
      r.code = s.at("code").get<std::string>();
      r.token_count = s.at("token_count").get<int>();
      r.total_logprob = s.at("total_logprob").get<double>();
      if (r.token_count < 1 || r.total_logprob > 0.0) {
        fail(ErrorCode::backend_unreachable,
             "policy backend returned an invalid sample (token_count or logprob)");
      }
      out.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::backend_unreachable,
         std::string("policy backend: malformed sample response: ") + e.what());
  }
  return out;
}

double RemotePolicy::score_nll(const CheckpointRef& checkpoint,
                               const SampleRecord& sample) const {
  json body;
  body["checkpoint_id"] = checkpoint.id;
  body["code"] = sample.code;
  const json reply = impl_->post("/score", body);
  try {
    return reply.at("nll").get<double>();
  } catch (const json::exception& e) {
    fail(ErrorCode::backend_unreachable,
         std::string("policy backend: malformed score response: ") + e.what());
  }
}

AdaptOutcome RemotePolicy::adapt_scored(const CheckpointRef& checkpoint,
                                        const std::vector<SampleRecord>& rollouts,
                                        const std::vector<double>& scores,
                                        double learning_rate) {
  if (rollouts.empty()) fail(ErrorCode::invalid_argument, "adapt requires non-empty rollouts");
  if (rollouts.size() != scores.size()) {
    fail(ErrorCode::invalid_argument, "rollouts/scores length mismatch");
  }
  std::lock_guard<std::mutex> lock(impl_->adapt_mutex);

  json body;
  body["checkpoint_id"] = checkpoint.id;
  json arr = json::array();
  std::int64_t student_tokens = 0;
  for (size_t i = 0; i < rollouts.size(); ++i) {
    arr.push_back({{"code", rollouts[i].code}, {"reward", scores[i]}});
    student_tokens += rollouts[i].token_count;
  }
  body["rollouts"] = std::move(arr);
  body["learning_rate"] = learning_rate;
  const json submitted = impl_->post("/adapt", body);

  std::string job_id;
  try {
    job_id = submitted.at("job_id").get<std::string>();
  } catch (const json::exception& e) {
    fail(ErrorCode::backend_unreachable,
         std::string("policy backend: malformed adapt response: ") + e.what());
  }

  for (int attempt = 0; attempt < impl_->options.max_polls; ++attempt) {
    const json poll = impl_->post("/poll", json{{"job_id", job_id}});
    const std::string status = poll.value("status", "done");
    if (status == "pending") {
      std::this_thread::sleep_for(std::chrono::duration<double>(
          impl_->options.poll_interval_seconds));
      continue;
    }
    try {
      AdaptOutcome outcome;
      outcome.new_checkpoint.id = poll.at("new_checkpoint_id").get<std::string>();
      outcome.new_checkpoint.backend_kind = BackendKind::remote;
      outcome.new_checkpoint.lineage = checkpoint.lineage;
      outcome.new_checkpoint.lineage.emplace_back(checkpoint.step() + 1, checkpoint.id);
      outcome.rollouts_consumed = static_cast<std::int64_t>(rollouts.size());
      outcome.student_tokens = student_tokens;
      {
        std::lock_guard<std::mutex> meta(impl_->meta_mutex);
        auto& tasks = impl_->adapted_tasks[outcome.new_checkpoint.id];
        tasks = impl_->adapted_tasks[checkpoint.id];
        if (poll.contains("adapted_task_ids")) {
          for (const auto& t : poll.at("adapted_task_ids")) tasks.insert(t.get<int>());
        } else {
          for (const auto& r : rollouts) tasks.insert(r.task_id);
        }
      }
      return outcome;
    } catch (const json::exception& e) {
      fail(ErrorCode::backend_unreachable,
           std::string("policy backend: malformed poll response: ") + e.what());
    }
  }
  fail(ErrorCode::backend_unreachable, "policy backend: adapt job never completed");
}

std::vector<double> RemotePolicy::token_logprobs(const CheckpointRef& checkpoint,
                                                 const SampleRecord& sample) const {
  json body;
  body["checkpoint_id"] = checkpoint.id;
  body["code"] = sample.code;
  const json reply = impl_->post("/score", body);
  if (reply.contains("token_logprobs")) {
    return reply.at("token_logprobs").get<std::vector<double>>();
  }
  // Backend reported only a sequence NLL: spread it evenly.
  const int n = std::max(1, sample.token_count);
  return std::vector<double>(n, -reply.at("nll").get<double>() / n);
}

std::vector<double> RemotePolicy::teacher_token_logprobs(const CheckpointRef& checkpoint,
                                                         const SampleRecord& sample,
                                                         const std::string& context) const {
  json body;
  body["checkpoint_id"] = checkpoint.id;
  body["code"] = sample.code;
  body["context"] = context;
  const json reply = impl_->post("/score", body);
  if (reply.contains("token_logprobs")) {
    return reply.at("token_logprobs").get<std::vector<double>>();
  }
  const int n = std::max(1, sample.token_count);
  return std::vector<double>(n, -reply.at("nll").get<double>() / n);
}

std::int64_t RemotePolicy::context_token_count(const std::string& context) const {
  json body;
  body["checkpoint_id"] = "";
  body["code"] = "";
  body["context"] = context;
  const json reply = impl_->post("/score", body);
  if (reply.contains("context_token_count")) {
    return reply.at("context_token_count").get<std::int64_t>();
  }
  return static_cast<std::int64_t>((context.size() + 3) / 4);
}

std::set<int> RemotePolicy::adapted_task_ids(const CheckpointRef& checkpoint) const {
  std::lock_guard<std::mutex> meta(impl_->meta_mutex);
  auto it = impl_->adapted_tasks.find(checkpoint.id);
  return it == impl_->adapted_tasks.end() ? std::set<int>{} : it->second;
}

}  // namespace ttc::policy
