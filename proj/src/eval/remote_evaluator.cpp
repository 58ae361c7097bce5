// SPDX-License-Identifier: Apache-2.0

#include "eval/remote_evaluator.hpp"

#include <cmath>

#include <httplib.h>
#include <json.hpp>

namespace ttc::eval {

using nlohmann::json;

struct RemoteEvaluator::Impl {
  std::string base_url;
  EvaluatorProfile profile;
  mutable httplib::Client client;

  explicit Impl(std::string url, EvaluatorProfile prof)
      : base_url(std::move(url)), profile(prof), client(base_url) {
    const auto timeout = std::max(1, static_cast<int>(std::lround(profile.timeout_seconds)));
    client.set_connection_timeout(timeout, 0);
    client.set_read_timeout(timeout, 0);
    client.set_write_timeout(timeout, 0);
  }
};

RemoteEvaluator::RemoteEvaluator(std::string base_url, EvaluatorProfile profile)
    : impl_(std::make_unique<Impl>(std::move(base_url), profile)) {
  impl_->profile.kind = BackendKind::remote;
}

RemoteEvaluator::~RemoteEvaluator() = default;

EvalOutcome RemoteEvaluator::evaluate(const EvalRequest& request) const {
  if (request.trials < 1) fail(ErrorCode::invalid_argument, "trials must be >= 1");
  json body;
  body["task_id"] = request.task_id;
  body["code"] = request.code;
  body["trials"] = request.trials;

  auto res = impl_->client.Post("/evaluate", body.dump(), "application/json");
  if (!res) {
    const auto err = res.error();
    if (err == httplib::Error::Read || err == httplib::Error::Write) {
      // The request was accepted but timed out: count the rollout as failed.
      EvalOutcome out;
      out.compiled = false;
      out.error_trace = "remote evaluation timed out";
      out.trials = request.trials;
      return normalize_outcome(out);
    }
    fail(ErrorCode::backend_unreachable,
         "evaluator backend unreachable: " + httplib::to_string(err));
  }
  if (res->status == 404) {
    fail(ErrorCode::unknown_task, "evaluator backend: unknown task " +
                                      std::to_string(request.task_id));
  }
  if (res->status != 200) {
    fail(ErrorCode::backend_unreachable,
         "evaluator backend returned status " + std::to_string(res->status));
  }
  try {
    const json j = json::parse(res->body);
    EvalOutcome out;
    out.compiled = j.at("compiled").get<bool>();
    out.correct = j.at("correct").get<bool>();
    out.speedup = j.at("speedup").get<double>();
    out.runtime = j.at("runtime").get<double>();
    if (j.contains("error_trace") && !j.at("error_trace").is_null()) {
      out.error_trace = j.at("error_trace").get<std::string>();
    }
    out.trials = request.trials;
    return normalize_outcome(out);
  } catch (const json::exception& e) {
    fail(ErrorCode::backend_unreachable,
         std::string("evaluator backend: malformed response: ") + e.what());
  }
}

}  // namespace ttc::eval
