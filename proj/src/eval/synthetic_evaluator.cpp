// SPDX-License-Identifier: Apache-2.0

#include "eval/synthetic_evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "core/rng.hpp"

namespace ttc::eval {

namespace {

constexpr std::uint64_t kEvalSalt = 0x65766c7561746f72ull;

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string first_line(const std::string& code) {
  const auto pos = code.find('\n');
  return pos == std::string::npos ? code : code.substr(0, pos);
}

}  // namespace

SyntheticEvaluator::SyntheticEvaluator(std::vector<TaskSpec> tasks, EvaluatorProfile profile)
    : profile_(profile) {
  profile_.kind = BackendKind::synthetic;
  for (auto& t : tasks) tasks_.emplace(t.task_id, t);
}

EvalOutcome SyntheticEvaluator::evaluate(const EvalRequest& request) const {
  if (request.trials < 1) {
    fail(ErrorCode::invalid_argument, "trials must be >= 1");
  }
  if (profile_.strict_trials && request.trials != 5 && request.trials != 50) {
    fail(ErrorCode::invalid_argument,
         "trials must be 5 (fast proxy) or 50 (full protocol) under the default profile");
  }
  const auto it = tasks_.find(request.task_id);
  if (it == tasks_.end()) {
    fail(ErrorCode::unknown_task, "unknown task_id " + std::to_string(request.task_id));
  }
  const double baseline = it->second.baseline_time;

  EvalOutcome out;
  out.trials = request.trials;

  const auto tag = parse_tag(request.code);
  if (!tag) {
    out.compiled = false;
    out.error_trace = "synthetic: unrecognized candidate (no behavior tag)";
    return normalize_outcome(out);
  }

  const std::uint64_t h = rng::mix(kEvalSalt, static_cast<std::uint64_t>(request.task_id),
                                   rng::hash_bytes(first_line(request.code)));

  out.compiled = rng::uniform01(rng::mix(h, 1)) < tag->compile_rate;
  if (!out.compiled) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "synthetic: compilation failed (diag 0x%04x)",
                  static_cast<unsigned>(h & 0xffff));
    out.error_trace = buf;
    return normalize_outcome(out);
  }

  const double correct_given_compiled =
      tag->compile_rate > 0.0 ? std::min(1.0, tag->correct_rate / tag->compile_rate) : 0.0;
  out.correct = rng::uniform01(rng::mix(h, 2)) < correct_given_compiled;

  // True kernel time from the archetype's lognormal speedup law, then
  // per-trial jitter with the median taken.
  double z = rng::gaussian(rng::mix(h, 3));
  z = std::clamp(z, -3.0, 3.0);
  const double true_speedup =
      std::max(1e-6, tag->speedup_median * std::exp(tag->speedup_dispersion * z));
  const double base_ms = baseline / true_speedup;

  std::vector<double> trials_ms;
  trials_ms.reserve(request.trials);
  for (int t = 0; t < request.trials; ++t) {
    const double u = rng::uniform01(rng::mix(h, 100 + static_cast<std::uint64_t>(t)));
    const double jittered = base_ms * (1.0 + profile_.jitter * (2.0 * u - 1.0));
    trials_ms.push_back(std::max(profile_.runtime_floor_ms, jittered));
  }
  out.runtime = median(std::move(trials_ms));
  out.speedup = out.correct ? baseline / out.runtime : 0.0;
  if (!out.correct) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "synthetic: functional equivalence failed (diag 0x%04x)",
                  static_cast<unsigned>((h >> 16) & 0xffff));
    out.error_trace = buf;
  }
  return normalize_outcome(out);
}

}  // namespace ttc::eval
