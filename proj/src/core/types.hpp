// SPDX-License-Identifier: Apache-2.0
//
// Shared domain types. All of these are immutable value objects: safe to
// copy, share, and send between concurrent workers.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "core/error.hpp"

namespace ttc {

enum class Split { train, eval };

enum class SubsetTag { subset1, subset2, extended };

struct TaskSpec {
  int task_id = 0;
  Split split = Split::eval;
  std::optional<SubsetTag> subset_tag;
  double baseline_time = 0.0;  // milliseconds, > 0
};

// Result of executing one candidate. Invariant chain:
//   correct => compiled, and speedup == 0 whenever !correct.
struct EvalOutcome {
  bool compiled = false;
  bool correct = false;
  double speedup = 0.0;   // baseline_time / kernel_time, >= 0
  double runtime = 0.0;   // milliseconds, >= 0
  std::optional<std::string> error_trace;
  int trials = 1;
};

// Forces the invariant chain on a raw outcome.
inline EvalOutcome normalize_outcome(EvalOutcome o) {
  if (!o.compiled) o.correct = false;
  if (!o.correct) o.speedup = 0.0;
  if (o.speedup < 0.0) o.speedup = 0.0;
  if (o.runtime < 0.0) o.runtime = 0.0;
  return o;
}

inline bool outcome_valid(const EvalOutcome& o) {
  if (o.correct && !o.compiled) return false;
  if (!o.correct && o.speedup != 0.0) return false;
  return o.speedup >= 0.0 && o.runtime >= 0.0 && o.trials >= 1;
}

// One generated candidate. total_logprob is the raw sum of per-token log
// probabilities in nats (never length-normalized here; length effects are
// handled by the length-controlled analyses downstream). token_count comes
// from the backend; nothing in this repo re-tokenizes.
struct SampleRecord {
  int task_id = 0;
  std::int64_t seed = 0;
  int sample_index = 0;
  std::string code;
  int token_count = 1;
  double total_logprob = 0.0;  // <= 0
  std::optional<EvalOutcome> outcome;  // absent until evaluated

  // Derivable length-normalized view; selection never uses it by default.
  double mean_logprob_per_token() const {
    return total_logprob / static_cast<double>(token_count < 1 ? 1 : token_count);
  }

  const EvalOutcome& eval() const {
    if (!outcome) fail(ErrorCode::invalid_argument, "sample record has no evaluation outcome");
    return *outcome;
  }
};

enum class BackendKind { remote, synthetic };

// Opaque reference to a policy checkpoint. Lineage is the adaptation chain
// that produced it: (step, parent id) pairs with strictly increasing steps.
struct CheckpointRef {
  std::string id;
  std::vector<std::pair<int, std::string>> lineage;
  BackendKind backend_kind = BackendKind::synthetic;

  int step() const { return lineage.empty() ? 0 : lineage.back().first; }
};

enum class SelectionStrategy {
  oracle_best_correct,
  random_correct,
  confidence_guided,
  surprisal_guided,
  surprisal_guided_top3,
};

inline const char* strategy_name(SelectionStrategy s) {
  switch (s) {
    case SelectionStrategy::oracle_best_correct: return "oracle_best_correct";
    case SelectionStrategy::random_correct: return "random_correct";
    case SelectionStrategy::confidence_guided: return "confidence_guided";
    case SelectionStrategy::surprisal_guided: return "surprisal_guided";
    case SelectionStrategy::surprisal_guided_top3: return "surprisal_guided_top3";
  }
  return "unknown";
}

inline const std::vector<SelectionStrategy>& all_strategies() {
  static const std::vector<SelectionStrategy> v = {
      SelectionStrategy::oracle_best_correct, SelectionStrategy::random_correct,
      SelectionStrategy::confidence_guided, SelectionStrategy::surprisal_guided,
      SelectionStrategy::surprisal_guided_top3};
  return v;
}

enum class CampaignMode {
  best_of_n,
  batch_ttt,
  per_task_ttt,
  sdpo_feedback,
  sdpo_prompt_only,
  probe,
};

inline bool mode_adapts(CampaignMode m) {
  return m == CampaignMode::batch_ttt || m == CampaignMode::per_task_ttt ||
         m == CampaignMode::sdpo_feedback || m == CampaignMode::sdpo_prompt_only ||
         m == CampaignMode::probe;
}

inline bool mode_is_sdpo(CampaignMode m) {
  return m == CampaignMode::sdpo_feedback || m == CampaignMode::sdpo_prompt_only;
}

struct BackendSelection {
  std::string policy = "synthetic";     // synthetic | remote
  std::string evaluator = "synthetic";  // synthetic | remote
  std::string endpoint;                 // remote base URL
};

// A fully seeded experiment plan.
struct CampaignConfig {
  std::vector<TaskSpec> tasks;
  CampaignMode mode = CampaignMode::best_of_n;
  int K = 1;
  int steps = 0;
  double temperature = 0.25;
  int max_tokens = 1024;
  double learning_rate = 1e-5;
  std::optional<int> patience;
  double beta = 1.0;  // SDPO strength
  std::vector<std::int64_t> seeds;
  std::vector<SelectionStrategy> strategy_list;
  std::int64_t rollout_budget = 0;  // per seed

  // Extensions beyond the wire schema (all optional in the document).
  std::string checkpoint_id = "base";
  BackendSelection backend;
  int trials = 5;
  int workers = 1;
  std::map<std::string, double> scenario;  // synthetic-backend overrides
};

// Expected per-seed rollout consumption for a config.
//   best_of_n:            tasks * K
//   *_ttt, sdpo_*:        tasks * K * (steps + 1)   (step 0 evaluation batch
//                         plus one batch per adaptation step)
//   probe:                tasks * K * (steps + 2)   (fixed scoring set plus
//                         the full adaptation chain)
inline std::int64_t planned_rollouts(const CampaignConfig& c) {
  const auto tasks = static_cast<std::int64_t>(c.tasks.size());
  const std::int64_t per_task = static_cast<std::int64_t>(c.K);
  switch (c.mode) {
    case CampaignMode::best_of_n: return tasks * per_task;
    case CampaignMode::batch_ttt:
    case CampaignMode::per_task_ttt:
    case CampaignMode::sdpo_feedback:
    case CampaignMode::sdpo_prompt_only:
      return tasks * per_task * (c.steps + 1);
    case CampaignMode::probe: return tasks * per_task * (c.steps + 2);
  }
  return 0;
}

std::vector<std::string> validate_config(const CampaignConfig& config);

}  // namespace ttc
