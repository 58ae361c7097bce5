// SPDX-License-Identifier: Apache-2.0

#include "campaign/campaign.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "core/records.hpp"
#include "core/rng.hpp"
#include "eval/remote_evaluator.hpp"
#include "eval/synthetic_evaluator.hpp"
#include "policy/remote_policy.hpp"
#include "policy/synthetic_policy.hpp"
#include "scaling/scaling.hpp"

namespace ttc::campaign {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io_failure, "cannot write " + path);
  out << content;
}

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

// CSV with '#'-prefixed metadata lines so every figure number is auditable.
class CsvBuilder {
 public:
  CsvBuilder& meta(const std::string& key, const std::string& value) {
    buf_ << "# " << key << "=" << value << "\n";
    return *this;
  }
  CsvBuilder& row(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) buf_ << ",";
      buf_ << cells[i];
    }
    buf_ << "\n";
    return *this;
  }
  std::string str() const { return buf_.str(); }

 private:
  std::ostringstream buf_;
};

struct Backends {
  std::unique_ptr<eval::Evaluator> evaluator;
  std::unique_ptr<policy::Policy> policy;
  CheckpointRef root;
};

Backends make_backends(const CampaignConfig& config, const std::string& endpoint_override) {
  Backends b;
  std::string endpoint = endpoint_override.empty() ? config.backend.endpoint : endpoint_override;
  if (endpoint.empty()) {
    if (const char* env = std::getenv("TTC_BACKEND_URL")) endpoint = env;
  }

  eval::EvaluatorProfile profile;
  profile.trials_default = config.trials;
  if (auto it = config.scenario.find("jitter"); it != config.scenario.end()) {
    profile.jitter = it->second;
  }
  if (config.backend.evaluator == "remote") {
    if (endpoint.empty()) {
      fail(ErrorCode::config_invalid, "remote evaluator requires a backend endpoint");
    }
    b.evaluator = std::make_unique<eval::RemoteEvaluator>(endpoint, profile);
  } else if (config.backend.evaluator == "synthetic") {
    b.evaluator = std::make_unique<eval::SyntheticEvaluator>(config.tasks, profile);
  } else {
    fail(ErrorCode::config_invalid, "unknown evaluator backend: " + config.backend.evaluator);
  }

  if (config.backend.policy == "remote") {
    if (endpoint.empty()) {
      fail(ErrorCode::config_invalid, "remote policy requires a backend endpoint");
    }
    b.policy = std::make_unique<policy::RemotePolicy>(endpoint);
    b.root.id = config.checkpoint_id;
    b.root.backend_kind = BackendKind::remote;
  } else if (config.backend.policy == "synthetic") {
    auto synthetic = std::make_unique<policy::SyntheticPolicy>(
        policy::stock_scenario(config.tasks, config.scenario));
    b.root = synthetic->root();
    b.policy = std::move(synthetic);
  } else {
    fail(ErrorCode::config_invalid, "unknown policy backend: " + config.backend.policy);
  }
  return b;
}

std::string campaign_id(const CampaignConfig& config) {
  std::uint64_t h = rng::hash_bytes(io::config_to_json(config));
  char buf[32];
  std::snprintf(buf, sizeof(buf), "c%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string task_prompt(int task_id) {
  return "Optimize the reference kernel for benchmark task " + std::to_string(task_id) + ".";
}

// Evaluate a batch with bounded worker parallelism and a deterministic
// indexed gather: outcomes land by position, so results are identical for
// any worker count.
void evaluate_batch(std::vector<SampleRecord>& samples, const eval::Evaluator& evaluator,
                    int trials, int workers) {
  const auto evaluate_one = [&](SampleRecord& s) {
    EvalOutcome outcome;
    try {
      outcome = evaluator.evaluate({s.task_id, s.code, trials});
    } catch (const Error& e) {
      if (e.code() == ErrorCode::backend_unreachable) throw;
      outcome.compiled = false;
      outcome.error_trace = std::string("evaluation failed: ") + e.what();
      outcome.trials = trials;
      outcome = normalize_outcome(outcome);
    }
    s.outcome = outcome;
  };
  if (workers <= 1 || samples.size() < 2) {
    for (auto& s : samples) evaluate_one(s);
    return;
  }
  const int n_threads = std::min<int>(workers, static_cast<int>(samples.size()));
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(n_threads);
  for (int t = 0; t < n_threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < samples.size(); i += n_threads) evaluate_one(samples[i]);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
}

json trajectory_row(std::int64_t seed, const adapt::TrajectoryStep& step) {
  json row;
  row["seed"] = seed;
  row["step"] = step.step;
  row["checkpoint_id"] = step.checkpoint.id;
  row["cumulative_rollouts"] = step.cumulative_rollouts;
  row["aggregate_fast1"] = step.aggregate_fast1;
  json per_task;
  for (const auto& [task, v] : step.per_task_fast1) per_task[std::to_string(task)] = v;
  row["per_task_fast1"] = std::move(per_task);
  return row;
}

json ledger_json(const adapt::BudgetLedger& ledger) {
  json j;
  j["rollouts"] = ledger.rollouts;
  j["student_tokens"] = ledger.student_tokens;
  j["teacher_tokens"] = ledger.teacher_tokens;
  j["total_tokens"] = ledger.total_tokens();
  j["extra_timing_evals"] = ledger.extra_timing_evals;
  j["wall_clock_seconds"] = ledger.wall_clock_seconds;
  return j;
}

// SDPO loop: batch adaptation where the update signal is the per-rollout
// mean token advantage instead of the execution reward. Execution outcomes
// still gate which same-batch solution feeds the teacher context.
adapt::BoaResult run_sdpo(const std::vector<TaskSpec>& tasks, const CheckpointRef& start,
                          policy::Policy& policy, const eval::Evaluator& evaluator,
                          const adapt::LoopOptions& options, adapt::SdpoVariant variant,
                          double beta, adapt::BudgetLedger& ledger,
                          const adapt::RecordSink& sink) {
  adapt::BoaResult result;
  CheckpointRef current = start;
  std::int64_t cumulative = 0;

  auto run_step = [&](int step) {
    std::vector<SampleRecord> rollouts;
    std::map<int, double> per_task;
    std::size_t fast_total = 0;
    for (const auto& task : tasks) {
      policy::SampleBatchRequest req;
      req.checkpoint = current;
      req.task_id = task.task_id;
      req.K = options.K;
      req.temperature = options.temperature;
      req.max_tokens = options.max_tokens;
      req.seed = adapt::step_seed(options.seed, step);
      auto samples = policy.draw_samples(req);
      std::size_t fast = 0;
      for (auto& s : samples) {
        s.outcome = evaluator.evaluate({s.task_id, s.code, options.trials});
        if (eval::is_fast1(*s.outcome)) ++fast;
        ledger.student_tokens += s.token_count;
      }
      per_task[task.task_id] =
          samples.empty() ? 0.0 : static_cast<double>(fast) / samples.size();
      fast_total += fast;
      for (auto& s : samples) rollouts.push_back(std::move(s));
    }
    ledger.rollouts += static_cast<std::int64_t>(rollouts.size());
    cumulative += static_cast<std::int64_t>(rollouts.size());
    if (sink) {
      for (const auto& r : rollouts) sink(r);
    }
    const double aggregate =
        rollouts.empty() ? 0.0 : static_cast<double>(fast_total) / rollouts.size();
    return std::make_tuple(std::move(rollouts), per_task, aggregate);
  };

  // Step 0 evaluation batch.
  auto [rollouts0, per_task0, aggregate0] = run_step(0);
  result.trajectory.push_back({0, current, cumulative, aggregate0, per_task0});

  for (int s = 1; s <= options.steps; ++s) {
    auto [rollouts, per_task, aggregate] = run_step(s);

    // Best correct same-batch solution per task, for the teacher context.
    std::map<int, const SampleRecord*> best_correct;
    for (const auto& r : rollouts) {
      if (!r.eval().correct) continue;
      auto& slot = best_correct[r.task_id];
      if (slot == nullptr || r.eval().speedup > slot->eval().speedup) slot = &r;
    }

    std::vector<double> scalars;
    scalars.reserve(rollouts.size());
    for (const auto& r : rollouts) {
      std::optional<std::string> solution;
      if (variant == adapt::SdpoVariant::feedback) {
        auto it = best_correct.find(r.task_id);
        if (it != best_correct.end()) solution = it->second->code;
      }
      const std::string context =
          variant == adapt::SdpoVariant::feedback
              ? adapt::build_teacher_context(task_prompt(r.task_id), solution, r.eval(),
                                             adapt::SdpoVariant::feedback)
              : adapt::build_teacher_context(task_prompt(r.task_id), std::nullopt, std::nullopt,
                                             adapt::SdpoVariant::prompt_only);
      const auto student = policy.token_logprobs(current, r);
      const auto teacher = policy.teacher_token_logprobs(current, r, context);
      const auto advantages = adapt::sdpo_advantages(teacher, student, beta, variant);
      double mean = 0.0;
      for (double a : advantages.per_token) mean += a;
      scalars.push_back(mean / static_cast<double>(advantages.per_token.size()));
      ledger.teacher_tokens += policy.context_token_count(context) + r.token_count;
    }

    const auto outcome = policy.adapt_scored(current, rollouts, scalars, options.learning_rate);
    current = outcome.new_checkpoint;
    result.trajectory.push_back({s, current, cumulative, aggregate, per_task});
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < result.trajectory.size(); ++i) {
    if (result.trajectory[i].aggregate_fast1 > result.trajectory[best].aggregate_fast1) best = i;
  }
  result.selected = result.trajectory[best].checkpoint;
  result.selected_step = result.trajectory[best].step;
  return result;
}

}  // namespace

RunResult cmd_run(const CampaignConfig& config, const std::string& out_dir,
                  const std::string& endpoint_override) {
  const auto violations = validate_config(config);
  if (!violations.empty()) {
    std::ostringstream msg;
    msg << "config invalid:";
    for (const auto& v : violations) msg << "\n  - " << v;
    fail(ErrorCode::config_invalid, msg.str());
  }

  fs::create_directories(out_dir);
  RunResult result;
  result.records_path = (fs::path(out_dir) / "records.jsonl").string();
  result.ledger_path = (fs::path(out_dir) / "ledger.json").string();
  result.manifest_path = (fs::path(out_dir) / "manifest.json").string();

  const auto t_start = std::chrono::steady_clock::now();
  std::ofstream records_out(result.records_path, std::ios::binary);
  if (!records_out) fail(ErrorCode::io_failure, "cannot write " + result.records_path);

  std::ofstream trajectory_out;
  std::ofstream probe_out;
  const bool wants_trajectory = mode_adapts(config.mode);
  if (wants_trajectory) {
    result.trajectory_path = (fs::path(out_dir) / "trajectory.jsonl").string();
    trajectory_out.open(*result.trajectory_path, std::ios::binary);
    if (!trajectory_out) fail(ErrorCode::io_failure, "cannot write " + *result.trajectory_path);
  }
  if (config.mode == CampaignMode::probe) {
    result.probe_path = (fs::path(out_dir) / "probe.jsonl").string();
    probe_out.open(*result.probe_path, std::ios::binary);
    if (!probe_out) fail(ErrorCode::io_failure, "cannot write " + *result.probe_path);
  }

  auto finalize_manifest = [&](const std::string& status) {
    json manifest;
    manifest["campaign_id"] = campaign_id(config);
    manifest["tool_version"] = kToolVersion;
    manifest["created"] = iso_timestamp();
    manifest["status"] = status;
    manifest["config"] = json::parse(io::config_to_json(config));
    manifest["seeds"] = config.seeds;
    json artifacts;
    artifacts["records"] = result.records_path;
    artifacts["ledger"] = result.ledger_path;
    if (result.trajectory_path) artifacts["trajectory"] = *result.trajectory_path;
    if (result.probe_path) artifacts["probe"] = *result.probe_path;
    manifest["artifacts"] = std::move(artifacts);
    manifest["record_count"] = result.record_count;
    json selected;
    for (const auto& [seed, pick] : result.selected) {
      selected[std::to_string(seed)] = {{"step", pick.first}, {"checkpoint_id", pick.second}};
    }
    manifest["selected"] = std::move(selected);
    write_file(result.manifest_path, manifest.dump(2) + "\n");
  };

  Backends backends = make_backends(config, endpoint_override);
  adapt::RecordSink sink = [&](const SampleRecord& r) {
    records_out << io::record_to_line(r) << '\n';
    result.record_count += 1;
  };

  try {
    for (const std::int64_t seed : config.seeds) {
      adapt::LoopOptions loop;
      loop.steps = config.steps;
      loop.K = config.K;
      loop.learning_rate = config.learning_rate;
      loop.temperature = config.temperature;
      loop.max_tokens = config.max_tokens;
      loop.trials = config.trials;
      loop.seed = seed;
      loop.patience = config.patience;

      switch (config.mode) {
        case CampaignMode::best_of_n: {
          for (const auto& task : config.tasks) {
            policy::SampleBatchRequest req;
            req.checkpoint = backends.root;
            req.task_id = task.task_id;
            req.K = config.K;
            req.temperature = config.temperature;
            req.max_tokens = config.max_tokens;
            req.seed = seed;
            auto samples = backends.policy->draw_samples(req);
            evaluate_batch(samples, *backends.evaluator, config.trials, config.workers);
            for (auto& s : samples) {
              result.ledger.rollouts += 1;
              result.ledger.student_tokens += s.token_count;
              sink(s);
            }
          }
          break;
        }
        case CampaignMode::batch_ttt: {
          auto boa = adapt::run_boa(config.tasks, backends.root, *backends.policy,
                                    *backends.evaluator, loop, sink);
          result.ledger.merge(boa.ledger);
          for (const auto& step : boa.trajectory) {
            trajectory_out << trajectory_row(seed, step).dump() << '\n';
          }
          result.selected[seed] = {boa.selected_step, boa.selected.id};
          break;
        }
        case CampaignMode::per_task_ttt: {
          for (const auto& task : config.tasks) {
            auto boa = adapt::run_boa({task}, backends.root, *backends.policy,
                                      *backends.evaluator, loop, sink);
            result.ledger.merge(boa.ledger);
            for (const auto& step : boa.trajectory) {
              trajectory_out << trajectory_row(seed, step).dump() << '\n';
            }
          }
          break;
        }
        case CampaignMode::sdpo_feedback:
        case CampaignMode::sdpo_prompt_only: {
          const auto variant = config.mode == CampaignMode::sdpo_feedback
                                   ? adapt::SdpoVariant::feedback
                                   : adapt::SdpoVariant::prompt_only;
          auto boa = run_sdpo(config.tasks, backends.root, *backends.policy,
                              *backends.evaluator, loop, variant, config.beta, result.ledger,
                              sink);
          for (const auto& step : boa.trajectory) {
            trajectory_out << trajectory_row(seed, step).dump() << '\n';
          }
          result.selected[seed] = {boa.selected_step, boa.selected.id};
          break;
        }
        case CampaignMode::probe: {
          // Fixed scoring set: one Best-of-N batch at the starting checkpoint.
          std::vector<SampleRecord> fixed;
          for (const auto& task : config.tasks) {
            policy::SampleBatchRequest req;
            req.checkpoint = backends.root;
            req.task_id = task.task_id;
            req.K = config.K;
            req.temperature = config.temperature;
            req.max_tokens = config.max_tokens;
            req.seed = seed;
            auto samples = backends.policy->draw_samples(req);
            evaluate_batch(samples, *backends.evaluator, config.trials, config.workers);
            for (auto& s : samples) {
              result.ledger.rollouts += 1;
              result.ledger.student_tokens += s.token_count;
              sink(s);
              fixed.push_back(s);
            }
          }
          // Adaptation chain whose checkpoints score the fixed set.
          auto boa = adapt::run_boa(config.tasks, backends.root, *backends.policy,
                                    *backends.evaluator, loop, sink);
          result.ledger.merge(boa.ledger);
          for (const auto& step : boa.trajectory) {
            trajectory_out << trajectory_row(seed, step).dump() << '\n';
          }
          result.selected[seed] = {boa.selected_step, boa.selected.id};

          std::vector<CheckpointRef> checkpoints;
          for (const auto& step : boa.trajectory) checkpoints.push_back(step.checkpoint);
          double tail_fraction = 0.25;
          if (auto it = config.scenario.find("tail_fraction"); it != config.scenario.end()) {
            tail_fraction = it->second;
          }
          const auto probe = stats::anticalibration_probe(
              fixed, checkpoints,
              [&](const CheckpointRef& c, const SampleRecord& s) {
                return backends.policy->score_nll(c, s);
              },
              tail_fraction);
          for (const auto& row : probe.per_step) {
            json j;
            j["seed"] = seed;
            j["step"] = row.step;
            j["rho_all"] = row.rho_all;
            j["p_all"] = row.p_all;
            j["rho_tail"] = row.rho_tail;
            j["p_tail"] = row.p_tail;
            j["mean_nll"] = row.mean_nll;
            j["rho_tail_low_speedup"] =
                std::isnan(row.rho_tail_low_speedup) ? json(nullptr)
                                                     : json(row.rho_tail_low_speedup);
            j["p_tail_low_speedup"] = std::isnan(row.p_tail_low_speedup)
                                          ? json(nullptr)
                                          : json(row.p_tail_low_speedup);
            j["tail_fraction"] = probe.tail_fraction;
            probe_out << j.dump() << '\n';
          }
          break;
        }
      }
    }
  } catch (const Error&) {
    records_out.flush();
    result.ledger.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    write_file(result.ledger_path, ledger_json(result.ledger).dump(2) + "\n");
    finalize_manifest("incomplete");
    throw;
  }

  result.ledger.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  write_file(result.ledger_path, ledger_json(result.ledger).dump(2) + "\n");
  finalize_manifest("complete");
  return result;
}

RunResult cmd_run_file(const std::string& config_path, const std::string& out_dir,
                       const std::string& endpoint_override) {
  return cmd_run(io::config_from_file(config_path), out_dir, endpoint_override);
}

SelectionReport cmd_select(const std::vector<SampleRecord>& records,
                           const std::vector<SelectionStrategy>& strategies, std::int64_t seed,
                           const select::SelectOptions& options) {
  if (records.empty()) fail(ErrorCode::analysis_invalid, "no records to select from");
  io::check_record_set(records);
  const auto& strategy_list = strategies.empty() ? all_strategies() : strategies;

  std::map<std::pair<std::int64_t, int>, std::vector<SampleRecord>> units;
  for (const auto& r : records) units[{r.seed, r.task_id}].push_back(r);

  SelectionReport report;
  struct Agg {
    double fast1_sum = 0.0;
    double speedup_sum = 0.0;
    std::int64_t extra = 0;
    std::size_t failed = 0;
    std::map<std::int64_t, std::pair<double, std::size_t>> per_seed;  // sum, n
  };
  std::map<SelectionStrategy, Agg> aggregates;

  for (const auto& [key, samples] : units) {
    const auto [unit_seed, task_id] = key;
    std::string regime = "insufficient";
    try {
      const auto label = select::detect_regime(samples);
      regime = label.label == select::Regime::high_variance ? "high_variance" : "low_variance";
    } catch (const Error&) {
    }
    for (const auto strategy : strategy_list) {
      const auto picked = select::select(strategy, samples, seed, options);
      SelectionRow row;
      row.task_id = task_id;
      row.seed = unit_seed;
      row.strategy = strategy;
      if (picked.chosen) row.chosen_sample_index = picked.chosen->sample_index;
      row.fast1 = picked.fast1;
      row.speedup = picked.speedup;
      row.extra_evals_used = picked.extra_evals_used;
      row.regime_label = regime;
      report.rows.push_back(row);

      auto& agg = aggregates[strategy];
      double unit_fast1 = picked.fast1 ? 1.0 : 0.0;
      double unit_speedup = picked.speedup;
      if (strategy == SelectionStrategy::random_correct) {
        // The table aggregate for the random baseline is the analytic
        // expectation over uniform correct draws, not one realized pick.
        unit_fast1 = select::random_correct_expectation(samples);
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& s : samples) {
          if (s.eval().correct) {
            sum += s.eval().speedup;
            ++n;
          }
        }
        unit_speedup = n == 0 ? 0.0 : sum / static_cast<double>(n);
      }
      agg.fast1_sum += unit_fast1;
      agg.speedup_sum += unit_speedup;
      agg.extra += picked.extra_evals_used;
      if (!picked.chosen) agg.failed += 1;
      auto& per_seed = agg.per_seed[unit_seed];
      per_seed.first += unit_fast1;
      per_seed.second += 1;
    }
  }

  const double n_units = static_cast<double>(units.size());
  for (const auto strategy : strategy_list) {
    const auto& agg = aggregates[strategy];
    StrategySummary summary;
    summary.strategy = strategy;
    summary.units = units.size();
    summary.failed_units = agg.failed;
    summary.fast1 = agg.fast1_sum / n_units;
    summary.mean_speedup = agg.speedup_sum / n_units;
    summary.extra_evals = agg.extra;
    if (agg.per_seed.size() > 1) {
      std::vector<double> per_seed_means;
      for (const auto& [s, acc] : agg.per_seed) {
        per_seed_means.push_back(acc.first / static_cast<double>(acc.second));
      }
      double mean = 0.0;
      for (double v : per_seed_means) mean += v;
      mean /= per_seed_means.size();
      double ss = 0.0;
      for (double v : per_seed_means) ss += (v - mean) * (v - mean);
      summary.fast1_std_over_seeds = std::sqrt(ss / (per_seed_means.size() - 1));
    }
    report.summary.push_back(summary);
  }

  CsvBuilder csv;
  csv.meta("tool_version", kToolVersion);
  csv.meta("rng_seed", std::to_string(seed));
  csv.meta("random_correct_aggregate", "analytic_expectation");
  csv.meta("top3_speedups", options.retime_top3 ? "retimed" : "recorded");
  csv.row({"task_id", "seed", "strategy", "chosen_sample_index", "fast1", "speedup",
           "extra_evals_used", "regime_label"});
  for (const auto& row : report.rows) {
    csv.row({std::to_string(row.task_id), std::to_string(row.seed),
             strategy_name(row.strategy),
             row.chosen_sample_index ? std::to_string(*row.chosen_sample_index) : "",
             row.fast1 ? "1" : "0", fmt(row.speedup), std::to_string(row.extra_evals_used),
             row.regime_label});
  }
  csv.row({});
  csv.row({"strategy", "aggregate_fast1", "std_over_seeds", "mean_speedup", "extra_evals",
           "units", "failed_units"});
  for (const auto& s : report.summary) {
    csv.row({strategy_name(s.strategy), fmt(s.fast1), fmt(s.fast1_std_over_seeds),
             fmt(s.mean_speedup), std::to_string(s.extra_evals), std::to_string(s.units),
             std::to_string(s.failed_units)});
  }
  report.csv = csv.str();
  return report;
}

SelectionReport cmd_select_file(const std::string& records_path,
                                const std::vector<SelectionStrategy>& strategies,
                                std::int64_t seed, const std::string& out_csv) {
  const auto records = io::read_records_file(records_path);
  auto report = cmd_select(records, strategies, seed);
  if (!out_csv.empty()) write_file(out_csv, report.csv);
  return report;
}

namespace {

std::vector<int> default_k_grid(const std::vector<SampleRecord>& records) {
  std::map<std::pair<std::int64_t, int>, int> counts;
  for (const auto& r : records) counts[{r.seed, r.task_id}] += 1;
  int min_n = 0;
  for (const auto& [key, n] : counts) min_n = min_n == 0 ? n : std::min(min_n, n);
  std::vector<int> ks;
  for (int k = 1; k <= min_n; k *= 2) ks.push_back(k);
  return ks;
}

scaling::CurveOptions curve_options(const AnalyzeOptions& options) {
  scaling::CurveOptions co;
  if (options.ci_method == "seed_range") {
    co.ci_method = scaling::CiMethod::seed_range;
  } else if (options.ci_method == "bootstrap") {
    co.ci_method = scaling::CiMethod::bootstrap;
  } else {
    co.ci_method = scaling::CiMethod::auto_select;
  }
  return co;
}

std::string scaling_csv(const scaling::ScalingCurve& curve, const AnalyzeOptions& options) {
  CsvBuilder csv;
  csv.meta("tool_version", kToolVersion);
  csv.meta("ci_method", curve.ci_method);
  csv.meta("saturation_epsilon", fmt(options.saturation_epsilon));
  csv.row({"K", "mean", "std", "ci_low", "ci_high"});
  for (const auto& p : curve.points) {
    csv.row({std::to_string(p.K), fmt(p.mean), fmt(p.std), fmt(p.ci_low), fmt(p.ci_high)});
  }
  return csv.str();
}

}  // namespace

std::string cmd_analyze(const std::string& input_path, const std::string& kind,
                        const std::string& out_dir, const AnalyzeOptions& options) {
  fs::create_directories(out_dir);
  const auto out_path = [&](const std::string& name) {
    return (fs::path(out_dir) / name).string();
  };

  if (kind == "scaling" || kind == "equivalent_k") {
    const auto records = io::read_records_file(input_path);
    if (records.empty()) fail(ErrorCode::analysis_invalid, "no records in " + input_path);
    const auto ks = options.ks.empty() ? default_k_grid(records) : options.ks;
    const auto curve = scaling::build_curve(records, ks, curve_options(options));
    if (kind == "scaling") {
      const auto path = out_path("scaling_curve.csv");
      write_file(path, scaling_csv(curve, options));
      return path;
    }
    if (options.target < 0.0) {
      fail(ErrorCode::analysis_invalid, "equivalent_k analysis requires a target in [0,1]");
    }
    const auto eq = scaling::equivalent_k(curve, options.target);
    CsvBuilder csv;
    csv.meta("tool_version", kToolVersion);
    csv.meta("ci_method", curve.ci_method);
    csv.row({"target", "result", "equivalent_k", "saturation_k"});
    const std::string kindname = eq.kind == scaling::EquivalentK::Kind::value ? "value"
                                 : eq.kind == scaling::EquivalentK::Kind::below_k1
                                     ? "below_k1"
                                     : "above_kmax";
    csv.row({fmt(options.target), kindname,
             eq.kind == scaling::EquivalentK::Kind::value ? fmt(eq.k) : "",
             std::to_string(scaling::saturation_k(curve, options.saturation_epsilon))});
    const auto path = out_path("equivalent_k.csv");
    write_file(path, csv.str());
    return path;
  }

  if (kind == "selection") {
    const auto report = cmd_select_file(input_path, {}, options.select_seed, "");
    const auto path = out_path("selection.csv");
    write_file(path, report.csv);
    return path;
  }

  if (kind == "regime") {
    const auto records = io::read_records_file(input_path);
    if (records.empty()) fail(ErrorCode::analysis_invalid, "no records in " + input_path);
    std::map<std::pair<std::int64_t, int>, std::vector<SampleRecord>> units;
    for (const auto& r : records) units[{r.seed, r.task_id}].push_back(r);
    CsvBuilder csv;
    csv.meta("tool_version", kToolVersion);
    csv.meta("threshold", fmt(options.regime_threshold));
    csv.row({"task_id", "seed", "n", "logprob_std", "regime_label"});
    for (const auto& [key, samples] : units) {
      try {
        const auto label = select::detect_regime(samples, options.regime_threshold);
        csv.row({std::to_string(key.second), std::to_string(key.first),
                 std::to_string(samples.size()), fmt(label.logprob_std),
                 label.label == select::Regime::high_variance ? "high_variance"
                                                              : "low_variance"});
      } catch (const Error&) {
        csv.row({std::to_string(key.second), std::to_string(key.first),
                 std::to_string(samples.size()), "", "insufficient"});
      }
    }
    const auto path = out_path("regime.csv");
    write_file(path, csv.str());
    return path;
  }

  if (kind == "quartile") {
    const auto records = io::read_records_file(input_path);
    const auto buckets = select::quartile_breakdown(records);
    CsvBuilder csv;
    csv.meta("tool_version", kToolVersion);
    csv.meta("ordering", "ascending_total_logprob_q1_highest_surprisal");
    csv.row({"quartile", "n", "fast1_rate", "mean_speedup", "median_token_count"});
    for (const auto& b : buckets) {
      csv.row({std::to_string(b.quartile), std::to_string(b.count), fmt(b.fast1_rate),
               fmt(b.mean_speedup), fmt(b.median_token_count)});
    }
    const auto path = out_path("quartile.csv");
    write_file(path, csv.str());
    return path;
  }

  if (kind == "trajectory" || kind == "probe" || kind == "ledger") {
    std::ifstream in(input_path);
    if (!in) fail(ErrorCode::io_failure, "cannot open " + input_path);
    std::vector<json> rows;
    if (kind == "ledger") {
      // ledger.json is a single document.
      try {
        json doc;
        in >> doc;
        rows.push_back(std::move(doc));
      } catch (const json::exception& e) {
        fail(ErrorCode::analysis_invalid, std::string("bad ledger: ") + e.what());
      }
    } else {
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
          rows.push_back(json::parse(line));
        } catch (const json::exception& e) {
          fail(ErrorCode::analysis_invalid, std::string("bad input row: ") + e.what());
        }
      }
    }
    if (rows.empty()) fail(ErrorCode::analysis_invalid, "empty input: " + input_path);

    if (kind == "trajectory") {
      // One CSV per seed: step, cumulative_rollouts, aggregate_fast1, then
      // one column per task (numeric order).
      std::set<int> tasks;
      std::set<std::int64_t> seeds;
      for (const auto& row : rows) {
        seeds.insert(row.at("seed").get<std::int64_t>());
        for (const auto& [k, v] : row.at("per_task_fast1").items()) tasks.insert(std::stoi(k));
      }
      std::string last_path;
      for (const auto seed : seeds) {
        CsvBuilder csv;
        csv.meta("tool_version", kToolVersion);
        csv.meta("seed", std::to_string(seed));
        std::vector<std::string> header = {"step", "cumulative_rollouts", "aggregate_fast1"};
        for (const auto t : tasks) header.push_back("task_" + std::to_string(t));
        csv.row(header);
        for (const auto& row : rows) {
          if (row.at("seed").get<std::int64_t>() != seed) continue;
          std::vector<std::string> cells = {std::to_string(row.at("step").get<int>()),
                                            std::to_string(
                                                row.at("cumulative_rollouts").get<std::int64_t>()),
                                            fmt(row.at("aggregate_fast1").get<double>())};
          for (const auto t : tasks) {
            const auto& per_task = row.at("per_task_fast1");
            const auto key = std::to_string(t);
            cells.push_back(per_task.contains(key) ? fmt(per_task.at(key).get<double>()) : "");
          }
          csv.row(cells);
        }
        last_path = out_path("trajectory_seed" + std::to_string(seed) + ".csv");
        write_file(last_path, csv.str());
      }
      return last_path;
    }

    if (kind == "probe") {
      CsvBuilder csv;
      csv.meta("tool_version", kToolVersion);
      csv.meta("rho_p_sidedness", "two_sided");
      csv.meta("tail_definition", "highest_nll_fraction_per_checkpoint");
      csv.row({"seed", "step", "rho_all", "p_all", "rho_tail", "p_tail", "mean_nll",
               "rho_tail_low_speedup", "p_tail_low_speedup"});
      for (const auto& row : rows) {
        const auto opt = [&](const char* key) {
          return row.contains(key) && !row.at(key).is_null() ? fmt(row.at(key).get<double>())
                                                             : std::string("");
        };
        csv.row({std::to_string(row.at("seed").get<std::int64_t>()),
                 std::to_string(row.at("step").get<int>()), fmt(row.at("rho_all").get<double>()),
                 fmt(row.at("p_all").get<double>()), fmt(row.at("rho_tail").get<double>()),
                 fmt(row.at("p_tail").get<double>()), fmt(row.at("mean_nll").get<double>()),
                 opt("rho_tail_low_speedup"), opt("p_tail_low_speedup")});
      }
      const auto path = out_path("probe.csv");
      write_file(path, csv.str());
      return path;
    }

    // ledger
    CsvBuilder csv;
    csv.meta("tool_version", kToolVersion);
    csv.row({"rollouts", "student_tokens", "teacher_tokens", "total_tokens",
             "extra_timing_evals", "wall_clock_seconds"});
    for (const auto& row : rows) {
      csv.row({std::to_string(row.at("rollouts").get<std::int64_t>()),
               std::to_string(row.at("student_tokens").get<std::int64_t>()),
               std::to_string(row.at("teacher_tokens").get<std::int64_t>()),
               std::to_string(row.at("total_tokens").get<std::int64_t>()),
               std::to_string(row.at("extra_timing_evals").get<std::int64_t>()),
               fmt(row.at("wall_clock_seconds").get<double>())});
    }
    const auto path = out_path("ledger.csv");
    write_file(path, csv.str());
    return path;
  }

  fail(ErrorCode::analysis_invalid, "unknown analysis kind: " + kind);
}

std::string cmd_report(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) fail(ErrorCode::io_failure, "cannot open manifest: " + manifest_path);
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    fail(ErrorCode::io_failure, std::string("manifest parse error: ") + e.what());
  }
  std::ostringstream out;
  out << "campaign " << manifest.value("campaign_id", "?") << " ("
      << manifest.value("status", "?") << ")\n";
  out << "  tool version: " << manifest.value("tool_version", "?") << "\n";
  out << "  created:      " << manifest.value("created", "?") << "\n";
  if (manifest.contains("config")) {
    const auto& cfg = manifest["config"];
    out << "  mode:         " << cfg.value("mode", "?") << "\n";
    out << "  tasks:        " << cfg.value("tasks", json::array()).size() << "\n";
    out << "  K:            " << cfg.value("K", 0) << "\n";
    out << "  steps:        " << cfg.value("steps", 0) << "\n";
    out << "  budget/seed:  " << cfg.value("rollout_budget", 0) << "\n";
  }
  out << "  records:      " << manifest.value("record_count", 0) << "\n";
  if (manifest.contains("selected") && !manifest["selected"].empty()) {
    out << "  selected checkpoints:\n";
    for (const auto& [seed, pick] : manifest["selected"].items()) {
      out << "    seed " << seed << ": step " << pick.value("step", 0) << " ("
          << pick.value("checkpoint_id", "?") << ")\n";
    }
  }
  if (manifest.contains("artifacts")) {
    const auto& ledger_path = manifest["artifacts"].value("ledger", "");
    std::ifstream ledger_in(ledger_path);
    if (ledger_in) {
      json ledger;
      try {
        ledger_in >> ledger;
        out << "  ledger: rollouts=" << ledger.value("rollouts", 0)
            << " student_tokens=" << ledger.value("student_tokens", 0)
            << " teacher_tokens=" << ledger.value("teacher_tokens", 0)
            << " total_tokens=" << ledger.value("total_tokens", 0) << "\n";
      } catch (const json::exception&) {
      }
    }
  }
  return out.str();
}

}  // namespace ttc::campaign
