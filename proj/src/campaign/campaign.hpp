// SPDX-License-Identifier: Apache-2.0
//
// Campaign execution, artifact persistence, and figure-data exports. One
// campaign process owns its artifact directory exclusively; all file appends
// funnel through a single writer per file.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "adapt/adaptation.hpp"
#include "core/types.hpp"
#include "select/selection.hpp"
#include "stats/probe.hpp"

namespace ttc::campaign {

inline constexpr const char* kToolVersion = "0.1.0";

struct RunResult {
  std::string manifest_path;
  std::string records_path;
  std::string ledger_path;
  std::optional<std::string> trajectory_path;
  std::optional<std::string> probe_path;
  std::int64_t record_count = 0;
  adapt::BudgetLedger ledger;
  // Per seed: BoA-selected step and checkpoint (adaptation modes only).
  std::map<std::int64_t, std::pair<int, std::string>> selected;
};

// Executes the configured mode end to end. Re-running with the same config
// and seeds on synthetic backends reproduces byte-identical record files.
// On backend failure, completed artifacts are kept and the manifest is
// marked incomplete before the error propagates.
RunResult cmd_run(const CampaignConfig& config, const std::string& out_dir,
                  const std::string& endpoint_override = "");
RunResult cmd_run_file(const std::string& config_path, const std::string& out_dir,
                       const std::string& endpoint_override = "");

struct SelectionRow {
  int task_id = 0;
  std::int64_t seed = 0;
  SelectionStrategy strategy = SelectionStrategy::oracle_best_correct;
  std::optional<int> chosen_sample_index;
  bool fast1 = false;
  double speedup = 0.0;
  int extra_evals_used = 0;
  std::string regime_label;
};

struct StrategySummary {
  SelectionStrategy strategy = SelectionStrategy::oracle_best_correct;
  double fast1 = 0.0;  // random_correct reports the analytic expectation
  double fast1_std_over_seeds = 0.0;
  double mean_speedup = 0.0;
  std::int64_t extra_evals = 0;
  std::size_t units = 0;
  std::size_t failed_units = 0;  // units with zero correct samples
};

struct SelectionReport {
  std::vector<SelectionRow> rows;
  std::vector<StrategySummary> summary;
  std::string csv;
};

// One row per (task, seed, strategy) plus a Table-3-shaped aggregate.
SelectionReport cmd_select(const std::vector<SampleRecord>& records,
                           const std::vector<SelectionStrategy>& strategies, std::int64_t seed,
                           const select::SelectOptions& options = {});
SelectionReport cmd_select_file(const std::string& records_path,
                                const std::vector<SelectionStrategy>& strategies,
                                std::int64_t seed, const std::string& out_csv = "");

struct AnalyzeOptions {
  std::vector<int> ks;  // empty = default grid {1,2,4,8,16,32,64} capped to data
  double target = -1.0;          // equivalent_k target (required for that kind)
  std::string ci_method = "auto";  // auto | seed_range | bootstrap
  double saturation_epsilon = 0.005;
  double regime_threshold = 1.0;
  std::int64_t select_seed = 0;
};

// kinds: scaling, equivalent_k, selection, trajectory, regime, quartile,
// probe, ledger. Returns the output CSV path.
std::string cmd_analyze(const std::string& input_path, const std::string& kind,
                        const std::string& out_dir, const AnalyzeOptions& options = {});

// Human-readable campaign summary from a manifest.
std::string cmd_report(const std::string& manifest_path);

}  // namespace ttc::campaign
