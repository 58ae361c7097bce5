// SPDX-License-Identifier: Apache-2.0
//
// Anti-calibration probe: hold a fixed evaluated sample set constant and
// score its NLL under every checkpoint of an adaptation trajectory, tracking
// how rank correlation with speedup shifts.
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "core/types.hpp"
#include "stats/stats.hpp"

namespace ttc::stats {

struct ProbeRow {
  int step = 0;
  double rho_all = 0.0;
  double p_all = 1.0;
  double rho_tail = 0.0;   // over the tail_fraction highest-NLL samples
  double p_tail = 1.0;
  double mean_nll = 0.0;
  // Alternative tail reading (lowest-speedup fraction); exported alongside.
  double rho_tail_low_speedup = 0.0;
  double p_tail_low_speedup = 1.0;
};

struct ProbeResult {
  std::vector<ProbeRow> per_step;
  double tail_fraction = 0.25;
};

using NllScorer = std::function<double(const CheckpointRef&, const SampleRecord&)>;

// Scoring failures propagate and abort the probe: a partial NLL matrix is
// not a valid probe result.
ProbeResult anticalibration_probe(const std::vector<SampleRecord>& fixed_samples,
                                  const std::vector<CheckpointRef>& checkpoints,
                                  const NllScorer& score_nll, double tail_fraction = 0.25);

struct LengthControlReport {
  Correlation logprob_speedup;
  Correlation logprob_speedup_given_length;
  Correlation length_speedup;
  bool degenerate_length = false;  // constant lengths: control carries no info
  std::size_t n_correct = 0;
};

// The logprob/speedup/length triple over correct samples only.
LengthControlReport length_control_report(const std::vector<SampleRecord>& samples);

struct PairedComparison {
  std::vector<std::tuple<std::string, double, double>> pairs;  // (unit id, a, b)
  int wins_a = 0;
  int discordant = 0;
};

PairedComparison build_paired_comparison(
    const std::vector<std::tuple<std::string, double, double>>& pairs);

}  // namespace ttc::stats
