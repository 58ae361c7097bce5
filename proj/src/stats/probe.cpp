// SPDX-License-Identifier: Apache-2.0

#include "stats/probe.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "core/error.hpp"

namespace ttc::stats {

namespace {

// Indices of the m largest keys, ties broken by lower sample index.
std::vector<size_t> top_indices(const std::vector<double>& keys, size_t m) {
  std::vector<size_t> idx(keys.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](size_t a, size_t b) { return keys[a] > keys[b]; });
  idx.resize(std::min(m, idx.size()));
  return idx;
}

}  // namespace

ProbeResult anticalibration_probe(const std::vector<SampleRecord>& fixed_samples,
                                  const std::vector<CheckpointRef>& checkpoints,
                                  const NllScorer& score_nll, double tail_fraction) {
  const size_t n = fixed_samples.size();
  if (n < 4) fail(ErrorCode::invalid_argument, "probe: need at least 4 samples");
  if (checkpoints.empty()) fail(ErrorCode::invalid_argument, "probe: no checkpoints");
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) {
    fail(ErrorCode::invalid_argument, "probe: tail_fraction must be in (0, 1]");
  }
  std::vector<double> speedups(n);
  for (size_t i = 0; i < n; ++i) speedups[i] = fixed_samples[i].eval().speedup;

  const size_t tail_n =
      std::max<size_t>(3, static_cast<size_t>(std::llround(tail_fraction * n)));

  ProbeResult result;
  result.tail_fraction = tail_fraction;
  for (size_t c = 0; c < checkpoints.size(); ++c) {
    std::vector<double> nll(n);
    double mean = 0.0;
    for (size_t i = 0; i < n; ++i) {
      nll[i] = score_nll(checkpoints[c], fixed_samples[i]);  // failures abort
      mean += nll[i];
    }
    mean /= static_cast<double>(n);

    ProbeRow row;
    row.step = static_cast<int>(c);
    row.mean_nll = mean;
    const Correlation all = spearman(nll, speedups);
    row.rho_all = all.rho;
    row.p_all = all.p_two_sided;

    {
      const auto tail = top_indices(nll, tail_n);
      std::vector<double> tn(tail.size()), ts(tail.size());
      for (size_t i = 0; i < tail.size(); ++i) {
        tn[i] = nll[tail[i]];
        ts[i] = speedups[tail[i]];
      }
      const Correlation t = spearman(tn, ts);
      row.rho_tail = t.rho;
      row.p_tail = t.p_two_sided;
    }
    {
      std::vector<double> neg(n);
      for (size_t i = 0; i < n; ++i) neg[i] = -speedups[i];
      const auto tail = top_indices(neg, tail_n);
      std::vector<double> tn(tail.size()), ts(tail.size());
      for (size_t i = 0; i < tail.size(); ++i) {
        tn[i] = nll[tail[i]];
        ts[i] = speedups[tail[i]];
      }
      try {
        const Correlation t = spearman(tn, ts);
        row.rho_tail_low_speedup = t.rho;
        row.p_tail_low_speedup = t.p_two_sided;
      } catch (const Error&) {
        // The low-speedup tail is often all-zero speedups; report NaN rather
        // than aborting the primary probe.
        row.rho_tail_low_speedup = NAN;
        row.p_tail_low_speedup = NAN;
      }
    }
    result.per_step.push_back(row);
  }
  return result;
}

LengthControlReport length_control_report(const std::vector<SampleRecord>& samples) {
  std::vector<double> logprob, speedup, length;
  for (const auto& s : samples) {
    if (!s.outcome || !s.outcome->correct) continue;
    logprob.push_back(s.total_logprob);
    speedup.push_back(s.outcome->speedup);
    length.push_back(static_cast<double>(s.token_count));
  }
  LengthControlReport report;
  report.n_correct = logprob.size();
  if (logprob.size() < 4) {
    fail(ErrorCode::invalid_argument, "length_control_report: need >= 4 correct samples");
  }
  report.logprob_speedup = spearman(logprob, speedup);

  const bool constant_length =
      std::all_of(length.begin(), length.end(), [&](double v) { return v == length.front(); });
  if (constant_length) {
    report.degenerate_length = true;
    report.logprob_speedup_given_length = report.logprob_speedup;
    report.length_speedup = Correlation{NAN, NAN};
  } else {
    report.logprob_speedup_given_length = partial_spearman(logprob, speedup, length);
    report.length_speedup = spearman(length, speedup);
  }
  return report;
}

PairedComparison build_paired_comparison(
    const std::vector<std::tuple<std::string, double, double>>& pairs) {
  PairedComparison cmp;
  cmp.pairs = pairs;
  for (const auto& [id, a, b] : pairs) {
    if (a == b) continue;
    ++cmp.discordant;
    if (a > b) ++cmp.wins_a;
  }
  return cmp;
}

}  // namespace ttc::stats
