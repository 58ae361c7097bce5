// SPDX-License-Identifier: Apache-2.0
//
// Best-of-N scaling curves, success-at-K estimation, saturation detection,
// and equivalent-K interpolation.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "core/types.hpp"

namespace ttc::scaling {

struct CurvePoint {
  int K = 1;
  double mean = 0.0;
  double std = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

struct ScalingCurve {
  std::vector<CurvePoint> points;  // K strictly increasing, means non-decreasing
  std::string ci_method;           // "seed_range" or "bootstrap"
};

// Fraction of samples that are fast_1. Throws on empty input.
double fast1_rate(const std::vector<SampleRecord>& samples);

// Probability that at least one of k samples drawn uniformly without
// replacement is fast_1, given c fast among n: 1 - C(n-c, k) / C(n, k).
double success_at_k(int n, int c, int k);

enum class CiMethod { auto_select, seed_range, bootstrap };

struct CurveOptions {
  CiMethod ci_method = CiMethod::auto_select;  // range for < 3 seeds, else bootstrap
  int bootstrap_resamples = 1000;
  std::uint64_t bootstrap_seed = 1;
};

// Per K: mean over tasks of success_at_k, then mean/std over seeds.
// Requires every (task, seed) cell to hold at least max(Ks) samples.
ScalingCurve build_curve(const std::vector<SampleRecord>& records, const std::vector<int>& Ks,
                         const CurveOptions& options = {});

struct EquivalentK {
  enum class Kind { value, below_k1, above_kmax } kind = Kind::value;
  double k = 0.0;  // meaningful only when kind == value
};

// Piecewise-linear interpolation in (log2 K, mean). Targets below the K=1
// mean report below_k1; targets above the top of the curve report above_kmax.
EquivalentK equivalent_k(const ScalingCurve& curve, double target);

// Smallest K whose marginal gain to the next grid point falls below epsilon
// (the last K when none qualifies).
int saturation_k(const ScalingCurve& curve, double epsilon);

}  // namespace ttc::scaling
