// SPDX-License-Identifier: Apache-2.0

#include "scaling/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "core/rng.hpp"
#include "eval/evaluator.hpp"

namespace ttc::scaling {

double fast1_rate(const std::vector<SampleRecord>& samples) {
  if (samples.empty()) fail(ErrorCode::invalid_argument, "fast1_rate: empty input");
  std::size_t fast = 0;
  for (const auto& s : samples) {
    if (eval::is_fast1(s.eval())) ++fast;
  }
  return static_cast<double>(fast) / static_cast<double>(samples.size());
}

double success_at_k(int n, int c, int k) {
  if (n < 1 || c < 0 || c > n || k < 1 || k > n) {
    fail(ErrorCode::invalid_argument, "success_at_k: need 0 <= c <= n and 1 <= k <= n");
  }
  if (c == 0) return 0.0;
  if (k > n - c) return 1.0;  // cannot avoid every fast sample
  // P(no fast in k draws) = prod_{j=0..k-1} (n - c - j) / (n - j)
  double miss = 1.0;
  for (int j = 0; j < k; ++j) {
    miss *= static_cast<double>(n - c - j) / static_cast<double>(n - j);
  }
  return 1.0 - miss;
}

ScalingCurve build_curve(const std::vector<SampleRecord>& records, const std::vector<int>& Ks,
                         const CurveOptions& options) {
  if (records.empty()) fail(ErrorCode::invalid_argument, "build_curve: no records");
  if (Ks.empty()) fail(ErrorCode::invalid_argument, "build_curve: empty K grid");
  for (size_t i = 1; i < Ks.size(); ++i) {
    if (Ks[i] <= Ks[i - 1]) fail(ErrorCode::invalid_argument, "build_curve: K grid must increase");
  }
  if (Ks.front() < 1) fail(ErrorCode::invalid_argument, "build_curve: K must be >= 1");

  struct Cell {
    int n = 0;
    int c = 0;
  };
  std::map<std::pair<std::int64_t, int>, Cell> cells;  // (seed, task) -> counts
  std::set<std::int64_t> seeds;
  std::set<int> tasks;
  for (const auto& r : records) {
    auto& cell = cells[{r.seed, r.task_id}];
    cell.n += 1;
    if (eval::is_fast1(r.eval())) cell.c += 1;
    seeds.insert(r.seed);
    tasks.insert(r.task_id);
  }
  const int max_k = Ks.back();
  for (const auto& [key, cell] : cells) {
    if (cell.n < max_k) {
      fail(ErrorCode::invalid_argument,
           "build_curve: (task " + std::to_string(key.second) + ", seed " +
               std::to_string(key.first) + ") holds " + std::to_string(cell.n) +
               " samples, fewer than max K " + std::to_string(max_k));
    }
  }

  const bool bootstrap = options.ci_method == CiMethod::bootstrap ||
                         (options.ci_method == CiMethod::auto_select && seeds.size() >= 3);

  ScalingCurve curve;
  curve.ci_method = bootstrap ? "bootstrap" : "seed_range";
  for (int k : Ks) {
    // Per-seed task means, reduced in sorted key order for determinism.
    std::vector<double> per_seed;
    std::vector<std::vector<double>> per_seed_task_values;
    for (std::int64_t seed : seeds) {
      std::vector<double> task_values;
      for (int task : tasks) {
        auto it = cells.find({seed, task});
        if (it == cells.end()) {
          fail(ErrorCode::invalid_argument,
               "build_curve: missing cell for task " + std::to_string(task) + ", seed " +
                   std::to_string(seed));
        }
        task_values.push_back(success_at_k(it->second.n, it->second.c, k));
      }
      double mean = 0.0;
      for (double v : task_values) mean += v;
      per_seed.push_back(mean / static_cast<double>(task_values.size()));
      per_seed_task_values.push_back(std::move(task_values));
    }

    CurvePoint p;
    p.K = k;
    for (double v : per_seed) p.mean += v;
    p.mean /= static_cast<double>(per_seed.size());
    if (per_seed.size() > 1) {
      double ss = 0.0;
      for (double v : per_seed) ss += (v - p.mean) * (v - p.mean);
      p.std = std::sqrt(ss / static_cast<double>(per_seed.size() - 1));
    }

    if (!bootstrap) {
      p.ci_low = *std::min_element(per_seed.begin(), per_seed.end());
      p.ci_high = *std::max_element(per_seed.begin(), per_seed.end());
    } else {
      // Resample tasks with replacement (shared across seeds), re-reduce.
      const size_t n_tasks = tasks.size();
      std::vector<double> estimates;
      estimates.reserve(options.bootstrap_resamples);
      for (int rep = 0; rep < options.bootstrap_resamples; ++rep) {
        double total = 0.0;
        for (size_t s = 0; s < per_seed_task_values.size(); ++s) {
          double seed_mean = 0.0;
          for (size_t t = 0; t < n_tasks; ++t) {
            const auto pick = rng::bounded(
                rng::mix(options.bootstrap_seed, static_cast<std::uint64_t>(k),
                         static_cast<std::uint64_t>(rep), static_cast<std::uint64_t>(t)),
                n_tasks);
            seed_mean += per_seed_task_values[s][pick];
          }
          total += seed_mean / static_cast<double>(n_tasks);
        }
        estimates.push_back(total / static_cast<double>(per_seed_task_values.size()));
      }
      std::sort(estimates.begin(), estimates.end());
      const auto quantile = [&](double q) {
        const double pos = q * (estimates.size() - 1);
        const size_t lo = static_cast<size_t>(pos);
        const size_t hi = std::min(lo + 1, estimates.size() - 1);
        const double frac = pos - static_cast<double>(lo);
        return estimates[lo] * (1.0 - frac) + estimates[hi] * frac;
      };
      p.ci_low = quantile(0.025);
      p.ci_high = quantile(0.975);
    }
    curve.points.push_back(p);
  }
  return curve;
}

EquivalentK equivalent_k(const ScalingCurve& curve, double target) {
  if (curve.points.empty()) fail(ErrorCode::invalid_argument, "equivalent_k: empty curve");
  const auto& pts = curve.points;
  if (target < pts.front().mean) return {EquivalentK::Kind::below_k1, 0.0};
  if (target > pts.back().mean) return {EquivalentK::Kind::above_kmax, 0.0};
  for (size_t i = 0; i < pts.size(); ++i) {
    if (target == pts[i].mean) return {EquivalentK::Kind::value, static_cast<double>(pts[i].K)};
    if (i + 1 < pts.size() && target < pts[i + 1].mean) {
      const double x0 = std::log2(static_cast<double>(pts[i].K));
      const double x1 = std::log2(static_cast<double>(pts[i + 1].K));
      const double frac = (target - pts[i].mean) / (pts[i + 1].mean - pts[i].mean);
      return {EquivalentK::Kind::value, std::exp2(x0 + frac * (x1 - x0))};
    }
  }
  return {EquivalentK::Kind::value, static_cast<double>(pts.back().K)};
}

int saturation_k(const ScalingCurve& curve, double epsilon) {
  if (curve.points.size() < 2) {
    fail(ErrorCode::invalid_argument, "saturation_k: need at least 2 points");
  }
  const auto& pts = curve.points;
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    if (pts[i + 1].mean - pts[i].mean < epsilon) return pts[i].K;
  }
  return pts.back().K;
}

}  // namespace ttc::scaling
