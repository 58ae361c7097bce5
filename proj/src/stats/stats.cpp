// SPDX-License-Identifier: Apache-2.0

#include "stats/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "core/error.hpp"

namespace ttc::stats {

std::vector<double> average_ranks(const std::vector<double>& values) {
  const size_t n = values.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;  // mean of 1-based ranks
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) {
    fail(ErrorCode::invalid_argument, "degenerate constant input in correlation");
  }
  return sxy / std::sqrt(sxx * syy);
}

// Modified Lentz continued-fraction evaluation for the incomplete beta.
static double incbeta_cf(double x, double a, double b) {
  const double tiny = 1e-300;
  double c = 1.0;
  double d = 1.0 - (a + b) * x / (a + 1.0);
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double result = d;
  for (int m = 1; m <= 300; ++m) {
    const double m2 = 2.0 * m;
    double num = m * (b - m) * x / ((a + m2 - 1.0) * (a + m2));
    d = 1.0 + num * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + num / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    result *= d * c;
    num = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0));
    d = 1.0 + num * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + num / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double mult = d * c;
    result *= mult;
    if (std::fabs(mult - 1.0) < 1e-14) break;
  }
  return result;
}

double regularized_incomplete_beta(double x, double a, double b) {
  if (!(x >= 0.0 && x <= 1.0 && a > 0.0 && b > 0.0)) return NAN;
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return std::exp(ln_front) * incbeta_cf(x, a, b) / a;
  }
  return 1.0 - std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                        b * std::log1p(-x) + a * std::log(x)) *
                   incbeta_cf(1.0 - x, b, a) / b;
}

double student_t_sf(double t, double dof) {
  if (dof <= 0.0) return NAN;
  const double x = dof / (t * t + dof);
  const double half_tail = 0.5 * regularized_incomplete_beta(x, 0.5 * dof, 0.5);
  return t >= 0.0 ? half_tail : 1.0 - half_tail;
}

static double t_approx_p(double rho, size_t n, size_t controls) {
  const double dof = static_cast<double>(n) - 2.0 - static_cast<double>(controls);
  const double denom = std::max(1e-300, 1.0 - rho * rho);
  const double t = rho * std::sqrt(dof / denom);
  return std::min(1.0, 2.0 * student_t_sf(std::fabs(t), dof));
}

// Exact two-sided permutation p for small n: enumerate all distinct
// orderings of the y ranks (uniform over index permutations).
static double exact_permutation_p(const std::vector<double>& rx, std::vector<double> ry,
                                  double rho_obs) {
  std::sort(ry.begin(), ry.end());
  std::int64_t total = 0;
  std::int64_t at_least = 0;
  const double threshold = std::fabs(rho_obs) - 1e-12;
  do {
    const double rho = pearson(rx, ry);
    ++total;
    if (std::fabs(rho) >= threshold) ++at_least;
  } while (std::next_permutation(ry.begin(), ry.end()));
  return static_cast<double>(at_least) / static_cast<double>(total);
}

Correlation spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) fail(ErrorCode::invalid_argument, "spearman: length mismatch");
  if (x.size() < 3) fail(ErrorCode::invalid_argument, "spearman: need at least 3 points");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  Correlation c;
  c.rho = pearson(rx, ry);
  c.p_two_sided =
      x.size() <= 10 ? exact_permutation_p(rx, ry, c.rho) : t_approx_p(c.rho, x.size(), 0);
  return c;
}

Correlation partial_spearman(const std::vector<double>& x, const std::vector<double>& y,
                             const std::vector<double>& z) {
  if (x.size() != y.size() || x.size() != z.size()) {
    fail(ErrorCode::invalid_argument, "partial_spearman: length mismatch");
  }
  if (x.size() < 4) fail(ErrorCode::invalid_argument, "partial_spearman: need at least 4 points");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const auto rz = average_ranks(z);
  const double rxy = pearson(rx, ry);
  const double rxz = pearson(rx, rz);
  const double ryz = pearson(ry, rz);
  const double guard = 1.0 - 1e-12;
  if (std::fabs(rxz) >= guard || std::fabs(ryz) >= guard) {
    fail(ErrorCode::invalid_argument, "partial_spearman: degenerate control variable");
  }
  Correlation c;
  c.rho = (rxy - rxz * ryz) / std::sqrt((1.0 - rxz * rxz) * (1.0 - ryz * ryz));
  c.p_two_sided = t_approx_p(c.rho, x.size(), 1);
  return c;
}

double cohens_h(double p1, double p2) {
  p1 = std::clamp(p1, 0.0, 1.0);
  p2 = std::clamp(p2, 0.0, 1.0);
  return 2.0 * std::asin(std::sqrt(p1)) - 2.0 * std::asin(std::sqrt(p2));
}

double exact_sign_test(int wins, int discordant) {
  if (wins < 0 || discordant < 0 || wins > discordant) {
    fail(ErrorCode::invalid_argument, "exact_sign_test: need 0 <= wins <= discordant");
  }
  if (discordant == 0) return 1.0;
  // P(X >= wins), X ~ Binomial(n, 1/2); long double Pascal row keeps n <= ~60 exact.
  long double tail = 0.0L;
  long double coeff = 1.0L;  // C(n, 0)
  for (int i = 0; i <= discordant; ++i) {
    if (i >= wins) tail += coeff;
    coeff = coeff * (discordant - i) / (i + 1);
  }
  return static_cast<double>(tail / std::pow(2.0L, static_cast<long double>(discordant)));
}

WilcoxonResult wilcoxon_signed_rank(const std::vector<std::pair<double, double>>& pairs,
                                    PairTransform transform) {
  std::vector<double> diffs;
  diffs.reserve(pairs.size());
  for (const auto& [a, b] : pairs) {
    double d;
    if (transform == PairTransform::log_ratio) {
      if (!(a > 0.0) || !(b > 0.0)) {
        fail(ErrorCode::invalid_argument, "wilcoxon log_ratio requires positive pairs");
      }
      d = std::log(a / b);
    } else {
      d = a - b;
    }
    if (d != 0.0) diffs.push_back(d);
  }
  const int n = static_cast<int>(diffs.size());
  if (n < 5) {
    fail(ErrorCode::invalid_argument, "wilcoxon: need at least 5 non-zero differences");
  }

  std::vector<double> magnitudes(n);
  for (int i = 0; i < n; ++i) magnitudes[i] = std::fabs(diffs[i]);
  const auto ranks = average_ranks(magnitudes);

  double w_pos = 0.0, w_neg = 0.0;
  for (int i = 0; i < n; ++i) {
    if (diffs[i] > 0.0) {
      w_pos += ranks[i];
    } else {
      w_neg += ranks[i];
    }
  }

  WilcoxonResult res;
  res.statistic = std::min(w_pos, w_neg);
  res.n_used = n;

  if (n <= 20) {
    // Subset-sum distribution over doubled ranks (integers even with
    // average-rank ties). count[s] = #sign assignments with doubled
    // negative-rank sum s.
    std::vector<std::int64_t> twice(n);
    std::int64_t sum2 = 0;
    for (int i = 0; i < n; ++i) {
      twice[i] = std::llround(2.0 * ranks[i]);
      sum2 += twice[i];
    }
    std::vector<double> count(sum2 + 1, 0.0);
    count[0] = 1.0;
    for (int i = 0; i < n; ++i) {
      for (std::int64_t s = sum2; s >= twice[i]; --s) count[s] += count[s - twice[i]];
    }
    const double denom = std::pow(2.0, n);
    auto cdf_leq = [&](double w) {
      const std::int64_t limit = std::llround(2.0 * w) + 0;  // exact half-integer grid
      double acc = 0.0;
      for (std::int64_t s = 0; s <= std::min(limit, sum2); ++s) acc += count[s];
      return acc / denom;
    };
    res.p_one_sided = cdf_leq(w_neg);
    // Two-sided: P(min(W+, W-) <= observed min) by symmetry of the sign-flip null.
    const double w_min = res.statistic;
    double mass = 0.0;
    const std::int64_t lo = std::llround(2.0 * w_min);
    const std::int64_t hi = sum2 - lo;
    for (std::int64_t s = 0; s <= sum2; ++s) {
      if (s <= lo || s >= hi) mass += count[s];
    }
    res.p_two_sided = std::min(1.0, mass / denom);
    res.exact = true;
  } else {
    // Normal approximation with tie correction and continuity correction.
    const double mean = n * (n + 1) / 4.0;
    double tie_term = 0.0;
    {
      std::vector<double> sorted = magnitudes;
      std::sort(sorted.begin(), sorted.end());
      size_t i = 0;
      while (i < sorted.size()) {
        size_t j = i;
        while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i + 1);
        tie_term += t * t * t - t;
        i = j + 1;
      }
    }
    const double var = n * (n + 1) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    const double sd = std::sqrt(std::max(var, 1e-12));
    const double z_one = (w_neg - mean + 0.5) / sd;
    res.p_one_sided = 0.5 * std::erfc(-z_one / std::sqrt(2.0));
    const double z_two = (res.statistic - mean + 0.5) / sd;
    res.p_two_sided = std::min(1.0, 2.0 * (0.5 * std::erfc(-z_two / std::sqrt(2.0))));
    res.exact = false;
  }
  return res;
}

}  // namespace ttc::stats
