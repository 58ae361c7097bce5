// SPDX-License-Identifier: Apache-2.0
//
// Nonparametric statistics: rank correlations, exact small-n tests, effect
// sizes. Pure functions over immutable inputs. Every p-value is labeled one-
// or two-sided at the call site and in exports.
#pragma once

#include <cstdint>
#include <vector>

namespace ttc::stats {

// Average ranks (1-based) with ties sharing the mean rank.
std::vector<double> average_ranks(const std::vector<double>& values);

struct Correlation {
  double rho = 0.0;
  double p_two_sided = 1.0;
};

// Spearman rank correlation. p is exact (full permutation enumeration) for
// n <= 10 and a Student-t approximation above. Throws on length mismatch,
// n < 3, or constant input.
Correlation spearman(const std::vector<double>& x, const std::vector<double>& y);

// First-order partial rank correlation of x and y controlling for z:
//   r_xy.z = (r_xy - r_xz r_yz) / sqrt((1 - r_xz^2)(1 - r_yz^2))
// Throws when the control is degenerate (|r_xz| or |r_yz| ~ 1) or n < 4.
Correlation partial_spearman(const std::vector<double>& x, const std::vector<double>& y,
                             const std::vector<double>& z);

// Cohen's h effect size for two proportions: 2 asin(sqrt(p1)) - 2 asin(sqrt(p2)).
double cohens_h(double p1, double p2);

// One-sided exact sign test: P(X >= wins) for X ~ Binomial(discordant, 1/2).
double exact_sign_test(int wins, int discordant);

enum class PairTransform { identity, log_ratio };

struct WilcoxonResult {
  double statistic = 0.0;   // W = min(W+, W-), average ranks for ties
  double p_one_sided = 1.0; // alternative: first elements exceed second
  double p_two_sided = 1.0;
  int n_used = 0;           // pairs remaining after dropping zero differences
  bool exact = true;        // exact enumeration (n <= 20) vs normal approximation
};

// Paired Wilcoxon signed-rank test. Zero differences are dropped; tied
// magnitudes get average ranks. Exact p enumerates all 2^n sign assignments
// for n <= 20 (via a subset-sum count over doubled ranks); the normal
// approximation with continuity correction is used above. Requires >= 5
// non-zero differences.
WilcoxonResult wilcoxon_signed_rank(const std::vector<std::pair<double, double>>& pairs,
                                    PairTransform transform = PairTransform::identity);

// Pearson correlation on raw values (used internally on ranks).
double pearson(const std::vector<double>& x, const std::vector<double>& y);

// Survival function of Student's t distribution, P(T > t), via the
// regularized incomplete beta function.
double student_t_sf(double t, double dof);

// Regularized incomplete beta I_x(a, b).
// https://en.wikipedia.org/wiki/Beta_function#Incomplete_beta_function
double regularized_incomplete_beta(double x, double a, double b);

}  // namespace ttc::stats
