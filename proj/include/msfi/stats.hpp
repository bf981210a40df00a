/*
 * Copyright 2026 The msfi-eval Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace msfi::stats {

/// Midranks (1-based, ties share the average rank).
std::vector<double> midranks(std::span<const double> values);

struct MannWhitneyResult {
  double u = 0.0;  // U statistic of the first sample
  double p = 1.0;  // two-sided
  bool exact = false;
};

/// Two-sided Mann-Whitney U test. Uses the exact permutation distribution
/// of the (midranked) rank sum when |a| + |b| <= kExactLimit, otherwise the
/// tie-corrected normal approximation with continuity correction.
MannWhitneyResult mann_whitney_u(std::span<const double> a, std::span<const double> b);
inline constexpr std::size_t kMannWhitneyExactLimit = 20;
double mann_whitney_exact_p(std::span<const double> a, std::span<const double> b);
double mann_whitney_normal_p(std::span<const double> a, std::span<const double> b);

/// Kendall tau-b; NaN when either argument is entirely tied.
double kendall_tau_b(std::span<const double> x, std::span<const double> y);

struct FriedmanResult {
  double chi2 = 0.0;
  double p = 1.0;
  std::vector<double> rank_sums;
  std::vector<double> mean_ranks;
};

/// Friedman test on an n-subjects x k-treatments score table (row-major
/// rows of equal length). Scores are ranked within each subject with midrank
/// ties; rank 1 goes to the smallest score.
FriedmanResult friedman(const std::vector<std::vector<double>>& scores);

/// Nemenyi critical difference q_alpha(k) * sqrt(k (k + 1) / (6 n)).
/// alpha must be 0.05 or 0.10; k in [2, 20].
double nemenyi_cd(std::size_t k, std::size_t n, double alpha = 0.05);
double nemenyi_q(std::size_t k, double alpha = 0.05);

double pearson(std::span<const double> x, std::span<const double> y);

enum class MeasurementLevel { kNominal, kInterval };

/// Krippendorff's alpha on a raters x items table; NaN marks a missing
/// rating. Items with fewer than two ratings are not pairable and ignored.
double krippendorff_alpha(const std::vector<std::vector<double>>& ratings,
                          MeasurementLevel level);

/// Fleiss' kappa on an items x categories count table; every item must be
/// rated by the same number (>= 2) of raters.
double fleiss_kappa(const std::vector<std::vector<double>>& counts);

double chi2_sf(double x, double dof);
double normal_sf(double z);

/// Significance marker used in reports: "***", "**", "*" or "NS".
std::string significance_stars(double p);

}  // namespace msfi::stats
