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

#include "msfi/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

#include "msfi/errors.hpp"

namespace msfi::stats {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_nonempty(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw DataError("Mann-Whitney U needs two non-empty samples");
}

std::vector<double> pooled(std::span<const double> a, std::span<const double> b) {
  std::vector<double> all(a.begin(), a.end());
  all.insert(all.end(), b.begin(), b.end());
  return all;
}

double u_statistic(std::span<const double> a, std::span<const double> b) {
  const auto ranks = midranks(pooled(a, b));
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) rank_sum += ranks[i];
  const double na = static_cast<double>(a.size());
  return rank_sum - na * (na + 1.0) / 2.0;
}

}  // namespace

std::vector<double> midranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
    i = j + 1;
  }
  return ranks;
}

double mann_whitney_exact_p(std::span<const double> a, std::span<const double> b) {
  require_nonempty(a, b);
  const std::size_t na = a.size(), n = a.size() + b.size();
  const auto ranks = midranks(pooled(a, b));
  // Doubled midranks are integers; count subsets of size na by rank sum.
  std::vector<int> twice(n);
  int max_sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    twice[i] = static_cast<int>(std::lround(2.0 * ranks[i]));
    max_sum += twice[i];
  }
  std::vector<std::vector<double>> ways(na + 1, std::vector<double>(max_sum + 1, 0.0));
  ways[0][0] = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = std::min(na, i + 1); k >= 1; --k) {
      for (int s = max_sum; s >= twice[i]; --s) ways[k][s] += ways[k - 1][s - twice[i]];
    }
  }
  int observed = 0;
  for (std::size_t i = 0; i < na; ++i) observed += twice[i];
  const double mean2 = static_cast<double>(na) * static_cast<double>(n + 1);  // 2 * E[rank sum]
  const double dev = std::fabs(observed - mean2);
  double extreme = 0.0, total = 0.0;
  for (int s = 0; s <= max_sum; ++s) {
    total += ways[na][s];
    if (std::fabs(s - mean2) >= dev - 1e-9) extreme += ways[na][s];
  }
  return std::min(1.0, extreme / total);
}

double mann_whitney_normal_p(std::span<const double> a, std::span<const double> b) {
  require_nonempty(a, b);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double n = na + nb;
  const double u = u_statistic(a, b);
  const double mean = na * nb / 2.0;

  auto all = pooled(a, b);
  std::sort(all.begin(), all.end());
  double tie_term = 0.0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j] == all[i]) ++j;
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }
  const double var = na * nb / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
  if (!(var > 0.0)) return 1.0;
  const double dev = std::max(0.0, std::fabs(u - mean) - 0.5);
  return std::min(1.0, 2.0 * normal_sf(dev / std::sqrt(var)));
}

MannWhitneyResult mann_whitney_u(std::span<const double> a, std::span<const double> b) {
  require_nonempty(a, b);
  MannWhitneyResult r;
  r.u = u_statistic(a, b);
  r.exact = a.size() + b.size() <= kMannWhitneyExactLimit;
  r.p = r.exact ? mann_whitney_exact_p(a, b) : mann_whitney_normal_p(a, b);
  return r;
}

double kendall_tau_b(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DataError("Kendall tau-b: length mismatch");
  if (x.size() < 2) throw DataError("Kendall tau-b needs at least two observations");
  double concordant = 0.0, discordant = 0.0, ties_x = 0.0, ties_y = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double dx = x[i] - x[j], dy = y[i] - y[j];
      if (dx == 0.0 && dy == 0.0) continue;
      if (dx == 0.0) {
        ties_x += 1.0;
      } else if (dy == 0.0) {
        ties_y += 1.0;
      } else if ((dx > 0.0) == (dy > 0.0)) {
        concordant += 1.0;
      } else {
        discordant += 1.0;
      }
    }
  }
  const double fx = concordant + discordant + ties_x;
  const double fy = concordant + discordant + ties_y;
  if (fx == 0.0 || fy == 0.0) return kNaN;
  return (concordant - discordant) / std::sqrt(fx * fy);
}

FriedmanResult friedman(const std::vector<std::vector<double>>& scores) {
  const std::size_t n = scores.size();
  if (n < 2) throw DataError("Friedman test needs at least two subjects");
  const std::size_t k = scores.front().size();
  if (k < 2) throw DataError("Friedman test needs at least two treatments");
  FriedmanResult r;
  r.rank_sums.assign(k, 0.0);
  for (const auto& row : scores) {
    if (row.size() != k) throw DataError("Friedman test: ragged score table");
    const auto ranks = midranks(row);
    for (std::size_t j = 0; j < k; ++j) r.rank_sums[j] += ranks[j];
  }
  const double nd = static_cast<double>(n), kd = static_cast<double>(k);
  double sq = 0.0;
  for (double rs : r.rank_sums) {
    sq += rs * rs;
    r.mean_ranks.push_back(rs / nd);
  }
  r.chi2 = 12.0 / (nd * kd * (kd + 1.0)) * sq - 3.0 * nd * (kd + 1.0);
  if (std::fabs(r.chi2) < 1e-12) r.chi2 = 0.0;
  r.p = chi2_sf(r.chi2, kd - 1.0);
  return r;
}

double nemenyi_q(std::size_t k, double alpha) {
  // q_alpha = studentized range quantile (infinite df) / sqrt(2). k <= 10 are
  // the published values; k > 10 were computed from the same distribution.
  static constexpr double kQ05[] = {1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031,
                                    3.102, 3.164, 3.219, 3.268, 3.313, 3.354, 3.391,
                                    3.426, 3.458, 3.489, 3.517, 3.544};
  static constexpr double kQ10[] = {1.645, 2.052, 2.291, 2.459, 2.589, 2.693, 2.780,
                                    2.855, 2.920, 2.978, 3.030, 3.077, 3.120, 3.159,
                                    3.196, 3.230, 3.261, 3.291, 3.319};
  if (k < 2 || k > 20) throw DataError("Nemenyi table covers k in [2, 20], got " + std::to_string(k));
  if (std::fabs(alpha - 0.05) < 1e-12) return kQ05[k - 2];
  if (std::fabs(alpha - 0.10) < 1e-12) return kQ10[k - 2];
  throw DataError("Nemenyi table covers alpha 0.05 and 0.10 only");
}

double nemenyi_cd(std::size_t k, std::size_t n, double alpha) {
  if (n < 1) throw DataError("Nemenyi CD needs n >= 1");
  const double kd = static_cast<double>(k);
  return nemenyi_q(k, alpha) * std::sqrt(kd * (kd + 1.0) / (6.0 * static_cast<double>(n)));
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DataError("Pearson: length mismatch");
  if (x.size() < 2) throw DataError("Pearson needs at least two observations");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw UndefinedError("Pearson correlation undefined: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double krippendorff_alpha(const std::vector<std::vector<double>>& ratings,
                          MeasurementLevel level) {
  if (ratings.empty()) throw DataError("Krippendorff's alpha: no raters");
  const std::size_t items = ratings.front().size();
  for (const auto& row : ratings) {
    if (row.size() != items) throw DataError("Krippendorff's alpha: ragged rating table");
  }
  auto delta2 = [level](double c, double k) {
    return level == MeasurementLevel::kNominal ? (c == k ? 0.0 : 1.0) : (c - k) * (c - k);
  };

  // Coincidence matrix over the distinct rated values.
  std::map<double, std::size_t> index;
  for (const auto& row : ratings) {
    for (double v : row) {
      if (!std::isnan(v)) index.emplace(v, 0);
    }
  }
  std::vector<double> values;
  for (auto& [v, i] : index) {
    i = values.size();
    values.push_back(v);
  }
  const std::size_t nv = values.size();
  std::vector<double> coincidence(nv * nv, 0.0);
  std::size_t pairable_items = 0;
  for (std::size_t u = 0; u < items; ++u) {
    std::vector<std::size_t> unit;
    for (const auto& row : ratings) {
      if (!std::isnan(row[u])) unit.push_back(index.at(row[u]));
    }
    if (unit.size() < 2) continue;
    ++pairable_items;
    const double w = 1.0 / static_cast<double>(unit.size() - 1);
    for (std::size_t i = 0; i < unit.size(); ++i) {
      for (std::size_t j = 0; j < unit.size(); ++j) {
        if (i != j) coincidence[unit[i] * nv + unit[j]] += w;
      }
    }
  }
  if (pairable_items < 2) throw DataError("Krippendorff's alpha: fewer than two pairable items");

  std::vector<double> marginal(nv, 0.0);
  double n = 0.0;
  for (std::size_t c = 0; c < nv; ++c) {
    for (std::size_t k = 0; k < nv; ++k) marginal[c] += coincidence[c * nv + k];
    n += marginal[c];
  }
  double observed = 0.0, expected = 0.0;
  for (std::size_t c = 0; c < nv; ++c) {
    for (std::size_t k = 0; k < nv; ++k) {
      const double d = delta2(values[c], values[k]);
      observed += coincidence[c * nv + k] * d;
      expected += marginal[c] * marginal[k] * d;
    }
  }
  observed /= n;
  expected /= n * (n - 1.0);
  if (!(expected > 0.0)) throw UndefinedError("Krippendorff's alpha undefined: no variation in ratings");
  return 1.0 - observed / expected;
}

double fleiss_kappa(const std::vector<std::vector<double>>& counts) {
  if (counts.empty()) throw DataError("Fleiss' kappa: no items");
  const std::size_t categories = counts.front().size();
  const double raters = std::accumulate(counts.front().begin(), counts.front().end(), 0.0);
  if (raters < 2.0) throw DataError("Fleiss' kappa needs at least two raters per item");
  const double items = static_cast<double>(counts.size());
  std::vector<double> column(categories, 0.0);
  double agreement = 0.0;
  for (const auto& row : counts) {
    if (row.size() != categories) throw DataError("Fleiss' kappa: ragged count table");
    double total = 0.0, sq = 0.0;
    for (std::size_t j = 0; j < categories; ++j) {
      if (row[j] < 0.0) throw DataError("Fleiss' kappa: negative count");
      total += row[j];
      sq += row[j] * row[j];
      column[j] += row[j];
    }
    if (total != raters) throw DataError("Fleiss' kappa: unequal rater counts across items");
    agreement += (sq - raters) / (raters * (raters - 1.0));
  }
  const double p_bar = agreement / items;
  double p_e = 0.0;
  for (double c : column) {
    const double pj = c / (items * raters);
    p_e += pj * pj;
  }
  if (std::fabs(1.0 - p_e) < 1e-15) throw UndefinedError("Fleiss' kappa undefined: all ratings in one category");
  return (p_bar - p_e) / (1.0 - p_e);
}

double chi2_sf(double x, double dof) {
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(dof / 2.0, x / 2.0);
}

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

std::string significance_stars(double p) {
  if (std::isnan(p)) return "n/a";
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  return "NS";
}

}  // namespace msfi::stats
