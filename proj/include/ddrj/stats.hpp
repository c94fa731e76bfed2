#ifndef DDRJ_STATS_HPP
#define DDRJ_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "ddrj/errors.hpp"
#include "ddrj/matrix.hpp"

namespace ddrj {

//! Pearson correlation. Throws ZeroVariance when either input is constant.
inline double pearson_correlation(const Vector& x, const Vector& y) {
  const std::size_t n = x.size();
  if (n != y.size()) throw DimensionMismatch("pearson_correlation: length mismatch");
  if (n < 2) throw DimensionMismatch("pearson_correlation: need length >= 2");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw ZeroVariance("pearson_correlation: constant input");
  return sxy / std::sqrt(sxx * syy);
}

//! Midranks (average ranks for ties), 1-based. Also reports sum(t^3 - t)
//! over tie groups, needed for the Kruskal-Wallis tie correction.
inline Vector rank_average_ties(const Vector& values, double* tie_sum = nullptr) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  Vector ranks(n);
  double ties = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    const double t = static_cast<double>(j - i + 1);
    ties += t * t * t - t;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  if (tie_sum) *tie_sum = ties;
  return ranks;
}

//! Kruskal-Wallis statistic from precomputed midranks of the values.
//! Groups are the 3-level codes {-1,0,1}; throws SingleGroup when fewer than
//! two levels occur. A fully tied sample returns 0 by convention.
inline double kruskal_wallis_from_ranks(const Vector& ranks, double tie_sum,
                                        const std::vector<int>& groups) {
  const std::size_t n = ranks.size();
  if (n != groups.size()) throw DimensionMismatch("kruskal_wallis: length mismatch");
  double rsum[3] = {0.0, 0.0, 0.0};
  std::size_t cnt[3] = {0, 0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    const int g = groups[i] + 1;  // -1/0/1 -> 0/1/2
    rsum[g] += ranks[i];
    ++cnt[g];
  }
  int levels = 0;
  for (int g = 0; g < 3; ++g)
    if (cnt[g] > 0) ++levels;
  if (levels < 2) throw SingleGroup("kruskal_wallis: single group present");

  const double nn = static_cast<double>(n);
  const double correction = 1.0 - tie_sum / (nn * nn * nn - nn);
  if (correction <= 0.0) return 0.0;  // every value tied

  double h = 0.0;
  for (int g = 0; g < 3; ++g)
    if (cnt[g] > 0) h += rsum[g] * rsum[g] / static_cast<double>(cnt[g]);
  h = 12.0 / (nn * (nn + 1.0)) * h - 3.0 * (nn + 1.0);
  h /= correction;
  return std::max(h, 0.0);
}

inline double kruskal_wallis(const Vector& values, const std::vector<int>& groups) {
  double tie_sum = 0.0;
  const Vector ranks = rank_average_ties(values, &tie_sum);
  return kruskal_wallis_from_ranks(ranks, tie_sum, groups);
}

}  // namespace ddrj

#endif
