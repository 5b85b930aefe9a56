#pragma once

#include "statedpref/panel.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace statedpref {

enum class DimTestVariant
{
  rank_invariance_ks,
  quantile_spread,
};

std::string to_string(DimTestVariant v);

struct DimTestResult
{
  double statistic = 0.0;
  double p_value = 1.0;
  DimTestVariant variant = DimTestVariant::rank_invariance_ks;
  int n_effective = 0;
  bool reject_at_05 = false;
  std::vector<std::string> warnings;
};

//! Rank-invariance test of a one-dimensional heterogeneity.
//!
//! Each person's within-cell rank of p_star (cells are the distinct x
//! values of a scenario, mid-ranks scaled into (0,1)) is computed in
//! scenarios t1 and t2; the statistic is the mean absolute rank displacement.
//! Under the null the within-cell ordering is a monotone image of one latent
//! ordering of persons, so the reference distribution is obtained exactly by
//! drawing that ordering uniformly at random and re-reading each cell's
//! observed (sorted) ranks along it. Cells with fewer than `min_cell`
//! persons are dropped with a warning.
DimTestResult rank_invariance_test(const PseudoPanel& panel, int t1, int t2, int n_perm,
                                   std::uint64_t seed, int min_cell = 10);

//! Conditional quantile-spread diagnostic for noisy data.
//!
//! Within each (x_t2, x_t1) cell, p_t2 is detrended by an isotonic fit on
//! p_t1 (exact under the null without noise); residual spreads between the
//! taus quantiles are averaged over cells of (x_t2, x_t1) x deciles of p_t1.
//! The p-value is the bootstrap share of resampled statistics at or below
//! zero, so a strictly positive spread in every resample rejects. Measurement
//! error inflates the spread, so under noise only non-rejection is informative.
DimTestResult quantile_spread_test(const PseudoPanel& panel, int t1, int t2,
                                   std::pair<double, double> taus, int n_boot,
                                   std::uint64_t seed, int min_cell = 10);

} // namespace statedpref
