#include "statedpref/dgp.hpp"
#include "statedpref/dimtest.hpp"
#include "statedpref/errors.hpp"

#include <doctest.h>

#include <algorithm>

using namespace statedpref;

namespace {

DgpConfig noiseless(DgpConfig cfg, int n)
{
  cfg.noise_scale = 0.0;
  cfg.rounding = Rounding::none;
  cfg.n = n;
  return cfg;
}

} // namespace

TEST_CASE("rank test: identical scenarios give a zero statistic")
{
  const SimulatedData data = simulate_dataset(noiseless(DgpConfig{}, 500), 1);
  const DimTestResult r = rank_invariance_test(data.panel, 2, 2, 49, 1);
  CHECK(r.statistic == 0.0);
  CHECK(r.p_value == 1.0);
  CHECK(r.variant == DimTestVariant::rank_invariance_ks);
  CHECK(r.n_effective == 500);
}

TEST_CASE("rank test: p-values under one-dimensional heterogeneity are not small")
{
  const DgpConfig cfg = noiseless(restrict_to_one_dimension(DgpConfig{}), 1000);
  double mean_p = 0.0;
  int rejected = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const DimTestResult r = rank_invariance_test(simulate_dataset(cfg, seed).panel, 1, 2, 99, seed);
    CHECK(r.statistic >= 0.0);
    mean_p += r.p_value / 20.0;
    rejected += r.reject_at_05;
  }
  CHECK(mean_p > 0.3);
  CHECK(rejected <= 4);
}

TEST_CASE("rank test: two dimensions reject")
{
  const SimulatedData data = simulate_dataset(noiseless(DgpConfig{}, 1500), 2);
  const DimTestResult r = rank_invariance_test(data.panel, 1, 2, 99, 2);
  CHECK(r.statistic > 0.0);
  CHECK(r.reject_at_05);
  CHECK(r.p_value == doctest::Approx(0.01));
}

TEST_CASE("rank test: invariant to a relabelling of scenarios")
{
  const SimulatedData data = simulate_dataset(noiseless(DgpConfig{}, 800), 3);
  const DimTestResult a = rank_invariance_test(data.panel, 1, 2, 99, 5);
  const DimTestResult b = rank_invariance_test(data.panel, 2, 1, 99, 5);
  CHECK(a.statistic == doctest::Approx(b.statistic).epsilon(1e-12));
  CHECK(a.statistic >= 0.0);
}

TEST_CASE("rank test: small cells are excluded with a warning")
{
  const SimulatedData data = simulate_dataset(noiseless(DgpConfig{}, 60), 4);
  CHECK_THROWS_AS(rank_invariance_test(data.panel, 1, 2, 19, 1, 100), EstimationError);
  const DimTestResult r = rank_invariance_test(data.panel, 1, 2, 19, 1, 6);
  CHECK(r.n_effective < 60);
  CHECK_FALSE(r.warnings.empty());
  CHECK_THROWS_AS(rank_invariance_test(data.panel, 1, 11, 19, 1), ArgumentError);
}

TEST_CASE("spread test: null and alternative")
{
  DgpConfig one = noiseless(restrict_to_one_dimension(DgpConfig{}), 4000);
  one.stated_coef(3) = 0.2;
  const DimTestResult null = quantile_spread_test(simulate_dataset(one, 5).panel, 1, 2,
                                                  {0.25, 0.75}, 99, 5);
  CHECK(null.statistic == doctest::Approx(0.0).epsilon(1e-10));
  CHECK_FALSE(null.reject_at_05);
  CHECK(null.variant == DimTestVariant::quantile_spread);
  CHECK(std::any_of(null.warnings.begin(), null.warnings.end(),
                    [](const std::string& w) { return w.find("measurement") != std::string::npos; }));

  const DimTestResult alt = quantile_spread_test(
    simulate_dataset(noiseless(DgpConfig{}, 4000), 5).panel, 1, 2, {0.25, 0.75}, 99, 5);
  CHECK(alt.statistic > 0.0);
  CHECK(alt.reject_at_05);

  const PseudoPanel& p = simulate_dataset(one, 5).panel;
  CHECK_THROWS_AS(quantile_spread_test(p, 1, 2, {0.75, 0.25}, 9, 1), ArgumentError);
  CHECK_THROWS_AS(quantile_spread_test(p, 1, 2, {0.0, 0.5}, 9, 1), ArgumentError);
}
