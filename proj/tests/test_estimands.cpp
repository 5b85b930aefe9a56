#include "statedpref/dgp.hpp"
#include "statedpref/errors.hpp"
#include "statedpref/estimands.hpp"
#include "statedpref/normal.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace statedpref;

namespace {

GroupedProbitFit two_group_fit()
{
  GroupedProbitFit fit;
  fit.params[1] = {.alpha = -0.5, .beta = 1.0, .n_obs = 30, .converged = true};
  fit.params[2] = {.alpha = 0.4, .beta = 0.2, .n_obs = 10, .converged = true};
  return fit;
}

Grouping two_groups()
{
  Grouping g;
  g.k = 2;
  for (PersonId id = 1; id <= 40; ++id)
    g.labels[id] = id <= 30 ? 1 : 2;
  return g;
}

} // namespace

TEST_CASE("asf: weighted group probabilities")
{
  const auto fit = two_group_fit();
  const auto g = two_groups();
  const double expected = 0.75 * normal_cdf(0.5) + 0.25 * normal_cdf(0.6);
  CHECK(average_structural_function(fit, g, 1.0) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(treatment_effect(fit, g, 0.7, 0.7) == 0.0);

  Grouping single;
  single.k = 1;
  single.labels = {{1, 1}, {2, 1}};
  GroupedProbitFit one;
  one.params[1] = {.alpha = 0.1, .beta = 0.9};
  CHECK(treatment_effect(one, single, 1.0, 0.0) ==
        doctest::Approx(normal_cdf(1.0) - normal_cdf(0.1)));

  GroupedProbitFit missing = fit;
  missing.params.erase(2);
  CHECK_THROWS_AS(average_structural_function(missing, g, 0.0), EstimationError);
}

TEST_CASE("silverman bandwidth")
{
  const std::vector<double> x{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const double sd = std::sqrt(110.0 / 12.0);
  const double iqr = 7.75 - 3.25;
  CHECK(silverman_bandwidth(x) ==
        doctest::Approx(0.9 * std::min(sd, iqr / 1.34) * std::pow(10.0, -0.2)).epsilon(1e-3));
}

TEST_CASE("naive and stated treatment effects")
{
  DgpConfig cfg;
  cfg.n = 3000;
  const SimulatedData data = simulate_dataset(cfg, 31);
  const NaiveTe naive = naive_te(data.panel.actual, 1.0, 0.0);
  CHECK(naive.converged);
  CHECK(naive.value > 0.0);
  CHECK(naive_te(data.panel.actual, 0.2, 0.2).value == 0.0);

  const StatedTe on_grid = stated_te(data.panel, 0.4, 0.0);
  CHECK_FALSE(on_grid.off_grid);
  CHECK_FALSE(on_grid.missing);
  double s1 = 0.0, s0 = 0.0;
  int n1 = 0, n0 = 0;
  for (const auto& r : data.panel.stated) {
    if (r.scenario_id == 0)
      continue;
    if (r.x == 0.4) {
      s1 += r.p_star;
      ++n1;
    }
    if (r.x == 0.0) {
      s0 += r.p_star;
      ++n0;
    }
  }
  CHECK(on_grid.value == doctest::Approx(s1 / n1 - s0 / n0).epsilon(1e-12));
  CHECK(stated_te(data.panel, 1.0, 0.0).off_grid);
  CHECK(stated_te(data.panel, 1.0, 0.0, 0.2).value > 0.0);

  std::vector<ActualRecord> constant_x{{1, 0.0, 1}, {2, 0.0, 0}};
  CHECK_THROWS(naive_te(constant_x, 1.0, 0.0));
}

TEST_CASE("stated demand by group: missing when uncovered")
{
  PseudoPanel panel;
  panel.t_count = 2;
  for (PersonId id = 1; id <= 40; ++id) {
    panel.stated.push_back({id, 0, id <= 30 ? -1.0 : 1.0, id <= 30 ? 0.2 : 0.6});
    panel.stated.push_back({id, 1, 0.0, 0.5});
  }
  const auto near = stated_demand_by_group(panel, two_groups(), -1.0, 0.1);
  CHECK_FALSE(near.at(1).missing);
  CHECK(near.at(1).value == doctest::Approx(0.2));
  CHECK(near.at(2).missing);
  const auto flat = stated_demand_by_group(panel, two_groups(), -1.0,
                                           std::numeric_limits<double>::infinity());
  CHECK(flat.at(2).value == doctest::Approx(0.6));

  const std::vector<double> grid{-1.0, 5.0};
  const auto points = msb(two_group_fit(), panel, two_groups(), grid, 0.1);
  CHECK_FALSE(points[0].missing);
  CHECK(points[0].value >= 0.0);
  CHECK(points[1].missing);
}

TEST_CASE("counterfactual: pooled, uncovered and shifted populations")
{
  DgpConfig cfg;
  cfg.n = 2000;
  SimulatedData data = simulate_dataset(cfg, 8);
  Grouping g;
  g.k = 2;
  for (const auto& r : data.panel.actual)
    g.labels[r.person_id] = data.latent.persons[static_cast<std::size_t>(r.person_id - 1)].eta1 > 0 ? 1 : 2;
  std::map<PersonId, int> pooled;
  double mean_d = 0.0;
  for (const auto& r : data.panel.actual) {
    pooled[r.person_id] = 1;
    mean_d += r.d;
  }
  mean_d /= cfg.n;
  const auto same = counterfactual_distribution(data.panel.actual, g, pooled, 1, 1);
  CHECK(same.n_target == cfg.n);
  CHECK(std::abs(same.value - mean_d) < 0.02);

  std::map<PersonId, int> by_group;
  for (const auto& [id, label] : g.labels)
    by_group[id] = label;
  const auto cross = counterfactual_distribution(data.panel.actual, g, by_group, 1, 2);
  CHECK(cross.n_uncovered == cross.n_target);
  CHECK(cross.missing);
  CHECK(cross.uncovered_groups == std::vector<int>{2});
}

TEST_CASE("compute_estimands: report rows")
{
  DgpConfig cfg;
  cfg.n = 1500;
  const SimulatedData data = simulate_dataset(cfg, 2);
  const std::vector<double> eval{0.0, 1.0};
  const MomentSet m = estimate_individual_moments(data.panel, eval);
  const Grouping g = kmeans_partition(m, 4, 5, 2);
  const GroupedProbitFit fit = fit_grouped_probit(data.panel.actual, g);
  const EstimandReport report = compute_estimands(data.panel, g, fit, nullptr, {});
  CHECK(report.te == doctest::Approx(report.asf.at(1.0) - report.asf.at(0.0)));
  CHECK(report.msb.size() == 3);
  CHECK(report.bandwidth > 0.0);
  int te_rows = 0, msb_rows = 0;
  for (const auto& r : report.rows()) {
    te_rows += r.quantity == "te";
    msb_rows += r.quantity == "msb";
  }
  CHECK(te_rows == 1);
  CHECK(msb_rows == 3);
}
