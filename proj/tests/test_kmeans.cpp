#include "statedpref/errors.hpp"
#include "statedpref/firststep.hpp"
#include "statedpref/kmeans.hpp"
#include "statedpref/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

using namespace statedpref;

namespace {

Eigen::MatrixXd random_points(int n, int dim, std::uint64_t seed)
{
  Rng rng(seed);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd p(n, dim);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < dim; ++j)
      p(i, j) = gauss(rng);
  return p;
}

// Stated panel with scenario x on the grid and p_star = inverse logit(a + b x).
PseudoPanel linear_panel(const std::vector<std::pair<double, double>>& ab, int t)
{
  PseudoPanel panel;
  panel.t_count = t + 1;
  const std::vector<double> grid{-2.0, -1.0, 0.0, 1.0, 2.0};
  for (std::size_t i = 0; i < ab.size(); ++i) {
    const PersonId id = static_cast<PersonId>(i + 1);
    panel.stated.push_back({id, 0, 0.0, 0.5});
    for (int s = 1; s <= t; ++s) {
      const double x = grid[static_cast<std::size_t>(s + static_cast<int>(i)) % grid.size()];
      const double z = ab[i].first + ab[i].second * x;
      panel.stated.push_back({id, s, x, 1.0 / (1.0 + std::exp(-z))});
    }
    panel.actual.push_back({id, 0.0, 0});
  }
  return panel;
}

} // namespace

TEST_CASE("kmeans: objective trace is non-increasing")
{
  for (int inst = 0; inst < 20; ++inst) {
    const Eigen::MatrixXd pts = random_points(80, 3, 100 + inst);
    const KMeansResult r = kmeans(pts, {.k = 5, .restarts = 4, .seed = 9});
    REQUIRE(r.objective_trace.size() == 4);
    for (const auto& trace : r.objective_trace)
      for (std::size_t i = 1; i < trace.size(); ++i)
        CHECK(trace[i] <= trace[i - 1] + 1e-12);
    CHECK(r.objective == doctest::Approx(within_sum_of_squares(pts, r.centroids, r.labels)));
  }
}

TEST_CASE("kmeans: deterministic and permutation invariant objective")
{
  const Eigen::MatrixXd pts = random_points(60, 2, 1);
  const KMeansResult a = kmeans(pts, {.k = 4, .restarts = 10, .seed = 3});
  const KMeansResult b = kmeans(pts, {.k = 4, .restarts = 10, .seed = 3});
  CHECK(a.labels == b.labels);
  CHECK(a.objective == b.objective);

  std::vector<int> perm(60);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), Rng(4));
  Eigen::MatrixXd shuffled(60, 2);
  for (int i = 0; i < 60; ++i)
    shuffled.row(i) = pts.row(perm[static_cast<std::size_t>(i)]);
  const KMeansResult c = kmeans(shuffled, {.k = 4, .restarts = 30, .seed = 3});
  const KMeansResult d = kmeans(pts, {.k = 4, .restarts = 30, .seed = 5});
  CHECK(c.objective == doctest::Approx(d.objective).epsilon(1e-9));
}

TEST_CASE("kmeans: edge cases")
{
  const Eigen::MatrixXd pts = random_points(7, 2, 2);
  CHECK(kmeans(pts, {.k = 7, .restarts = 1, .seed = 1}).objective == 0.0);
  const KMeansResult one = kmeans(pts, {.k = 1, .restarts = 1, .seed = 1});
  CHECK(one.centroids.row(0).isApprox(pts.colwise().mean()));
  CHECK_THROWS_AS(kmeans(pts, {.k = 8}), ArgumentError);
  CHECK_THROWS_AS(kmeans(pts, {.k = 0}), ArgumentError);

  Eigen::MatrixXd dup(6, 1);
  dup << 1, 1, 1, 1, 5, 5;
  const KMeansResult r = kmeans(dup, {.k = 3, .restarts = 3, .seed = 1});
  CHECK(r.objective == 0.0);
  CHECK(std::set<int>(r.labels.begin(), r.labels.end()).size() == 3);
}

TEST_CASE("moments: OLS on the link scale is exact for noiseless linear data")
{
  const PseudoPanel panel = linear_panel({{0.2, 0.5}, {-1.0, 1.0}, {1.0, -0.5}}, 5);
  const std::vector<double> eval{0.0, 1.0};
  const MomentSet m = estimate_individual_moments(panel, eval);
  REQUIRE(m.persons.size() == 3);
  CHECK(m.n_excluded == 0);
  CHECK(m.persons[0].h(0) == doctest::Approx(0.2));
  CHECK(m.persons[0].h(1) == doctest::Approx(0.7));
  CHECK(m.persons[1].h(1) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(m.persons[2].noise_var == doctest::Approx(0.0).epsilon(1e-18));
}

TEST_CASE("moments: rank-deficient persons are excluded")
{
  PseudoPanel panel = linear_panel({{0.2, 0.5}, {0.0, 0.0}}, 3);
  for (auto& r : panel.stated)
    if (r.person_id == 2 && r.scenario_id > 0)
      r.x = 1.0;
  const std::vector<double> eval{0.0, 1.0};
  const MomentSet m = estimate_individual_moments(panel, eval);
  CHECK(m.n_excluded == 1);
  CHECK(m.usable_ids() == std::vector<PersonId>{1});
  CHECK_FALSE(m.persons[1].fit_ok);

  for (auto& r : panel.stated)
    if (r.person_id == 1 && r.scenario_id > 0)
      r.x = 0.0;
  CHECK_THROWS_AS(estimate_individual_moments(panel, eval), EstimationError);
}

TEST_CASE("moments: identical latent types give identical moments")
{
  const PseudoPanel panel = linear_panel({{0.3, 0.4}, {0.3, 0.4}}, 10);
  const std::vector<double> eval{0.0, 1.0};
  const MomentSet m = estimate_individual_moments(panel, eval);
  CHECK((m.persons[0].h - m.persons[1].h).norm() < 1e-8);
}

TEST_CASE("select_k: three noiseless types give K = 3")
{
  std::vector<std::pair<double, double>> ab;
  for (int i = 0; i < 30; ++i)
    ab.push_back(i % 3 == 0 ? std::pair{-1.0, 0.5} : i % 3 == 1 ? std::pair{0.5, 1.0} : std::pair{1.5, -0.2});
  const PseudoPanel panel = linear_panel(ab, 5);
  const std::vector<double> eval{0.0, 1.0};
  const MomentSet m = estimate_individual_moments(panel, eval);
  const KSelection sel = select_k(m, 2, 10, 1.0, 5, 1);
  CHECK(sel.k == 3);
  CHECK(sel.threshold_met);
  CHECK(select_k(m, 2, 10, std::numeric_limits<double>::infinity(), 5, 1).k == 2);

  const Grouping g = kmeans_partition(m, 3, 5, 1);
  CHECK(g.sizes() == std::vector<int>{10, 10, 10});
  CHECK(g.shares()[0] == doctest::Approx(1.0 / 3.0));
  CHECK(g.labels.at(1) == g.labels.at(4));
  CHECK(g.labels.at(1) != g.labels.at(2));
}
