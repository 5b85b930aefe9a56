#include "statedpref/errors.hpp"
#include "statedpref/normal.hpp"
#include "statedpref/rng.hpp"
#include "statedpref/secondstep.hpp"

#include <doctest.h>

#include <random>

using namespace statedpref;

namespace {

std::vector<ActualRecord> simulate_probit(int n, double alpha, double beta, std::uint64_t seed,
                                          PersonId first_id = 1)
{
  Rng rng(seed);
  std::normal_distribution<double> gauss;
  std::vector<ActualRecord> out;
  for (int i = 0; i < n; ++i) {
    const double x = gauss(rng);
    out.push_back({first_id + i, x, alpha + beta * x + gauss(rng) > 0.0 ? 1 : 0});
  }
  return out;
}

} // namespace

TEST_CASE("probit: score matches finite differences")
{
  Rng rng(5);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd z(150, 3);
  Eigen::VectorXi d(150);
  for (int i = 0; i < 150; ++i) {
    z.row(i) << 1.0, gauss(rng), gauss(rng);
    d(i) = gauss(rng) > 0.2 ? 1 : 0;
  }
  const Eigen::Vector3d theta(0.3, -0.8, 1.4);
  const Eigen::VectorXd score = probit_score(z, d, theta);
  const Eigen::MatrixXd hess = probit_hessian(z, d, theta);
  const double h = 1e-5;
  for (int j = 0; j < 3; ++j) {
    Eigen::Vector3d up = theta, dn = theta;
    up(j) += h;
    dn(j) -= h;
    CHECK(score(j) ==
          doctest::Approx((probit_loglik(z, d, up) - probit_loglik(z, d, dn)) / (2 * h)).epsilon(1e-7));
    const Eigen::VectorXd col = (probit_score(z, d, up) - probit_score(z, d, dn)) / (2 * h);
    for (int i = 0; i < 3; ++i)
      CHECK(hess(i, j) == doctest::Approx(col(i)).epsilon(1e-6));
  }
}

TEST_CASE("probit: log-likelihood is finite for extreme indices")
{
  Eigen::MatrixXd z(2, 1);
  z << 1.0, 1.0;
  Eigen::VectorXi d(2);
  d << 0, 1;
  Eigen::VectorXd theta(1);
  theta << 60.0;
  CHECK(std::isfinite(probit_loglik(z, d, theta)));
  CHECK(probit_score(z, d, theta).allFinite());
}

TEST_CASE("probit: consistency at large n")
{
  const auto data = simulate_probit(200'000, 0.3, 0.7, 17);
  const ProbitSolution fit = fit_pooled_probit(data);
  REQUIRE(fit.converged);
  CHECK(std::abs(fit.theta(0) - 0.3) < 0.02);
  CHECK(std::abs(fit.theta(1) - 0.7) < 0.02);
  CHECK(fit.grad_norm / 200'000.0 < 1e-8);
}

TEST_CASE("probit: Newton log-likelihood is non-decreasing")
{
  const auto data = simulate_probit(2000, -0.4, 1.2, 3);
  const ProbitSolution fit = fit_pooled_probit(data);
  for (std::size_t i = 1; i < fit.loglik_trace.size(); ++i)
    CHECK(fit.loglik_trace[i] >= fit.loglik_trace[i - 1] - 1e-9);
}

TEST_CASE("probit: perfect separation is clamped and flagged")
{
  std::vector<ActualRecord> data;
  for (int i = 0; i < 40; ++i)
    data.push_back({i + 1, i - 19.5, i >= 20 ? 1 : 0});
  const ProbitSolution fit = fit_pooled_probit(data);
  CHECK(fit.separated);
  CHECK(fit.theta.norm() <= 50.0 + 1e-9);
}

TEST_CASE("grouped probit: per-group parameters")
{
  auto g1 = simulate_probit(20'000, -0.5, 1.0, 21, 1);
  auto g2 = simulate_probit(20'000, 0.8, 0.4, 22, 100'001);
  Grouping grouping;
  grouping.k = 2;
  for (const auto& r : g1)
    grouping.labels[r.person_id] = 1;
  for (const auto& r : g2)
    grouping.labels[r.person_id] = 2;
  std::vector<ActualRecord> all = g1;
  all.insert(all.end(), g2.begin(), g2.end());

  const GroupedProbitFit fit = fit_grouped_probit(all, grouping);
  REQUIRE(fit.params.size() == 2);
  CHECK(fit.params.at(1).alpha == doctest::Approx(-0.5).epsilon(0.1));
  CHECK(std::abs(fit.params.at(1).beta - 1.0) < 0.05);
  CHECK(std::abs(fit.params.at(2).alpha - 0.8) < 0.05);
  CHECK(std::abs(fit.params.at(2).beta - 0.4) < 0.05);
  CHECK(fit.n_separated() == 0);
  CHECK(predict_choice_prob(fit, 0.0, 2) == doctest::Approx(normal_cdf(fit.params.at(2).alpha)));
  CHECK_THROWS_AS(predict_choice_prob(fit, 0.0, 3), ArgumentError);

  ModelSpec common;
  common.per_group_slope = false;
  const GroupedProbitFit shared = fit_grouped_probit(all, grouping, common);
  CHECK(shared.params.at(1).beta == shared.params.at(2).beta);
  CHECK(shared.converged);
}

TEST_CASE("grouped probit: all-equal group is separated")
{
  std::vector<ActualRecord> data{{1, 0.1, 1}, {2, -0.3, 1}, {3, 0.4, 0}, {4, 1.0, 1}};
  Grouping grouping;
  grouping.k = 2;
  grouping.labels = {{1, 1}, {2, 1}, {3, 2}, {4, 2}};
  const GroupedProbitFit fit = fit_grouped_probit(data, grouping);
  CHECK(fit.params.at(1).separated);
  CHECK(fit.params.at(1).alpha == 50.0);
  CHECK(fit.params.at(1).beta == 0.0);
  CHECK(fit.n_separated() >= 1);
}

TEST_CASE("grouped probit: unlabeled records are counted")
{
  std::vector<ActualRecord> data = simulate_probit(200, 0.0, 1.0, 4);
  Grouping grouping;
  grouping.k = 1;
  for (const auto& r : data)
    if (r.person_id <= 150)
      grouping.labels[r.person_id] = 1;
  const GroupedProbitFit fit = fit_grouped_probit(data, grouping);
  CHECK(fit.n_unlabeled == 50);
  CHECK(fit.params.at(1).n_obs == 150);
}

TEST_CASE("model spec validation")
{
  CHECK_THROWS(validate(ModelSpec{.max_iter = 0}));
  CHECK_THROWS(validate(ModelSpec{.separation_bound = -1.0}));
}
