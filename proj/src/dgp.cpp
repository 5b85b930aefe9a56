#include "statedpref/dgp.hpp"

#include "statedpref/errors.hpp"
#include "statedpref/link.hpp"
#include "statedpref/normal.hpp"
#include "statedpref/rng.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

namespace statedpref {

Eigen::Matrix4d DgpConfig::default_cov()
{
  Eigen::Matrix4d c;
  c << 1.0, 0.1, 0.2, 0.0,
       0.1, 1.0, 0.1, 0.05,
       0.2, 0.1, 1.0, 0.05,
       0.0, 0.05, 0.05, 1.0;
  return c;
}

std::vector<double> DgpConfig::default_grid()
{
  return {-2.0, -1.6, -1.2, -0.8, -0.4, 0.0, 0.4, 0.8, 1.2, 1.6, 2.0};
}

void validate(const DgpConfig& cfg)
{
  if (!cfg.mean.allFinite() || !cfg.cov.allFinite())
    throw ConfigError("mean and cov must be finite");
  if ((cfg.cov - cfg.cov.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw ConfigError("cov must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(cfg.cov, Eigen::EigenvaluesOnly);
  const double tol = 1e-10 * std::max(1.0, cfg.cov.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < 4; ++i) {
    if (eig.eigenvalues()(i) < -tol) {
      std::ostringstream msg;
      msg << "cov is not positive semidefinite: eigenvalue " << eig.eigenvalues()(i);
      throw ConfigError(msg.str());
    }
  }
  if (cfg.scenario_grid.empty())
    throw ConfigError("scenario_grid must be nonempty");
  for (double g : cfg.scenario_grid)
    if (!std::isfinite(g))
      throw ConfigError("scenario_grid must be finite");
  if (cfg.n < 1)
    throw ConfigError("n must be >= 1");
  if (cfg.t_scenarios < 1)
    throw ConfigError("t_scenarios must be >= 1");
  if (!(cfg.noise_scale >= 0.0) || !std::isfinite(cfg.noise_scale))
    throw ConfigError("noise_scale must be >= 0");
}

double actual_index(const DgpConfig& cfg, double x, double eta1, double eta2)
{
  const auto& c = cfg.actual_coef;
  return c(0) + c(1) * x + c(2) * eta1 + c(3) * x * eta1 + cfg.actual_eta2_coef * eta2;
}

double stated_index(const DgpConfig& cfg, double x, double eta1, double eta2)
{
  const auto& c = cfg.stated_coef;
  return c(0) + c(1) * x + c(2) * eta1 + c(3) * x * eta1 + cfg.stated_eta2_coef * eta2;
}

double stated_demand(const DgpConfig& cfg, double x, double eta1, double eta2)
{
  return inverse_link(stated_index(cfg, x, eta1, eta2));
}

namespace {

// D = 1{index > threshold(Phi(nu))}.
double threshold_of(const DgpConfig& cfg, double u)
{
  if (cfg.threshold == ThresholdLaw::uniform)
    return u;
  const double q = std::clamp(u, 1e-300, 1.0 - 1e-16);
  return std::log(q) - std::log1p(-q);
}

// Largest value of Phi(nu) that still yields D = 1 for a given index.
double probability_cut(const DgpConfig& cfg, double index)
{
  if (cfg.threshold == ThresholdLaw::uniform)
    return std::clamp(index, 0.0, 1.0);
  return inverse_link(index);
}

struct ConditionalNu
{
  double mean0 = 0.0;
  Eigen::Vector2d slope = Eigen::Vector2d::Zero();
  double sd = 0.0;
};

// Law of nu given (eta1, eta2): nu | eta ~ N(mean0 + slope' eta, sd^2).
ConditionalNu conditional_nu(const DgpConfig& cfg)
{
  const Eigen::Matrix2d s_ee = cfg.cov.block<2, 2>(1, 1);
  const Eigen::Vector2d s_en = cfg.cov.block<2, 1>(1, 3);
  const Eigen::Matrix2d pinv =
    s_ee.completeOrthogonalDecomposition().pseudoInverse();
  ConditionalNu out;
  out.slope = pinv * s_en;
  out.mean0 = cfg.mean(3) - out.slope.dot(cfg.mean.segment<2>(1));
  out.sd = std::sqrt(std::max(0.0, cfg.cov(3, 3) - s_en.dot(out.slope)));
  return out;
}

class LatentSampler
{
public:
  explicit LatentSampler(const DgpConfig& cfg) : mean_(cfg.mean), factor_(psd_cholesky(cfg.cov)) {}

  Eigen::Vector4d operator()(Rng& rng)
  {
    Eigen::Vector4d z;
    for (int i = 0; i < 4; ++i)
      z(i) = normal_(rng);
    return mean_ + factor_ * z;
  }

private:
  Eigen::Vector4d mean_;
  Eigen::Matrix4d factor_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

double round_first_decimal(double p)
{
  return std::round(p * 10.0) / 10.0;
}

} // namespace

double actual_demand(const DgpConfig& cfg, double x, double eta1, double eta2)
{
  const double cut = probability_cut(cfg, actual_index(cfg, x, eta1, eta2));
  if (cut <= 0.0)
    return 0.0;
  if (cut >= 1.0)
    return 1.0;
  const ConditionalNu cn = conditional_nu(cfg);
  const double mu = cn.mean0 + cn.slope(0) * eta1 + cn.slope(1) * eta2;
  const double nu_cut = normal_quantile(cut);
  if (cn.sd <= 0.0)
    return mu < nu_cut ? 1.0 : 0.0;
  return normal_cdf((nu_cut - mu) / cn.sd);
}

SimulatedData simulate_dataset(const DgpConfig& cfg, std::uint64_t seed)
{
  validate(cfg);
  Rng rng(seed);
  LatentSampler sampler(cfg);
  std::normal_distribution<double> std_normal(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> grid_pick(0, cfg.scenario_grid.size() - 1);

  const auto n = static_cast<std::size_t>(cfg.n);
  std::vector<Eigen::Vector4d> draws(n);
  for (auto& w : draws)
    w = sampler(rng);

  double x_min = draws.front()(0);
  double x_max = x_min;
  for (const auto& w : draws) {
    x_min = std::min(x_min, w(0));
    x_max = std::max(x_max, w(0));
  }
  std::uniform_real_distribution<double> x0_dist(x_min, std::nextafter(x_max, x_max + 1.0));

  SimulatedData out;
  auto& panel = out.panel;
  panel.t_count = cfg.t_scenarios + 1;
  panel.actual.reserve(n);
  panel.stated.reserve(n * static_cast<std::size_t>(panel.t_count));
  out.latent.persons.reserve(n);

  for (std::size_t i = 0; i < n; ++i) {
    const PersonId id = static_cast<PersonId>(i + 1);
    const double x = draws[i](0);
    const double eta1 = draws[i](1);
    const double eta2 = draws[i](2);
    const double u = normal_cdf(draws[i](3));

    const int d = actual_index(cfg, x, eta1, eta2) > threshold_of(cfg, u) ? 1 : 0;
    panel.actual.push_back({id, x, d});
    out.latent.persons.push_back({id, eta1, eta2, u});

    for (int t = 0; t <= cfg.t_scenarios; ++t) {
      const double xt = t == 0 ? (x_min == x_max ? x_min : x0_dist(rng))
                               : cfg.scenario_grid[grid_pick(rng)];
      const double eps = std::sqrt(cfg.noise_scale * std::exp(xt)) * std_normal(rng);
      double p = inverse_link(stated_index(cfg, xt, eta1, eta2) + eps);
      if (cfg.rounding == Rounding::first_decimal)
        p = round_first_decimal(p);
      panel.stated.push_back({id, t, xt, p});
    }
  }
  return out;
}

namespace {

// Shares of draws with D(x1) = 1 and D(x0) = 1 under common random numbers.
std::pair<double, double> simulate_take_up(const DgpConfig& cfg, double x1, double x0,
                                           long long n_draws, std::uint64_t seed)
{
  validate(cfg);
  if (n_draws < 1)
    throw ArgumentError("n_draws must be >= 1");
  Rng rng(seed);
  LatentSampler sampler(cfg);
  long long hits1 = 0;
  long long hits0 = 0;
  for (long long i = 0; i < n_draws; ++i) {
    const Eigen::Vector4d w = sampler(rng);
    const double thr = threshold_of(cfg, normal_cdf(w(3)));
    hits1 += actual_index(cfg, x1, w(1), w(2)) > thr;
    hits0 += actual_index(cfg, x0, w(1), w(2)) > thr;
  }
  const double n = static_cast<double>(n_draws);
  return {hits1 / n, hits0 / n};
}

} // namespace

double oracle_asf(const DgpConfig& cfg, double x, long long n_draws, std::uint64_t seed)
{
  return simulate_take_up(cfg, x, x, n_draws, seed).first;
}

double oracle_treatment_effect(const DgpConfig& cfg, double x1, double x0, long long n_draws,
                               std::uint64_t seed)
{
  const auto [m1, m0] = simulate_take_up(cfg, x1, x0, n_draws, seed);
  return m1 - m0;
}

double oracle_stated_te(const DgpConfig& cfg, double x1, double x0, long long n_draws,
                        std::uint64_t seed)
{
  validate(cfg);
  if (n_draws < 1)
    throw ArgumentError("n_draws must be >= 1");
  if (x1 == x0)
    return 0.0;
  Rng rng(seed);
  LatentSampler sampler(cfg);
  double sum = 0.0;
  for (long long i = 0; i < n_draws; ++i) {
    const Eigen::Vector4d w = sampler(rng);
    sum += stated_demand(cfg, x1, w(1), w(2)) - stated_demand(cfg, x0, w(1), w(2));
  }
  return sum / static_cast<double>(n_draws);
}

double oracle_msb(const DgpConfig& cfg, double x, long long n_draws, std::uint64_t seed)
{
  validate(cfg);
  if (n_draws < 1)
    throw ArgumentError("n_draws must be >= 1");
  Rng rng(seed);
  LatentSampler sampler(cfg);
  double sum = 0.0;
  for (long long i = 0; i < n_draws; ++i) {
    const Eigen::Vector4d w = sampler(rng);
    const double gap = actual_demand(cfg, x, w(1), w(2)) - stated_demand(cfg, x, w(1), w(2));
    sum += gap * gap;
  }
  return sum / static_cast<double>(n_draws);
}

DgpConfig restrict_to_one_dimension(DgpConfig cfg)
{
  cfg.cov.row(2).setZero();
  cfg.cov.col(2).setZero();
  cfg.actual_eta2_coef = 0.0;
  cfg.stated_eta2_coef = 0.0;
  return cfg;
}

} // namespace statedpref
