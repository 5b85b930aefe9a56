#include "statedpref/errors.hpp"
#include "statedpref/normal.hpp"
#include "statedpref/secondstep.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace statedpref {

void validate(const ModelSpec& spec)
{
  if (!(spec.tol_grad > 0.0))
    throw ConfigError("tol_grad must be > 0");
  if (spec.max_iter < 1)
    throw ConfigError("max_iter must be >= 1");
  if (!(spec.separation_bound > 0.0))
    throw ConfigError("separation_bound must be > 0");
}

double probit_loglik(const DesignRef& design, const ChoiceRef& d, const ParamRef& theta)
{
  const Eigen::VectorXd index = design * theta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < index.size(); ++i)
    ll += log_normal_cdf(d(i) == 1 ? index(i) : -index(i));
  return ll;
}

Eigen::VectorXd probit_score(const DesignRef& design, const ChoiceRef& d, const ParamRef& theta)
{
  const Eigen::VectorXd index = design * theta;
  Eigen::VectorXd weights(index.size());
  for (Eigen::Index i = 0; i < index.size(); ++i) {
    const double s = d(i) == 1 ? 1.0 : -1.0;
    weights(i) = s * inverse_mills(s * index(i));
  }
  return design.transpose() * weights;
}

Eigen::MatrixXd probit_hessian(const DesignRef& design, const ChoiceRef& d, const ParamRef& theta)
{
  const Eigen::VectorXd index = design * theta;
  Eigen::VectorXd curvature(index.size());
  for (Eigen::Index i = 0; i < index.size(); ++i) {
    const double q = (d(i) == 1 ? 1.0 : -1.0) * index(i);
    const double lambda = inverse_mills(q);
    curvature(i) = lambda * (lambda + q);
  }
  return -(design.transpose() * curvature.asDiagonal() * design);
}

namespace {

bool completely_separated(const DesignRef& design, const ChoiceRef& d, const ParamRef& theta)
{
  const Eigen::VectorXd index = design * theta;
  for (Eigen::Index i = 0; i < index.size(); ++i)
    if ((d(i) == 1 ? index(i) : -index(i)) <= 0.0)
      return false;
  return true;
}

} // namespace

ProbitSolution fit_probit(const DesignRef& design, const ChoiceRef& d, const ModelSpec& spec)
{
  validate(spec);
  if (design.rows() != d.size())
    throw ArgumentError("design and choice vectors differ in length");

  ProbitSolution sol;
  sol.theta = Eigen::VectorXd::Zero(design.cols());
  sol.loglik = probit_loglik(design, d, sol.theta);
  sol.loglik_trace.push_back(sol.loglik);
  sol.theta_trace.push_back(sol.theta);

  const double tol = spec.tol_grad * std::max<double>(1.0, static_cast<double>(design.rows()));
  for (int iter = 0; iter < spec.max_iter; ++iter) {
    const Eigen::VectorXd g = probit_score(design, d, sol.theta);
    sol.grad_norm = g.norm();
    if (sol.grad_norm <= tol)
      break;
    sol.iterations = iter + 1;

    const Eigen::MatrixXd neg_h = -probit_hessian(design, d, sol.theta);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(neg_h);
    Eigen::VectorXd step = ldlt.solve(g);
    if (ldlt.info() != Eigen::Success || !step.allFinite() || g.dot(step) <= 0.0)
      step = g / std::max(1.0, g.norm());

    bool accepted = false;
    double scale = 1.0;
    for (int halving = 0; halving < 60; ++halving, scale *= 0.5) {
      const Eigen::VectorXd trial = sol.theta + scale * step;
      const double ll = probit_loglik(design, d, trial);
      if (ll >= sol.loglik) {
        sol.theta = trial;
        sol.loglik = ll;
        accepted = true;
        break;
      }
    }
    if (!accepted)
      break;
    sol.loglik_trace.push_back(sol.loglik);
    sol.theta_trace.push_back(sol.theta);

    if (sol.theta.norm() > spec.separation_bound) {
      sol.theta *= spec.separation_bound / sol.theta.norm();
      sol.loglik = probit_loglik(design, d, sol.theta);
      sol.separated = true;
      break;
    }
  }
  // An index that classifies every observation correctly means complete
  // separation: the likelihood has no finite maximiser.
  if (!sol.separated && completely_separated(design, d, sol.theta)) {
    const double norm = sol.theta.norm();
    if (norm > 0.0)
      sol.theta *= spec.separation_bound / norm;
    sol.loglik = probit_loglik(design, d, sol.theta);
    sol.separated = true;
  }
  sol.grad_norm = probit_score(design, d, sol.theta).norm();
  sol.converged = !sol.separated && sol.grad_norm <= tol;
  return sol;
}

int GroupedProbitFit::n_separated() const
{
  int n = 0;
  for (const auto& [g, p] : params)
    n += p.separated;
  return n;
}

namespace {

struct GroupData
{
  std::vector<double> x;
  std::vector<int> d;
};

// All-ones / all-zeros groups have no interior maximum: clamp the intercept.
GroupParams degenerate_group(const GroupData& data, const ModelSpec& spec)
{
  GroupParams p;
  p.n_obs = static_cast<int>(data.d.size());
  p.n_ones = static_cast<int>(std::count(data.d.begin(), data.d.end(), 1));
  p.alpha = p.n_ones == p.n_obs ? spec.separation_bound : -spec.separation_bound;
  p.separated = true;

  const auto n = static_cast<Eigen::Index>(data.x.size());
  Eigen::MatrixXd design(n, 2);
  design.col(0).setOnes();
  design.col(1) = Eigen::Map<const Eigen::VectorXd>(data.x.data(), n);
  const Eigen::VectorXi d = Eigen::Map<const Eigen::VectorXi>(data.d.data(), n);
  const Eigen::Vector2d theta(p.alpha, p.beta);
  p.loglik = probit_loglik(design, d, theta);
  p.grad_norm = probit_score(design, d, theta).norm();
  return p;
}

bool is_degenerate(const GroupData& data)
{
  const auto ones = std::count(data.d.begin(), data.d.end(), 1);
  return ones == 0 || ones == static_cast<long>(data.d.size());
}

} // namespace

GroupedProbitFit fit_grouped_probit(std::span<const ActualRecord> actual, const Grouping& grouping,
                                    const ModelSpec& spec)
{
  validate(spec);
  GroupedProbitFit fit;
  std::map<int, GroupData> groups;
  for (const auto& rec : actual) {
    if (rec.d != 0 && rec.d != 1)
      throw ValidationError("actual choice d must be 0 or 1 (person " +
                            std::to_string(rec.person_id) + ")");
    const auto it = grouping.labels.find(rec.person_id);
    if (it == grouping.labels.end()) {
      ++fit.n_unlabeled;
      continue;
    }
    groups[it->second].x.push_back(rec.x);
    groups[it->second].d.push_back(rec.d);
  }
  if (groups.empty())
    throw EstimationError("no actual records carry a group label");

  if (spec.per_group_slope) {
    for (const auto& [g, data] : groups) {
      if (is_degenerate(data)) {
        fit.params[g] = degenerate_group(data, spec);
        fit.loglik += fit.params[g].loglik;
        continue;
      }
      const auto n = static_cast<Eigen::Index>(data.x.size());
      Eigen::MatrixXd design(n, 2);
      design.col(0).setOnes();
      design.col(1) = Eigen::Map<const Eigen::VectorXd>(data.x.data(), n);
      const Eigen::VectorXi d = Eigen::Map<const Eigen::VectorXi>(data.d.data(), n);
      const ProbitSolution sol = fit_probit(design, d, spec);

      GroupParams p;
      p.alpha = sol.theta(0);
      p.beta = sol.theta(1);
      p.n_obs = static_cast<int>(n);
      p.n_ones = static_cast<int>(d.sum());
      p.converged = sol.converged;
      p.separated = sol.separated;
      p.iterations = sol.iterations;
      p.grad_norm = sol.grad_norm;
      p.loglik = sol.loglik;
      fit.params[g] = p;
      fit.loglik += p.loglik;
      fit.iterations = std::max(fit.iterations, p.iterations);
      if (!p.separated) {
        fit.grad_norm = std::max(fit.grad_norm, p.grad_norm);
        fit.converged = fit.converged && p.converged;
      }
    }
    return fit;
  }

  // Shared slope: one joint problem over the non-degenerate groups.
  std::vector<int> joint_groups;
  Eigen::Index n_joint = 0;
  for (const auto& [g, data] : groups) {
    if (is_degenerate(data)) {
      fit.params[g] = degenerate_group(data, spec);
      fit.loglik += fit.params[g].loglik;
    } else {
      joint_groups.push_back(g);
      n_joint += static_cast<Eigen::Index>(data.x.size());
    }
  }
  if (joint_groups.empty())
    return fit;

  const auto n_groups = static_cast<Eigen::Index>(joint_groups.size());
  Eigen::MatrixXd design = Eigen::MatrixXd::Zero(n_joint, n_groups + 1);
  Eigen::VectorXi d(n_joint);
  Eigen::Index row = 0;
  for (Eigen::Index j = 0; j < n_groups; ++j) {
    const auto& data = groups.at(joint_groups[static_cast<std::size_t>(j)]);
    for (std::size_t i = 0; i < data.x.size(); ++i, ++row) {
      design(row, j) = 1.0;
      design(row, n_groups) = data.x[i];
      d(row) = data.d[i];
    }
  }
  ModelSpec joint_spec = spec;
  joint_spec.separation_bound = spec.separation_bound * std::sqrt(double(n_groups + 1));
  const ProbitSolution sol = fit_probit(design, d, joint_spec);

  for (Eigen::Index j = 0; j < n_groups; ++j) {
    const int g = joint_groups[static_cast<std::size_t>(j)];
    const auto& data = groups.at(g);
    GroupParams p;
    p.alpha = sol.theta(j);
    p.beta = sol.theta(n_groups);
    p.n_obs = static_cast<int>(data.x.size());
    p.n_ones = static_cast<int>(std::count(data.d.begin(), data.d.end(), 1));
    p.converged = sol.converged;
    p.separated = sol.separated;
    p.iterations = sol.iterations;
    p.grad_norm = sol.grad_norm;
    fit.params[g] = p;
  }
  fit.loglik += sol.loglik;
  fit.iterations = sol.iterations;
  fit.grad_norm = sol.grad_norm;
  fit.converged = sol.converged;
  return fit;
}

double predict_choice_prob(const GroupedProbitFit& fit, double x, int group)
{
  const auto it = fit.params.find(group);
  if (it == fit.params.end())
    throw ArgumentError("unknown group " + std::to_string(group));
  return normal_cdf(it->second.alpha + it->second.beta * x);
}

ProbitSolution fit_pooled_probit(std::span<const ActualRecord> actual, const ModelSpec& spec)
{
  const auto n = static_cast<Eigen::Index>(actual.size());
  if (n == 0)
    throw EstimationError("no actual records");
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXi d(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& rec = actual[static_cast<std::size_t>(i)];
    if (rec.d != 0 && rec.d != 1)
      throw ValidationError("actual choice d must be 0 or 1");
    design(i, 0) = 1.0;
    design(i, 1) = rec.x;
    d(i) = rec.d;
  }
  return fit_probit(design, d, spec);
}

} // namespace statedpref
