#pragma once

#include "statedpref/firststep.hpp"
#include "statedpref/panel.hpp"

#include <Eigen/Dense>

#include <map>
#include <span>
#include <vector>

namespace statedpref {

struct ModelSpec
{
  //! Group-specific slopes on x. When false the groups share one slope and
  //! only intercepts are group-specific.
  bool per_group_slope = true;
  double tol_grad = 1e-8; //!< on the score norm divided by the number of observations
  int max_iter = 100;
  //! Parameter-norm bound beyond which a fit is declared separated.
  double separation_bound = 50.0;
};

void validate(const ModelSpec& spec);

using DesignRef = Eigen::Ref<const Eigen::MatrixXd>;
using ChoiceRef = Eigen::Ref<const Eigen::VectorXi>;
using ParamRef = Eigen::Ref<const Eigen::VectorXd>;

//! sum_i ln Pr(d_i | z_i) with Pr(d = 1 | z) = Phi(z' theta).
double probit_loglik(const DesignRef& design, const ChoiceRef& d, const ParamRef& theta);
Eigen::VectorXd probit_score(const DesignRef& design, const ChoiceRef& d, const ParamRef& theta);
Eigen::MatrixXd probit_hessian(const DesignRef& design, const ChoiceRef& d, const ParamRef& theta);

struct ProbitSolution
{
  Eigen::VectorXd theta;
  double loglik = 0.0;
  bool converged = false;
  bool separated = false;
  int iterations = 0;
  double grad_norm = 0.0;
  std::vector<double> loglik_trace;        //!< at the start and after each accepted step
  std::vector<Eigen::VectorXd> theta_trace; //!< matching iterates
};

//! Newton-Raphson with analytic score/Hessian and step halving. Starting at
//! zero; stops when the score norm reaches tol_grad * n or the parameter norm
//! exceeds the separation bound. Separated fits (bound exceeded, or every
//! observation classified correctly) are rescaled onto the bound.
ProbitSolution fit_probit(const DesignRef& design, const ChoiceRef& d, const ModelSpec& spec);

struct GroupParams
{
  double alpha = 0.0;
  double beta = 0.0;
  int n_obs = 0;
  int n_ones = 0;
  bool converged = false;
  bool separated = false;
  int iterations = 0;
  double grad_norm = 0.0;
  double loglik = 0.0;
};

struct GroupedProbitFit
{
  std::map<int, GroupParams> params;
  double loglik = 0.0;
  bool converged = true; //!< every non-separated group converged
  int iterations = 0;    //!< max over groups (or the joint fit)
  double grad_norm = 0.0;
  int n_unlabeled = 0;   //!< actual records whose person has no group label

  int n_separated() const;
};

//! Probit of d on x with group-specific intercepts (and slopes when
//! spec.per_group_slope). Groups without observations are absent from params.
GroupedProbitFit fit_grouped_probit(std::span<const ActualRecord> actual, const Grouping& grouping,
                                    const ModelSpec& spec = {});

//! Phi(alpha_g + beta_g x). Throws ArgumentError for unknown groups.
double predict_choice_prob(const GroupedProbitFit& fit, double x, int group);

//! Single probit of d on (1, x) without group controls.
ProbitSolution fit_pooled_probit(std::span<const ActualRecord> actual, const ModelSpec& spec = {});

} // namespace statedpref
