#pragma once

#include "statedpref/link.hpp"
#include "statedpref/panel.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <span>
#include <vector>

namespace statedpref {

//! First-step moments of one person: the fitted conditional mean of
//! link(p_star) given x, evaluated at the evaluation points.
struct IndividualMoments
{
  PersonId person_id = 0;
  Eigen::VectorXd h;
  bool fit_ok = false;
  //! Sum over evaluation points of the estimated sampling variance of h_j.
  //! NaN when the fit has no residual degrees of freedom.
  double noise_var = 0.0;
};

struct MomentSet
{
  std::vector<IndividualMoments> persons; //!< sorted by person id
  Eigen::VectorXd eval_points;
  int n_excluded = 0;

  //! Moment vectors of usable persons, one row each, in person-id order.
  Eigen::MatrixXd usable_matrix() const;
  std::vector<PersonId> usable_ids() const;
};

//! Per-person OLS of link(p_star) on (1, x) over scenarios t >= 1, evaluated
//! at `eval_points`. Persons with fewer than two distinct x values get
//! fit_ok = false. Throws EstimationError when nobody is usable.
MomentSet estimate_individual_moments(const PseudoPanel& panel, std::span<const double> eval_points,
                                      const LinkFunction& lf = {});

//! k-means partition of individuals; labels run 1..k.
struct Grouping
{
  std::map<PersonId, int> labels;
  Eigen::MatrixXd centroids; //!< k x d_m, row g-1 is group g
  double objective = 0.0;
  int k = 0;

  //! Share of labelled persons in each group, index g-1.
  std::vector<double> shares() const;
  std::vector<int> sizes() const;
};

Grouping kmeans_partition(const MomentSet& moments, int k, int restarts, std::uint64_t seed);

struct KSelection
{
  int k = 0;
  bool threshold_met = false; //!< false: no K qualified, k_max returned
  double noise_var = 0.0;     //!< average moment-noise variance across persons
  std::vector<double> avg_within_ss; //!< objective / N for k_min..k (as evaluated)
  Grouping grouping;                 //!< partition at the selected K
};

//! Smallest K in [k_min, k_max] whose per-person within-group sum of squares
//! is at most gamma times the estimated moment-noise variance.
KSelection select_k(const MomentSet& moments, int k_min, int k_max, double gamma, int restarts,
                    std::uint64_t seed);

} // namespace statedpref
