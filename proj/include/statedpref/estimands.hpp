#pragma once

#include "statedpref/firststep.hpp"
#include "statedpref/panel.hpp"
#include "statedpref/secondstep.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace statedpref {

//! Kernel estimate that may lack support at the requested point.
struct KernelValue
{
  double value = 0.0;
  bool missing = true;
};

//! 0.9 * min(sd, IQR / 1.34) * n^(-1/5).
double silverman_bandwidth(std::span<const double> x);

//! Silverman's rule applied to the scenario-0 attribute values.
double scenario0_bandwidth(const PseudoPanel& panel);

//! sum_k p_k Phi(alpha_k + beta_k x), p_k the group shares.
double average_structural_function(const GroupedProbitFit& fit, const Grouping& grouping, double x);

double treatment_effect(const GroupedProbitFit& fit, const Grouping& grouping, double x1, double x0);

//! Nadaraya-Watson (Gaussian kernel) estimate of E[p_star | X_0 ~ x, group]
//! from scenario-0 records. A group is missing when none of its members has
//! a scenario-0 attribute within three bandwidths of x.
std::map<int, KernelValue> stated_demand_by_group(const PseudoPanel& panel, const Grouping& grouping,
                                                  double x, double bandwidth);

struct MsbPoint
{
  double x = 0.0;
  double value = 0.0;
  bool missing = false;
  bool coverage_warning = false; //!< some groups dropped and weights renormalised
};

//! Mean-squared gap between fitted actual demand and stated demand, averaged
//! over groups with kernel weights conditional on X_0 ~ x.
std::vector<MsbPoint> msb(const GroupedProbitFit& fit, const PseudoPanel& panel,
                          const Grouping& grouping, std::span<const double> x_grid,
                          double bandwidth);

struct CounterfactualResult
{
  double value = 0.0;
  bool missing = false;
  int n_target = 0;                 //!< target members with a group label
  int n_uncovered = 0;              //!< target members in groups the source lacks
  std::vector<int> uncovered_groups;
};

//! Demand of the `source` population evaluated at the `target` population's
//! empirical (X, group) distribution. The probit is refitted on source
//! members only; groups are the pooled estimates.
CounterfactualResult counterfactual_distribution(std::span<const ActualRecord> actual,
                                                 const Grouping& grouping,
                                                 const std::map<PersonId, int>& membership,
                                                 int source, int target,
                                                 const ModelSpec& spec = {});

struct NaiveTe
{
  double value = 0.0;
  bool separated = false;
  bool converged = false;
};

//! Pooled probit of d on (1, x): Phi(a + b x1) - Phi(a + b x0).
NaiveTe naive_te(std::span<const ActualRecord> actual, double x1, double x0,
                 const ModelSpec& spec = {});

struct StatedTe
{
  double value = 0.0;
  bool missing = false;
  bool off_grid = false; //!< an x was not a support point; nearest cells used
};

//! E[p_star | X_t ~ x1] - E[p_star | X_t ~ x0] pooled over scenarios t >= 1.
//! Without a bandwidth, exact cell means on the attribute support (ties
//! between equally near cells are averaged); with one, a Gaussian kernel.
StatedTe stated_te(const PseudoPanel& panel, double x1, double x0,
                   std::optional<double> bandwidth = std::nullopt);

struct EstimandRow
{
  std::string quantity;
  double x = 0.0;
  std::string group_pair;
  double value = 0.0;
  std::string flag;
};

struct EstimandSettings
{
  double x1 = 1.0;
  double x0 = 0.0;
  std::vector<double> msb_grid = {-1.0, 0.0, 1.0};
  std::optional<double> bandwidth; //!< default: Silverman on scenario-0 x
  std::optional<double> stated_te_bandwidth;
  ModelSpec spec;
};

//! All estimands as flat rows (asf, te, msb, counterfactual, naive_te, stated_te).
struct EstimandReport
{
  std::map<double, double> asf;
  double te = 0.0;
  std::vector<MsbPoint> msb;
  std::map<std::pair<int, int>, CounterfactualResult> counterfactuals;
  NaiveTe naive;
  StatedTe stated;
  std::vector<double> group_weights;
  double bandwidth = 0.0;

  std::vector<EstimandRow> rows() const;
};

EstimandReport compute_estimands(const PseudoPanel& panel, const Grouping& grouping,
                                 const GroupedProbitFit& fit,
                                 const std::map<PersonId, int>* membership,
                                 const EstimandSettings& settings);

} // namespace statedpref
