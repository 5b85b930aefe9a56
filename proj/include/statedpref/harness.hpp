#pragma once

#include "statedpref/dgp.hpp"
#include "statedpref/link.hpp"
#include "statedpref/secondstep.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace statedpref {

//! Everything the two-step pipeline needs besides the data.
struct EstimationSettings
{
  std::vector<double> eval_points = {0.0, 1.0};
  std::optional<int> fixed_k; //!< when unset K is selected in [k_min, k_max]
  int k_min = 2;
  int k_max = 20;
  double gamma = 1.0;
  int restarts = 10;
  LinkFunction link;
  ModelSpec spec;
  double x1 = 1.0;
  double x0 = 0.0;
  std::optional<double> stated_bandwidth; //!< unset: exact cell means
};

struct ReplicationResult
{
  std::uint64_t seed = 0;
  double te_tsgfe = 0.0;
  double te_naive = 0.0;
  double te_stated = 0.0;
  int k_used = 0;
  int n_separated_groups = 0;
  int n_excluded_persons = 0;
  bool ok = true;     //!< every estimate finite, no stage error
  std::string error;  //!< first stage error, if any
};

//! simulate -> moments -> K -> k-means -> grouped probit -> TE, naive, stated.
//! Stage errors are recorded, never thrown.
ReplicationResult run_replication(const DgpConfig& cfg, const EstimationSettings& settings,
                                  std::uint64_t seed);

struct Histogram
{
  double lo = 0.0;
  double hi = 0.8;
  std::vector<int> counts;
  int underflow = 0;
  int overflow = 0;

  int total() const;
};

Histogram make_histogram(const std::vector<double>& values, int bins, double lo, double hi);

struct EstimatorSummary
{
  std::string name;
  double mean = 0.0;
  double bias = 0.0; //!< mean - oracle treatment effect
  double rmse = 0.0;
  double sd = 0.0;
  int n = 0;
  Histogram density;
};

struct StudyOptions
{
  int s = 100;
  std::uint64_t master_seed = 1;
  int parallelism = 1;
  int bins = 60;
  double range_lo = 0.0;
  double range_hi = 0.8;
  long long oracle_draws = 2'000'000;
};

struct StudySummary
{
  std::vector<ReplicationResult> replications; //!< in replication-index order
  EstimatorSummary tsgfe;
  EstimatorSummary naive;
  EstimatorSummary stated;
  double oracle_te = 0.0;
  double oracle_stated_te = 0.0;
  int s_completed = 0;
  int s_failed = 0;
  bool failure_warning = false; //!< more than 5% of replications failed
  DgpConfig cfg;
  EstimationSettings settings;
  StudyOptions options;
};

//! Replication seed s is derive_seed(master_seed, s); the summary does not
//! depend on parallelism or completion order.
StudySummary run_study(const DgpConfig& cfg, const EstimationSettings& settings,
                       const StudyOptions& options);

struct DensityTable
{
  std::vector<double> bin_lo;
  std::vector<double> bin_hi;
  std::vector<std::string> estimators;
  std::vector<std::vector<int>> counts; //!< [estimator][bin]
  std::vector<int> underflow;
  std::vector<int> overflow;
};

//! Histograms of the completed replications on a common grid. Throws
//! ArgumentError for an empty summary or fewer than two bins.
DensityTable emit_density(const StudySummary& summary, int bins, std::pair<double, double> range);

} // namespace statedpref
