#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace statedpref {

struct KMeansOptions
{
  int k = 2;
  int restarts = 10;
  int max_iter = 300;
  std::uint64_t seed = 0;
};

struct KMeansResult
{
  Eigen::MatrixXd centroids; //!< k x dim
  std::vector<int> labels;   //!< 0-based cluster per row of the input
  double objective = 0.0;    //!< within-cluster sum of squares
  int best_restart = 0;
  //! Objective after the initial assignment and after every Lloyd iteration,
  //! one vector per restart.
  std::vector<std::vector<double>> objective_trace;
};

//! Lloyd's algorithm from k-means++ seeds, best of `restarts` runs.
//! Rows of `points` are observations. Distance ties go to the lowest
//! centroid index; an empty cluster is re-seeded at the point farthest from
//! its current centroid. Deterministic given (points, options).
KMeansResult kmeans(const Eigen::MatrixXd& points, const KMeansOptions& options);

double within_sum_of_squares(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centroids,
                             const std::vector<int>& labels);

} // namespace statedpref
