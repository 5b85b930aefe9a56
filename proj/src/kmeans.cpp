#include "statedpref/kmeans.hpp"

#include "statedpref/errors.hpp"
#include "statedpref/rng.hpp"

#include <limits>
#include <string>

namespace statedpref {

double within_sum_of_squares(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centroids,
                             const std::vector<int>& labels)
{
  double total = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i)
    total += (points.row(i) - centroids.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
  return total;
}

namespace {

Eigen::MatrixXd kmeans_plus_plus(const Eigen::MatrixXd& points, int k, Rng& rng)
{
  const Eigen::Index n = points.rows();
  Eigen::MatrixXd centroids(k, points.cols());
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  centroids.row(0) = points.row(first(rng));

  Eigen::VectorXd d2 = (points.rowwise() - centroids.row(0)).rowwise().squaredNorm();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index pick = n - 1;
    if (total > 0.0) {
      const double target = unif(rng) * total;
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2(i);
        if (acc > target && d2(i) > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = first(rng);
    }
    centroids.row(c) = points.row(pick);
    d2 = d2.cwiseMin((points.rowwise() - centroids.row(c)).rowwise().squaredNorm());
  }
  return centroids;
}

// Returns the objective of the resulting assignment.
double assign(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centroids,
              std::vector<int>& labels)
{
  double total = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int best_c = 0;
    for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
      const double dist = (points.row(i) - centroids.row(c)).squaredNorm();
      if (dist < best) {
        best = dist;
        best_c = static_cast<int>(c);
      }
    }
    labels[static_cast<std::size_t>(i)] = best_c;
    total += best;
  }
  return total;
}

void update(const Eigen::MatrixXd& points, Eigen::MatrixXd& centroids, std::vector<int>& labels)
{
  const Eigen::Index k = centroids.rows();
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
  Eigen::VectorXi counts = Eigen::VectorXi::Zero(k);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const int c = labels[static_cast<std::size_t>(i)];
    sums.row(c) += points.row(i);
    ++counts(c);
  }
  for (Eigen::Index c = 0; c < k; ++c) {
    if (counts(c) > 0) {
      centroids.row(c) = sums.row(c) / counts(c);
      continue;
    }
    // Empty: move to the point farthest from its own centroid and take it over.
    Eigen::Index far = 0;
    double far_d = -1.0;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
      const int own = labels[static_cast<std::size_t>(i)];
      if (counts(own) <= 1)
        continue;
      const double dist = (points.row(i) - centroids.row(own)).squaredNorm();
      if (dist > far_d) {
        far_d = dist;
        far = i;
      }
    }
    if (far_d < 0.0)
      continue;
    const int donor = labels[static_cast<std::size_t>(far)];
    sums.row(donor) -= points.row(far);
    --counts(donor);
    centroids.row(donor) = sums.row(donor) / counts(donor);
    labels[static_cast<std::size_t>(far)] = static_cast<int>(c);
    counts(c) = 1;
    sums.row(c) = points.row(far);
    centroids.row(c) = points.row(far);
  }
}

struct Run
{
  Eigen::MatrixXd centroids;
  std::vector<int> labels;
  double objective = 0.0;
  std::vector<double> trace;
};

Run lloyd(const Eigen::MatrixXd& points, int k, int max_iter, std::uint64_t seed)
{
  Rng rng(seed);
  Run run;
  run.centroids = kmeans_plus_plus(points, k, rng);
  run.labels.assign(static_cast<std::size_t>(points.rows()), 0);
  run.objective = assign(points, run.centroids, run.labels);
  run.trace.push_back(run.objective);
  for (int it = 0; it < max_iter; ++it) {
    const std::vector<int> before = run.labels;
    update(points, run.centroids, run.labels);
    run.objective = assign(points, run.centroids, run.labels);
    run.trace.push_back(run.objective);
    if (run.labels == before)
      break;
  }
  // Final centroids are the means of the final assignment.
  update(points, run.centroids, run.labels);
  run.objective = within_sum_of_squares(points, run.centroids, run.labels);
  run.trace.push_back(run.objective);
  return run;
}

} // namespace

KMeansResult kmeans(const Eigen::MatrixXd& points, const KMeansOptions& options)
{
  if (options.k < 1)
    throw ArgumentError("k must be >= 1");
  if (options.k > points.rows())
    throw ArgumentError("k = " + std::to_string(options.k) + " exceeds the " +
                        std::to_string(points.rows()) + " available points");
  if (options.restarts < 1)
    throw ArgumentError("restarts must be >= 1");

  KMeansResult best;
  best.objective = std::numeric_limits<double>::infinity();
  for (int r = 0; r < options.restarts; ++r) {
    Run run = lloyd(points, options.k, options.max_iter,
                    derive_seed(options.seed, static_cast<std::uint64_t>(r)));
    best.objective_trace.push_back(run.trace);
    if (run.objective < best.objective) {
      best.objective = run.objective;
      best.centroids = std::move(run.centroids);
      best.labels = std::move(run.labels);
      best.best_restart = r;
    }
  }
  return best;
}

} // namespace statedpref
