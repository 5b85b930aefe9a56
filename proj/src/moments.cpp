#include "statedpref/errors.hpp"
#include "statedpref/firststep.hpp"
#include "statedpref/kmeans.hpp"
#include "statedpref/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace statedpref {

Eigen::MatrixXd MomentSet::usable_matrix() const
{
  const auto usable = std::count_if(persons.begin(), persons.end(),
                                    [](const auto& p) { return p.fit_ok; });
  Eigen::MatrixXd out(usable, eval_points.size());
  Eigen::Index row = 0;
  for (const auto& p : persons)
    if (p.fit_ok)
      out.row(row++) = p.h.transpose();
  return out;
}

std::vector<PersonId> MomentSet::usable_ids() const
{
  std::vector<PersonId> ids;
  for (const auto& p : persons)
    if (p.fit_ok)
      ids.push_back(p.person_id);
  return ids;
}

MomentSet estimate_individual_moments(const PseudoPanel& panel, std::span<const double> eval_points,
                                      const LinkFunction& lf)
{
  if (eval_points.empty())
    throw ArgumentError("eval_points must be nonempty");
  validate(lf);

  MomentSet out;
  out.eval_points = Eigen::Map<const Eigen::VectorXd>(eval_points.data(),
                                                      static_cast<Eigen::Index>(eval_points.size()));
  const Eigen::Index dm = out.eval_points.size();

  for (const auto& [id, records] : stated_by_person(panel)) {
    IndividualMoments m;
    m.person_id = id;
    m.h = Eigen::VectorXd::Constant(dm, std::numeric_limits<double>::quiet_NaN());

    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& r : records) {
      if (r.scenario_id < 1)
        continue;
      xs.push_back(r.x);
      ys.push_back(link(r.p_star, lf));
    }
    const auto t = static_cast<double>(xs.size());
    if (xs.size() >= 2) {
      const double x_bar = std::accumulate(xs.begin(), xs.end(), 0.0) / t;
      const double y_bar = std::accumulate(ys.begin(), ys.end(), 0.0) / t;
      double sxx = 0.0;
      double sxy = 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - x_bar) * (xs[i] - x_bar);
        sxy += (xs[i] - x_bar) * (ys[i] - y_bar);
      }
      if (sxx > 1e-12 * std::max(1.0, x_bar * x_bar) * t) {
        const double slope = sxy / sxx;
        double rss = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
          const double e = ys[i] - y_bar - slope * (xs[i] - x_bar);
          rss += e * e;
        }
        const double sigma2 = xs.size() > 2 ? rss / (t - 2.0)
                                            : std::numeric_limits<double>::quiet_NaN();
        m.noise_var = 0.0;
        for (Eigen::Index j = 0; j < dm; ++j) {
          const double dx = out.eval_points(j) - x_bar;
          m.h(j) = y_bar + slope * dx;
          m.noise_var += sigma2 * (1.0 / t + dx * dx / sxx);
        }
        m.fit_ok = m.h.allFinite();
      }
    }
    if (!m.fit_ok)
      ++out.n_excluded;
    out.persons.push_back(std::move(m));
  }

  if (out.persons.size() == static_cast<std::size_t>(out.n_excluded))
    throw EstimationError("no usable individuals");
  return out;
}

std::vector<int> Grouping::sizes() const
{
  std::vector<int> out(static_cast<std::size_t>(k), 0);
  for (const auto& [id, g] : labels)
    ++out[static_cast<std::size_t>(g - 1)];
  return out;
}

std::vector<double> Grouping::shares() const
{
  const auto counts = sizes();
  std::vector<double> out(counts.size(), 0.0);
  const double total = static_cast<double>(labels.size());
  for (std::size_t g = 0; g < counts.size(); ++g)
    out[g] = counts[g] / total;
  return out;
}

Grouping kmeans_partition(const MomentSet& moments, int k, int restarts, std::uint64_t seed)
{
  const Eigen::MatrixXd points = moments.usable_matrix();
  const auto ids = moments.usable_ids();
  if (k < 1 || k > points.rows())
    throw ArgumentError("k = " + std::to_string(k) + " must lie in [1, " +
                        std::to_string(points.rows()) + "] (usable individuals)");
  const KMeansResult fit = kmeans(points, {.k = k, .restarts = restarts, .seed = seed});

  Grouping g;
  g.k = k;
  g.centroids = fit.centroids;
  g.objective = fit.objective;
  for (std::size_t i = 0; i < ids.size(); ++i)
    g.labels[ids[i]] = fit.labels[i] + 1;
  return g;
}

KSelection select_k(const MomentSet& moments, int k_min, int k_max, double gamma, int restarts,
                    std::uint64_t seed)
{
  if (k_min < 1 || k_min > k_max)
    throw ArgumentError("need 1 <= k_min <= k_max");
  if (std::isnan(gamma) || gamma < 0.0)
    throw ArgumentError("gamma must be >= 0");

  const auto ids = moments.usable_ids();
  const int n_usable = static_cast<int>(ids.size());
  KSelection sel;

  double noise_sum = 0.0;
  int noise_n = 0;
  for (const auto& p : moments.persons)
    if (p.fit_ok && std::isfinite(p.noise_var)) {
      noise_sum += p.noise_var;
      ++noise_n;
    }
  sel.noise_var = noise_n > 0 ? noise_sum / noise_n : 0.0;

  const int upper = std::min(k_max, n_usable);
  const int lower = std::min(k_min, upper);
  if (std::isinf(gamma)) {
    sel.k = lower;
    sel.threshold_met = true;
    sel.grouping =
      kmeans_partition(moments, lower, restarts, derive_seed(seed, static_cast<std::uint64_t>(lower)));
    sel.avg_within_ss.push_back(sel.grouping.objective / n_usable);
    return sel;
  }

  // Total sum of squares sets the scale of the round-off allowance.
  const Eigen::MatrixXd points = moments.usable_matrix();
  const double avg_tss =
    (points.rowwise() - points.colwise().mean()).squaredNorm() / std::max(1, n_usable);
  const double threshold = gamma * sel.noise_var + 1e-12 * avg_tss;

  for (int k = lower; k <= upper; ++k) {
    Grouping g = kmeans_partition(moments, k, restarts, derive_seed(seed, static_cast<std::uint64_t>(k)));
    const double avg_wss = g.objective / n_usable;
    sel.avg_within_ss.push_back(avg_wss);
    if (avg_wss <= threshold || k == upper) {
      sel.k = k;
      sel.threshold_met = avg_wss <= threshold;
      sel.grouping = std::move(g);
      break;
    }
  }
  return sel;
}

} // namespace statedpref
