#include "statedpref/estimands.hpp"

#include "statedpref/errors.hpp"
#include "statedpref/normal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace statedpref {

namespace {

double gaussian_weight(double x, double at, double bandwidth)
{
  if (std::isinf(bandwidth))
    return 1.0;
  const double u = (x - at) / bandwidth;
  return std::exp(-0.5 * u * u);
}

bool within_window(double x, double at, double bandwidth)
{
  return std::isinf(bandwidth) || std::abs(x - at) <= 3.0 * bandwidth;
}

double quantile_sorted(const std::vector<double>& sorted, double tau)
{
  const double pos = tau * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

void require_bandwidth(double bandwidth)
{
  if (!(bandwidth > 0.0))
    throw ArgumentError("bandwidth must be > 0");
}

} // namespace

double silverman_bandwidth(std::span<const double> x)
{
  if (x.size() < 2)
    throw ArgumentError("bandwidth rule needs at least two observations");
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  const double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : sorted)
    ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  double scale = std::min(sd, iqr / 1.34);
  if (!(scale > 0.0))
    scale = sd;
  if (!(scale > 0.0))
    throw EstimationError("bandwidth rule: attribute has no spread");
  return 0.9 * scale * std::pow(n, -0.2);
}

double scenario0_bandwidth(const PseudoPanel& panel)
{
  std::vector<double> x0;
  for (const auto& r : panel.stated)
    if (r.scenario_id == 0)
      x0.push_back(r.x);
  return silverman_bandwidth(x0);
}

double average_structural_function(const GroupedProbitFit& fit, const Grouping& grouping, double x)
{
  if (grouping.labels.empty())
    throw ArgumentError("empty grouping");
  const auto shares = grouping.shares();
  double asf = 0.0;
  for (std::size_t k = 0; k < shares.size(); ++k) {
    if (shares[k] == 0.0)
      continue;
    const int group = static_cast<int>(k) + 1;
    if (!fit.params.contains(group))
      throw EstimationError("group " + std::to_string(group) + " has no fitted parameters");
    asf += shares[k] * predict_choice_prob(fit, x, group);
  }
  return asf;
}

double treatment_effect(const GroupedProbitFit& fit, const Grouping& grouping, double x1, double x0)
{
  if (x1 == x0)
    return 0.0;
  return average_structural_function(fit, grouping, x1) -
         average_structural_function(fit, grouping, x0);
}

std::map<int, KernelValue> stated_demand_by_group(const PseudoPanel& panel, const Grouping& grouping,
                                                  double x, double bandwidth)
{
  require_bandwidth(bandwidth);
  std::map<int, std::pair<double, double>> acc; // weighted sum, weight
  std::set<int> covered;
  for (const auto& r : panel.stated) {
    if (r.scenario_id != 0)
      continue;
    const auto it = grouping.labels.find(r.person_id);
    if (it == grouping.labels.end())
      continue;
    if (!within_window(r.x, x, bandwidth))
      continue;
    const double w = gaussian_weight(r.x, x, bandwidth);
    acc[it->second].first += w * r.p_star;
    acc[it->second].second += w;
    covered.insert(it->second);
  }
  std::map<int, KernelValue> out;
  for (int g = 1; g <= grouping.k; ++g) {
    KernelValue v;
    const auto it = acc.find(g);
    if (it != acc.end() && it->second.second > 0.0) {
      v.value = std::clamp(it->second.first / it->second.second, 0.0, 1.0);
      v.missing = false;
    }
    out[g] = v;
  }
  return out;
}

std::vector<MsbPoint> msb(const GroupedProbitFit& fit, const PseudoPanel& panel,
                          const Grouping& grouping, std::span<const double> x_grid,
                          double bandwidth)
{
  require_bandwidth(bandwidth);
  std::vector<MsbPoint> out;
  for (double x : x_grid) {
    const auto stated = stated_demand_by_group(panel, grouping, x, bandwidth);

    std::map<int, double> weight;
    for (const auto& r : panel.stated) {
      if (r.scenario_id != 0)
        continue;
      const auto it = grouping.labels.find(r.person_id);
      if (it != grouping.labels.end())
        weight[it->second] += gaussian_weight(r.x, x, bandwidth);
    }

    MsbPoint point;
    point.x = x;
    double total = 0.0;
    double acc = 0.0;
    for (const auto& [g, w] : weight) {
      const auto& s = stated.at(g);
      if (s.missing || !fit.params.contains(g)) {
        point.coverage_warning = point.coverage_warning || w > 0.0;
        continue;
      }
      const double gap = predict_choice_prob(fit, x, g) - s.value;
      acc += w * gap * gap;
      total += w;
    }
    if (total > 0.0) {
      point.value = acc / total;
    } else {
      point.missing = true;
      point.value = std::numeric_limits<double>::quiet_NaN();
    }
    out.push_back(point);
  }
  return out;
}

CounterfactualResult counterfactual_distribution(std::span<const ActualRecord> actual,
                                                 const Grouping& grouping,
                                                 const std::map<PersonId, int>& membership,
                                                 int source, int target, const ModelSpec& spec)
{
  std::vector<ActualRecord> source_records;
  for (const auto& rec : actual) {
    const auto it = membership.find(rec.person_id);
    if (it != membership.end() && it->second == source)
      source_records.push_back(rec);
  }

  CounterfactualResult out;
  GroupedProbitFit source_fit;
  bool have_fit = false;
  try {
    source_fit = fit_grouped_probit(source_records, grouping, spec);
    have_fit = true;
  } catch (const EstimationError&) {
  }

  std::set<int> uncovered;
  double sum = 0.0;
  int n_covered = 0;
  for (const auto& rec : actual) {
    const auto m = membership.find(rec.person_id);
    if (m == membership.end() || m->second != target)
      continue;
    const auto g = grouping.labels.find(rec.person_id);
    if (g == grouping.labels.end())
      continue;
    ++out.n_target;
    if (!have_fit || !source_fit.params.contains(g->second)) {
      uncovered.insert(g->second);
      ++out.n_uncovered;
      continue;
    }
    sum += predict_choice_prob(source_fit, rec.x, g->second);
    ++n_covered;
  }
  out.uncovered_groups.assign(uncovered.begin(), uncovered.end());
  if (n_covered == 0) {
    out.missing = true;
    out.value = std::numeric_limits<double>::quiet_NaN();
  } else {
    out.value = sum / n_covered;
  }
  return out;
}

NaiveTe naive_te(std::span<const ActualRecord> actual, double x1, double x0, const ModelSpec& spec)
{
  std::set<double> distinct;
  for (const auto& rec : actual)
    distinct.insert(rec.x);
  if (distinct.size() < 2)
    throw ArgumentError("naive_te needs at least two distinct x values");
  const ProbitSolution sol = fit_pooled_probit(actual, spec);
  NaiveTe out;
  out.separated = sol.separated;
  out.converged = sol.converged;
  out.value = x1 == x0 ? 0.0
                       : normal_cdf(sol.theta(0) + sol.theta(1) * x1) -
                           normal_cdf(sol.theta(0) + sol.theta(1) * x0);
  return out;
}

namespace {

struct StatedMean
{
  double value = 0.0;
  bool missing = false;
  bool off_grid = false;
};

StatedMean cell_mean(const std::map<double, std::pair<double, int>>& cells, double x)
{
  StatedMean out;
  if (cells.empty()) {
    out.missing = true;
    return out;
  }
  double best = std::numeric_limits<double>::infinity();
  for (const auto& [cx, acc] : cells)
    best = std::min(best, std::abs(cx - x));
  const double tie_tol = 1e-9 * std::max(1.0, std::abs(x));
  double sum = 0.0;
  int n = 0;
  for (const auto& [cx, acc] : cells) {
    if (std::abs(cx - x) <= best + tie_tol) {
      sum += acc.first / acc.second;
      ++n;
    }
  }
  out.value = sum / n;
  out.off_grid = best > tie_tol;
  return out;
}

StatedMean kernel_mean(const PseudoPanel& panel, double x, double bandwidth)
{
  StatedMean out;
  double acc = 0.0;
  double total = 0.0;
  for (const auto& r : panel.stated) {
    if (r.scenario_id < 1 || !within_window(r.x, x, bandwidth))
      continue;
    const double w = gaussian_weight(r.x, x, bandwidth);
    acc += w * r.p_star;
    total += w;
  }
  if (total > 0.0)
    out.value = acc / total;
  else
    out.missing = true;
  return out;
}

} // namespace

StatedTe stated_te(const PseudoPanel& panel, double x1, double x0, std::optional<double> bandwidth)
{
  StatedMean m1;
  StatedMean m0;
  if (bandwidth) {
    require_bandwidth(*bandwidth);
    m1 = kernel_mean(panel, x1, *bandwidth);
    m0 = kernel_mean(panel, x0, *bandwidth);
  } else {
    std::map<double, std::pair<double, int>> cells;
    for (const auto& r : panel.stated) {
      if (r.scenario_id < 1)
        continue;
      auto& c = cells[r.x];
      c.first += r.p_star;
      ++c.second;
    }
    m1 = cell_mean(cells, x1);
    m0 = cell_mean(cells, x0);
  }
  StatedTe out;
  out.missing = m1.missing || m0.missing;
  out.off_grid = m1.off_grid || m0.off_grid;
  if (out.missing)
    out.value = std::numeric_limits<double>::quiet_NaN();
  else
    out.value = x1 == x0 ? 0.0 : m1.value - m0.value;
  return out;
}

std::vector<EstimandRow> EstimandReport::rows() const
{
  std::vector<EstimandRow> out;
  for (const auto& [x, v] : asf)
    out.push_back({"asf", x, "", v, ""});
  if (asf.size() >= 2)
    out.push_back({"te", 0.0, "", te, ""});
  for (const auto& p : msb)
    out.push_back({"msb", p.x, "", p.value,
                   p.missing ? "missing" : (p.coverage_warning ? "coverage" : "")});
  for (const auto& [pair, cf] : counterfactuals) {
    std::string flag = cf.missing ? "missing" : (cf.n_uncovered > 0 ? "uncovered" : "");
    out.push_back({"counterfactual", 0.0,
                   std::to_string(pair.first) + ":" + std::to_string(pair.second), cf.value,
                   flag});
  }
  out.push_back({"naive_te", 0.0, "", naive.value,
                 naive.separated ? "separated" : (naive.converged ? "" : "not_converged")});
  out.push_back({"stated_te", 0.0, "", stated.value,
                 stated.missing ? "missing" : (stated.off_grid ? "off_grid" : "")});
  return out;
}

EstimandReport compute_estimands(const PseudoPanel& panel, const Grouping& grouping,
                                 const GroupedProbitFit& fit,
                                 const std::map<PersonId, int>* membership,
                                 const EstimandSettings& settings)
{
  EstimandReport report;
  report.group_weights = grouping.shares();
  report.bandwidth = settings.bandwidth ? *settings.bandwidth : scenario0_bandwidth(panel);

  report.asf[settings.x0] = average_structural_function(fit, grouping, settings.x0);
  report.asf[settings.x1] = average_structural_function(fit, grouping, settings.x1);
  report.te = treatment_effect(fit, grouping, settings.x1, settings.x0);
  report.msb = msb(fit, panel, grouping, settings.msb_grid, report.bandwidth);

  std::map<PersonId, int> pooled;
  if (membership == nullptr) {
    for (const auto& rec : panel.actual)
      pooled[rec.person_id] = 1;
    membership = &pooled;
  }
  std::set<int> labels;
  for (const auto& [id, label] : *membership)
    labels.insert(label);
  for (int j : labels)
    for (int k : labels)
      report.counterfactuals[{j, k}] =
        counterfactual_distribution(panel.actual, grouping, *membership, j, k, settings.spec);

  report.naive = naive_te(panel.actual, settings.x1, settings.x0, settings.spec);
  report.stated = stated_te(panel, settings.x1, settings.x0, settings.stated_te_bandwidth);
  return report;
}

} // namespace statedpref
