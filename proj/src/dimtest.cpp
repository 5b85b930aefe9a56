#include "statedpref/dimtest.hpp"

#include "statedpref/errors.hpp"
#include "statedpref/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace statedpref {

std::string to_string(DimTestVariant v)
{
  return v == DimTestVariant::rank_invariance_ks ? "rank_invariance_ks" : "quantile_spread";
}

namespace {

struct PairObs
{
  double x1 = 0.0;
  double p1 = 0.0;
  double x2 = 0.0;
  double p2 = 0.0;
};

std::vector<PairObs> paired_scenarios(const PseudoPanel& panel, int t1, int t2)
{
  if (t1 < 0 || t2 < 0 || t1 >= panel.t_count || t2 >= panel.t_count)
    throw ArgumentError("scenario ids must lie in 0.." + std::to_string(panel.t_count - 1));
  std::vector<PairObs> out;
  for (const auto& [id, recs] : stated_by_person(panel)) {
    const StatedRecord* a = nullptr;
    const StatedRecord* b = nullptr;
    for (const auto& r : recs) {
      if (r.scenario_id == t1)
        a = &r;
      if (r.scenario_id == t2)
        b = &r;
    }
    if (a != nullptr && b != nullptr)
      out.push_back({a->x, a->p_star, b->x, b->p_star});
  }
  return out;
}

// Stated probabilities closer than this are ties (round-off in the index).
constexpr double tie_tolerance = 1e-12;

// Mid-ranks of `values` scaled into (0,1): (midrank - 0.5) / n.
std::vector<double> scaled_midranks(const std::vector<double>& values)
{
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] - values[order[j]] <= tie_tolerance)
      ++j;
    const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k)
      ranks[order[k]] = (mid - 0.5) / static_cast<double>(n);
    i = j + 1;
  }
  return ranks;
}

// Cell index per observation for a key, cells numbered in key order.
template <typename Key>
std::vector<int> cell_ids(const std::vector<Key>& keys, int& n_cells)
{
  std::map<Key, int> index;
  for (const auto& k : keys)
    index.emplace(k, 0);
  int next = 0;
  for (auto& [k, v] : index)
    v = next++;
  n_cells = next;
  std::vector<int> out;
  out.reserve(keys.size());
  for (const auto& k : keys)
    out.push_back(index.at(k));
  return out;
}

struct ScenarioRanks
{
  std::vector<int> cell;                       //!< per person
  std::vector<double> rank;                    //!< per person
  std::vector<std::vector<double>> sorted_rank; //!< per cell, ascending
};

ScenarioRanks rank_within_cells(const std::vector<double>& x, const std::vector<double>& p)
{
  ScenarioRanks out;
  int n_cells = 0;
  out.cell = cell_ids(x, n_cells);
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(n_cells));
  for (std::size_t i = 0; i < x.size(); ++i)
    members[static_cast<std::size_t>(out.cell[i])].push_back(i);
  out.rank.assign(x.size(), 0.0);
  out.sorted_rank.resize(members.size());
  for (std::size_t c = 0; c < members.size(); ++c) {
    std::vector<double> values;
    for (auto i : members[c])
      values.push_back(p[i]);
    const auto r = scaled_midranks(values);
    for (std::size_t j = 0; j < members[c].size(); ++j)
      out.rank[members[c][j]] = r[j];
    out.sorted_rank[c] = r;
    std::sort(out.sorted_rank[c].begin(), out.sorted_rank[c].end());
  }
  return out;
}

double mean_displacement(const std::vector<double>& a, const std::vector<double>& b)
{
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    sum += std::abs(a[i] - b[i]);
  return sum / static_cast<double>(a.size());
}

void check_resamples(int n, const char* what)
{
  if (n < 1)
    throw ArgumentError(std::string(what) + " must be >= 1");
}

} // namespace

DimTestResult rank_invariance_test(const PseudoPanel& panel, int t1, int t2, int n_perm,
                                   std::uint64_t seed, int min_cell)
{
  check_resamples(n_perm, "n_perm");
  DimTestResult result;
  result.variant = DimTestVariant::rank_invariance_ks;

  std::vector<PairObs> obs = paired_scenarios(panel, t1, t2);
  std::map<double, int> size1;
  std::map<double, int> size2;
  for (const auto& o : obs) {
    ++size1[o.x1];
    ++size2[o.x2];
  }
  int dropped_cells = 0;
  for (const auto* sizes : {&size1, &size2})
    for (const auto& [x, n] : *sizes)
      dropped_cells += n < min_cell;
  if (dropped_cells > 0)
    result.warnings.push_back(std::to_string(dropped_cells) + " cells with fewer than " +
                              std::to_string(min_cell) + " persons excluded");
  std::erase_if(obs, [&](const PairObs& o) {
    return size1[o.x1] < min_cell || size2[o.x2] < min_cell;
  });
  if (obs.empty())
    throw EstimationError("rank invariance test: every cell was excluded");

  std::vector<double> x1, p1, x2, p2;
  for (const auto& o : obs) {
    x1.push_back(o.x1);
    p1.push_back(o.p1);
    x2.push_back(o.x2);
    p2.push_back(o.p2);
  }
  const ScenarioRanks r1 = rank_within_cells(x1, p1);
  const ScenarioRanks r2 = rank_within_cells(x2, p2);
  result.n_effective = static_cast<int>(obs.size());
  result.statistic = mean_displacement(r1.rank, r2.rank);

  // Null draws: a uniformly random latent ordering of persons read through
  // each cell's observed rank profile.
  const std::size_t n = obs.size();
  std::vector<std::size_t> order(n);
  std::vector<double> null1(n), null2(n);
  std::vector<std::size_t> next1(r1.sorted_rank.size()), next2(r2.sorted_rank.size());
  int at_least = 0;
  const double tol = 1e-12 * (1.0 + result.statistic);
  for (int b = 0; b < n_perm; ++b) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(b)));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::fill(next1.begin(), next1.end(), 0);
    std::fill(next2.begin(), next2.end(), 0);
    for (auto i : order) {
      const auto c1 = static_cast<std::size_t>(r1.cell[i]);
      const auto c2 = static_cast<std::size_t>(r2.cell[i]);
      null1[i] = r1.sorted_rank[c1][next1[c1]++];
      null2[i] = r2.sorted_rank[c2][next2[c2]++];
    }
    at_least += mean_displacement(null1, null2) >= result.statistic - tol;
  }
  result.p_value = (1.0 + at_least) / (1.0 + n_perm);
  result.reject_at_05 = result.p_value < 0.05;
  return result;
}

namespace {

// Pool-adjacent-violators fit of y on an already-sorted x; tied x share a value.
std::vector<double> isotonic_fit(const std::vector<double>& x, const std::vector<double>& y)
{
  struct Block
  {
    double sum;
    double weight;
    std::size_t count;
  };
  std::vector<Block> blocks;
  std::size_t i = 0;
  while (i < x.size()) {
    Block blk{0.0, 0.0, 0};
    std::size_t j = i;
    while (j < x.size() && x[j] == x[i]) {
      blk.sum += y[j];
      blk.weight += 1.0;
      ++blk.count;
      ++j;
    }
    blocks.push_back(blk);
    while (blocks.size() > 1) {
      auto& last = blocks[blocks.size() - 1];
      auto& prev = blocks[blocks.size() - 2];
      if (prev.sum / prev.weight <= last.sum / last.weight)
        break;
      prev.sum += last.sum;
      prev.weight += last.weight;
      prev.count += last.count;
      blocks.pop_back();
    }
    i = j;
  }
  std::vector<double> fit;
  fit.reserve(x.size());
  for (const auto& b : blocks)
    fit.insert(fit.end(), b.count, b.sum / b.weight);
  return fit;
}

double type7_quantile(std::vector<double> v, double tau)
{
  std::sort(v.begin(), v.end());
  const double pos = tau * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

// Count-weighted spread over decile cells (count, spread) of all pair cells.
double spread_statistic(const std::vector<std::vector<PairObs>>& cells,
                        std::pair<double, double> taus)
{
  double weighted = 0.0;
  double total = 0.0;
  for (auto cell : cells) {
    std::stable_sort(cell.begin(), cell.end(), [](const PairObs& a, const PairObs& b) {
      return a.p1 < b.p1;
    });
    std::vector<double> p1, p2;
    for (const auto& o : cell) {
      p1.push_back(o.p1);
      p2.push_back(o.p2);
    }
    const auto fit = isotonic_fit(p1, p2);
    const std::size_t n = cell.size();
    std::vector<std::vector<double>> deciles(10);
    for (std::size_t j = 0; j < n; ++j)
      deciles[std::min<std::size_t>(9, 10 * j / n)].push_back(p2[j] - fit[j]);
    for (const auto& res : deciles) {
      if (res.size() < 2)
        continue;
      const double spread = type7_quantile(res, taus.second) - type7_quantile(res, taus.first);
      weighted += static_cast<double>(res.size()) * spread;
      total += static_cast<double>(res.size());
    }
  }
  return total > 0.0 ? weighted / total : 0.0;
}

} // namespace

DimTestResult quantile_spread_test(const PseudoPanel& panel, int t1, int t2,
                                   std::pair<double, double> taus, int n_boot,
                                   std::uint64_t seed, int min_cell)
{
  if (!(taus.first > 0.0 && taus.first < taus.second && taus.second < 1.0))
    throw ArgumentError("taus must satisfy 0 < lower < upper < 1");
  check_resamples(n_boot, "n_boot");
  DimTestResult result;
  result.variant = DimTestVariant::quantile_spread;
  result.warnings.push_back(
    "spread test uses observed p_star; with measurement error only non-rejection is informative");

  std::map<std::pair<double, double>, std::vector<PairObs>> by_cell;
  for (const auto& o : paired_scenarios(panel, t1, t2))
    by_cell[{o.x2, o.x1}].push_back(o);
  std::vector<std::vector<PairObs>> cells;
  int dropped = 0;
  for (auto& [key, members] : by_cell) {
    if (static_cast<int>(members.size()) < min_cell) {
      ++dropped;
      continue;
    }
    result.n_effective += static_cast<int>(members.size());
    cells.push_back(std::move(members));
  }
  if (dropped > 0)
    result.warnings.push_back(std::to_string(dropped) + " cells with fewer than " +
                              std::to_string(min_cell) + " persons excluded");
  if (cells.empty())
    throw EstimationError("quantile spread test: every cell was excluded");

  result.statistic = spread_statistic(cells, taus);

  constexpr double zero_tol = 1e-12;
  int at_zero = 0;
  std::vector<std::vector<PairObs>> resampled(cells.size());
  for (int b = 0; b < n_boot; ++b) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(b)));
    for (std::size_t c = 0; c < cells.size(); ++c) {
      std::uniform_int_distribution<std::size_t> pick(0, cells[c].size() - 1);
      resampled[c].clear();
      for (std::size_t j = 0; j < cells[c].size(); ++j)
        resampled[c].push_back(cells[c][pick(rng)]);
    }
    at_zero += spread_statistic(resampled, taus) <= zero_tol;
  }
  result.p_value = (1.0 + at_zero) / (1.0 + n_boot);
  if (result.statistic <= zero_tol)
    result.p_value = 1.0;
  result.reject_at_05 = result.p_value < 0.05;
  return result;
}

} // namespace statedpref
