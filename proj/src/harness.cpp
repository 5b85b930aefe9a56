#include "statedpref/harness.hpp"

#include "statedpref/errors.hpp"
#include "statedpref/estimands.hpp"
#include "statedpref/firststep.hpp"
#include "statedpref/rng.hpp"

#include <atomic>
#include <cmath>
#include <thread>

namespace statedpref {

ReplicationResult run_replication(const DgpConfig& cfg, const EstimationSettings& settings,
                                  std::uint64_t seed)
{
  ReplicationResult out;
  out.seed = seed;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  out.te_tsgfe = out.te_naive = out.te_stated = nan;

  auto record = [&](const std::exception& e) {
    out.ok = false;
    if (out.error.empty())
      out.error = e.what();
  };

  SimulatedData data;
  try {
    data = simulate_dataset(cfg, seed);
  } catch (const std::exception& e) {
    record(e);
    return out;
  }

  try {
    const MomentSet moments =
      estimate_individual_moments(data.panel, settings.eval_points, settings.link);
    out.n_excluded_persons = moments.n_excluded;
    const std::uint64_t kseed = derive_seed(seed, 1);
    Grouping grouping;
    if (settings.fixed_k) {
      grouping = kmeans_partition(moments, *settings.fixed_k, settings.restarts, kseed);
    } else {
      grouping = select_k(moments, settings.k_min, settings.k_max, settings.gamma,
                          settings.restarts, kseed)
                   .grouping;
    }
    out.k_used = grouping.k;
    const GroupedProbitFit fit = fit_grouped_probit(data.panel.actual, grouping, settings.spec);
    out.n_separated_groups = fit.n_separated();
    out.te_tsgfe = treatment_effect(fit, grouping, settings.x1, settings.x0);
  } catch (const std::exception& e) {
    record(e);
  }

  try {
    out.te_naive = naive_te(data.panel.actual, settings.x1, settings.x0, settings.spec).value;
  } catch (const std::exception& e) {
    record(e);
  }

  try {
    const StatedTe st =
      stated_te(data.panel, settings.x1, settings.x0, settings.stated_bandwidth);
    out.te_stated = st.value;
    if (st.missing)
      throw EstimationError("stated TE: empty cell");
  } catch (const std::exception& e) {
    record(e);
  }

  out.ok = out.ok && std::isfinite(out.te_tsgfe) && std::isfinite(out.te_naive) &&
           std::isfinite(out.te_stated);
  return out;
}

int Histogram::total() const
{
  int t = underflow + overflow;
  for (int c : counts)
    t += c;
  return t;
}

Histogram make_histogram(const std::vector<double>& values, int bins, double lo, double hi)
{
  if (bins < 2)
    throw ArgumentError("need at least 2 bins");
  if (!(hi > lo))
    throw ArgumentError("histogram range must be increasing");
  Histogram h;
  h.lo = lo;
  h.hi = hi;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  const double width = (hi - lo) / bins;
  for (double v : values) {
    if (v < lo) {
      ++h.underflow;
    } else if (v > hi) {
      ++h.overflow;
    } else {
      const auto b = std::min(bins - 1, static_cast<int>(std::floor((v - lo) / width)));
      ++h.counts[static_cast<std::size_t>(b)];
    }
  }
  return h;
}

namespace {

EstimatorSummary summarize(std::string name, const std::vector<double>& values, double truth,
                           const StudyOptions& options)
{
  EstimatorSummary s;
  s.name = std::move(name);
  s.n = static_cast<int>(values.size());
  s.density = make_histogram(values, options.bins, options.range_lo, options.range_hi);
  if (values.empty())
    return s;
  double sum = 0.0;
  for (double v : values)
    sum += v;
  s.mean = sum / s.n;
  double ss = 0.0;
  double sq_err = 0.0;
  for (double v : values) {
    ss += (v - s.mean) * (v - s.mean);
    sq_err += (v - truth) * (v - truth);
  }
  s.sd = s.n > 1 ? std::sqrt(ss / (s.n - 1)) : 0.0;
  s.rmse = std::sqrt(sq_err / s.n);
  s.bias = s.mean - truth;
  return s;
}

} // namespace

StudySummary run_study(const DgpConfig& cfg, const EstimationSettings& settings,
                       const StudyOptions& options)
{
  if (options.s < 1)
    throw ArgumentError("s must be >= 1");
  validate(cfg);

  StudySummary summary;
  summary.cfg = cfg;
  summary.settings = settings;
  summary.options = options;
  summary.replications.resize(static_cast<std::size_t>(options.s));

  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < options.s; i = next++) {
      summary.replications[static_cast<std::size_t>(i)] = run_replication(
        cfg, settings, derive_seed(options.master_seed, static_cast<std::uint64_t>(i)));
    }
  };
  const int threads = std::max(1, std::min(options.parallelism, options.s));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back(worker);
  }

  const std::uint64_t oracle_seed = derive_seed(options.master_seed, 0xA5A5A5A5ull);
  summary.oracle_te =
    oracle_treatment_effect(cfg, settings.x1, settings.x0, options.oracle_draws, oracle_seed);
  summary.oracle_stated_te =
    oracle_stated_te(cfg, settings.x1, settings.x0, options.oracle_draws, oracle_seed);

  std::vector<double> tsgfe, naive, stated;
  for (const auto& r : summary.replications) {
    if (!r.ok) {
      ++summary.s_failed;
      continue;
    }
    ++summary.s_completed;
    tsgfe.push_back(r.te_tsgfe);
    naive.push_back(r.te_naive);
    stated.push_back(r.te_stated);
  }
  summary.failure_warning = summary.s_failed > 0.05 * options.s;
  summary.tsgfe = summarize("tsgfe", tsgfe, summary.oracle_te, options);
  summary.naive = summarize("naive", naive, summary.oracle_te, options);
  summary.stated = summarize("stated", stated, summary.oracle_te, options);
  return summary;
}

DensityTable emit_density(const StudySummary& summary, int bins, std::pair<double, double> range)
{
  if (summary.s_completed == 0)
    throw ArgumentError("empty study summary");
  if (bins < 2)
    throw ArgumentError("need at least 2 bins");
  DensityTable table;
  const double width = (range.second - range.first) / bins;
  for (int b = 0; b < bins; ++b) {
    table.bin_lo.push_back(range.first + b * width);
    table.bin_hi.push_back(range.first + (b + 1) * width);
  }
  auto add = [&](const std::string& name, double ReplicationResult::*field) {
    std::vector<double> values;
    for (const auto& r : summary.replications)
      if (r.ok)
        values.push_back(r.*field);
    const Histogram h = make_histogram(values, bins, range.first, range.second);
    table.estimators.push_back(name);
    table.counts.push_back(h.counts);
    table.underflow.push_back(h.underflow);
    table.overflow.push_back(h.overflow);
  };
  add("tsgfe", &ReplicationResult::te_tsgfe);
  add("naive", &ReplicationResult::te_naive);
  add("stated", &ReplicationResult::te_stated);
  return table;
}

} // namespace statedpref
