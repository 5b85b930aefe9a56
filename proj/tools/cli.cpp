#include "cli.hpp"

#include "statedpref/config.hpp"
#include "statedpref/csv.hpp"
#include "statedpref/dgp.hpp"
#include "statedpref/dimtest.hpp"
#include "statedpref/errors.hpp"
#include "statedpref/estimands.hpp"
#include "statedpref/firststep.hpp"
#include "statedpref/harness.hpp"
#include "statedpref/secondstep.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>

namespace statedpref::cli {

namespace fs = std::filesystem;
using Meta = std::vector<std::pair<std::string, std::string>>;

namespace {

struct SimulateArgs
{
  std::string config;
  std::uint64_t seed = 1;
  std::string out = ".";
  bool emit_latent = false;
};

struct EstimateArgs
{
  std::string stated;
  std::string actual;
  std::string membership;
  std::optional<int> k;
  std::string k_select = "2,20,1";
  int restarts = 10;
  std::string eval_points = "0,1";
  std::uint64_t seed = 1;
  std::string out = ".";
  double x1 = 1.0;
  double x0 = 0.0;
  std::string msb_grid = "-1,0,1";
  std::optional<double> bandwidth;
  double clamp_eps = 0.01;
  bool common_slope = false;
};

struct MonteCarloArgs
{
  std::string config;
  int s = 100;
  std::optional<int> t;
  std::uint64_t seed = 1;
  int parallelism = 1;
  std::string out = ".";
  int bins = 60;
  std::string range = "0,0.8";
  long long oracle_draws = 2'000'000;
  std::optional<int> k;
};

struct DimTestArgs
{
  std::string stated;
  std::string variant = "ks";
  std::string scenarios = "1,2";
  std::string taus = "0.25,0.75";
  int perms = 199;
  std::uint64_t seed = 1;
  std::string out = ".";
  int min_cell = 10;
};

fs::path prepare_out(const std::string& dir)
{
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec || !fs::is_directory(p))
    throw ValidationError("cannot create output directory " + dir);
  return p;
}

void require_file(const std::string& path, const std::string& what)
{
  if (!fs::is_regular_file(path))
    throw ValidationError(what + " file not found: " + path);
}

DgpConfig resolve_config(const std::string& path)
{
  if (path.empty())
    return DgpConfig{};
  return load_dgp_config(path);
}

std::vector<int> parse_int_list(const std::string& text, const std::string& what)
{
  std::vector<int> out;
  for (double v : parse_number_list(text, what)) {
    if (v != std::floor(v))
      throw ConfigError(what + ": expected integers");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

std::string join(const std::vector<double>& v)
{
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i)
    s += (i ? "," : "") + format_double(v[i]);
  return s;
}

void write_all_meta(const std::vector<fs::path>& outputs, const Meta& meta)
{
  for (const auto& p : outputs)
    write_metadata(p, meta);
}

void report_violations(const ValidationReport& report)
{
  if (report.empty())
    return;
  for (std::size_t i = 0; i < std::min<std::size_t>(report.size(), 10); ++i)
    spdlog::error("{}", describe(report[i]));
  throw ValidationError(std::to_string(report.size()) + " panel violation(s); first: " +
                        describe(report.front()));
}

int cmd_simulate(const SimulateArgs& a)
{
  const DgpConfig cfg = resolve_config(a.config);
  const fs::path out = prepare_out(a.out);
  const SimulatedData data = simulate_dataset(cfg, a.seed);

  std::vector<fs::path> outputs{out / "stated.csv", out / "actual.csv"};
  write_stated_csv(outputs[0], data.panel.stated);
  write_actual_csv(outputs[1], data.panel.actual);
  if (a.emit_latent) {
    outputs.push_back(out / "latent.csv");
    write_latent_csv(outputs.back(), data.latent);
  }

  Meta meta = dgp_config_entries(cfg);
  meta.emplace_back("seed", std::to_string(a.seed));
  meta.emplace_back("scenario_grid_note", "11-point subset chosen by the tool, see README");
  write_all_meta(outputs, meta);
  spdlog::info("simulated {} persons x {} scenarios into {}", cfg.n, cfg.t_scenarios + 1,
               out.string());
  return 0;
}

int cmd_estimate(const EstimateArgs& a)
{
  require_file(a.stated, "stated");
  require_file(a.actual, "actual");
  if (!a.membership.empty())
    require_file(a.membership, "membership");
  const fs::path out = prepare_out(a.out);

  const PseudoPanel panel = read_panel(a.stated, a.actual);
  report_violations(validate_panel(panel));

  LinkFunction lf;
  lf.clamp_eps = a.clamp_eps;
  validate(lf);
  const auto eval_points = parse_number_list(a.eval_points, "--eval-points");
  const MomentSet moments = estimate_individual_moments(panel, eval_points, lf);
  if (moments.n_excluded > 0)
    spdlog::warn("{} persons excluded from grouping (rank-deficient scenario design)",
                 moments.n_excluded);

  Grouping grouping;
  std::string k_rule;
  if (a.k) {
    grouping = kmeans_partition(moments, *a.k, a.restarts, a.seed);
    k_rule = "fixed";
  } else {
    const auto ks = parse_number_list(a.k_select, "--k-select");
    if (ks.size() != 3)
      throw ConfigError("--k-select expects min,max,gamma");
    const KSelection sel = select_k(moments, static_cast<int>(ks[0]), static_cast<int>(ks[1]),
                                    ks[2], a.restarts, a.seed);
    if (!sel.threshold_met)
      spdlog::warn("no K met the threshold; using k_max = {}", sel.k);
    grouping = sel.grouping;
    k_rule = "select:" + a.k_select;
  }

  ModelSpec spec;
  spec.per_group_slope = !a.common_slope;
  const GroupedProbitFit fit = fit_grouped_probit(panel.actual, grouping, spec);
  if (fit.n_separated() > 0)
    spdlog::warn("{} group(s) separated; parameters clamped at the bound", fit.n_separated());
  if (!fit.converged)
    spdlog::warn("grouped probit did not converge in {} iterations", spec.max_iter);

  std::map<PersonId, int> membership;
  if (!a.membership.empty())
    membership = read_membership_csv(a.membership);

  EstimandSettings es;
  es.x1 = a.x1;
  es.x0 = a.x0;
  es.msb_grid = parse_number_list(a.msb_grid, "--msb-grid");
  es.bandwidth = a.bandwidth;
  es.spec = spec;
  const EstimandReport report =
    compute_estimands(panel, grouping, fit, a.membership.empty() ? nullptr : &membership, es);
  if (report.stated.off_grid)
    spdlog::warn("stated TE: x not on the attribute support, nearest cells used");

  const fs::path groups_csv = out / "groups.csv";
  {
    std::vector<std::string> header{"person_id", "group"};
    for (std::size_t j = 0; j < eval_points.size(); ++j)
      header.push_back("h_" + std::to_string(j + 1));
    CsvWriter w(groups_csv, header);
    for (const auto& m : moments.persons) {
      const auto it = grouping.labels.find(m.person_id);
      if (it == grouping.labels.end())
        continue;
      std::vector<std::string> row{std::to_string(m.person_id), std::to_string(it->second)};
      for (Eigen::Index j = 0; j < m.h.size(); ++j)
        row.push_back(format_double(m.h(j)));
      w.row(row);
    }
  }
  const fs::path fit_csv = out / "fit.csv";
  {
    CsvWriter w(fit_csv, {"group", "alpha", "beta", "n_obs", "converged", "separated"});
    for (const auto& [g, p] : fit.params)
      w.row({std::to_string(g), format_double(p.alpha), format_double(p.beta),
             std::to_string(p.n_obs), p.converged ? "1" : "0", p.separated ? "1" : "0"});
  }
  const fs::path estimands_csv = out / "estimands.csv";
  {
    CsvWriter w(estimands_csv, {"quantity", "x", "group_pair", "value", "flag"});
    for (const auto& r : report.rows())
      w.row({r.quantity, format_double(r.x), r.group_pair, format_double(r.value), r.flag});
  }

  Meta meta{{"stated", a.stated},
            {"actual", a.actual},
            {"membership", a.membership},
            {"k_rule", k_rule},
            {"k", std::to_string(grouping.k)},
            {"restarts", std::to_string(a.restarts)},
            {"eval_points", join(eval_points)},
            {"seed", std::to_string(a.seed)},
            {"x1", format_double(a.x1)},
            {"x0", format_double(a.x0)},
            {"msb_grid", join(es.msb_grid)},
            {"bandwidth", format_double(report.bandwidth)},
            {"clamp_eps", format_double(a.clamp_eps)},
            {"per_group_slope", spec.per_group_slope ? "1" : "0"},
            {"n_excluded_persons", std::to_string(moments.n_excluded)},
            {"n_unlabeled_actual", std::to_string(fit.n_unlabeled)}};
  write_all_meta({groups_csv, fit_csv, estimands_csv}, meta);
  spdlog::info("K = {}, TE = {}", grouping.k, report.te);
  return 0;
}

int cmd_montecarlo(const MonteCarloArgs& a)
{
  DgpConfig cfg = resolve_config(a.config);
  if (a.t)
    cfg.t_scenarios = *a.t;
  validate(cfg);
  const fs::path out = prepare_out(a.out);
  const auto range = parse_number_list(a.range, "--range");
  if (range.size() != 2)
    throw ConfigError("--range expects lo,hi");

  EstimationSettings settings;
  settings.fixed_k = a.k;
  StudyOptions options;
  options.s = a.s;
  options.master_seed = a.seed;
  options.parallelism = a.parallelism;
  options.bins = a.bins;
  options.range_lo = range[0];
  options.range_hi = range[1];
  options.oracle_draws = a.oracle_draws;

  const StudySummary summary = run_study(cfg, settings, options);
  if (summary.failure_warning)
    spdlog::warn("{} of {} replications failed", summary.s_failed, a.s);

  const fs::path reps_csv = out / "replications.csv";
  {
    CsvWriter w(reps_csv, {"index", "seed", "te_tsgfe", "te_naive", "te_stated", "k_used",
                           "n_separated_groups", "n_excluded_persons", "ok"});
    for (std::size_t i = 0; i < summary.replications.size(); ++i) {
      const auto& r = summary.replications[i];
      w.row({std::to_string(i), std::to_string(r.seed), format_double(r.te_tsgfe),
             format_double(r.te_naive), format_double(r.te_stated), std::to_string(r.k_used),
             std::to_string(r.n_separated_groups), std::to_string(r.n_excluded_persons),
             r.ok ? "1" : "0"});
    }
  }
  const fs::path summary_csv = out / "summary.csv";
  {
    CsvWriter w(summary_csv, {"estimator", "mean", "bias", "rmse", "sd", "n"});
    for (const auto* e : {&summary.tsgfe, &summary.naive, &summary.stated})
      w.row({e->name, format_double(e->mean), format_double(e->bias), format_double(e->rmse),
             format_double(e->sd), std::to_string(e->n)});
    w.row({"oracle_te", format_double(summary.oracle_te), "0", "0", "0", "0"});
    w.row({"oracle_stated_te", format_double(summary.oracle_stated_te), "0", "0", "0", "0"});
  }
  const fs::path density_csv = out / ("density_T" + std::to_string(cfg.t_scenarios) + ".csv");
  {
    const DensityTable table = emit_density(summary, a.bins, {range[0], range[1]});
    CsvWriter w(density_csv, {"estimator", "bin_lo", "bin_hi", "count", "flag"});
    for (std::size_t e = 0; e < table.estimators.size(); ++e) {
      const double lo = table.bin_lo.front();
      const double hi = table.bin_hi.back();
      w.row({table.estimators[e], "-inf", format_double(lo),
             std::to_string(table.underflow[e]), "underflow"});
      for (std::size_t b = 0; b < table.bin_lo.size(); ++b)
        w.row({table.estimators[e], format_double(table.bin_lo[b]),
               format_double(table.bin_hi[b]), std::to_string(table.counts[e][b]), ""});
      w.row({table.estimators[e], format_double(hi), "inf", std::to_string(table.overflow[e]),
             "overflow"});
    }
  }

  Meta meta = dgp_config_entries(cfg);
  meta.emplace_back("s", std::to_string(a.s));
  meta.emplace_back("master_seed", std::to_string(a.seed));
  meta.emplace_back("s_completed", std::to_string(summary.s_completed));
  meta.emplace_back("s_failed", std::to_string(summary.s_failed));
  meta.emplace_back("k_rule", a.k ? "fixed:" + std::to_string(*a.k) : "select:2,20,1");
  meta.emplace_back("restarts", std::to_string(settings.restarts));
  meta.emplace_back("eval_points", join(settings.eval_points));
  meta.emplace_back("bins", std::to_string(a.bins));
  meta.emplace_back("range", a.range);
  meta.emplace_back("oracle_draws", std::to_string(a.oracle_draws));
  write_all_meta({reps_csv, summary_csv, density_csv}, meta);
  spdlog::info("TSGFE mean {:.4f}, naive {:.4f}, stated {:.4f}, oracle {:.4f}", summary.tsgfe.mean,
               summary.naive.mean, summary.stated.mean, summary.oracle_te);
  return 0;
}

int cmd_dimtest(const DimTestArgs& a)
{
  require_file(a.stated, "stated");
  const fs::path out = prepare_out(a.out);
  const PseudoPanel panel = read_panel(a.stated);
  report_violations(validate_panel(panel, {.require_actual = false}));

  const auto t = parse_int_list(a.scenarios, "--scenarios");
  if (t.size() != 2)
    throw ConfigError("--scenarios expects t1,t2");
  DimTestResult result;
  if (a.variant == "ks") {
    result = rank_invariance_test(panel, t[0], t[1], a.perms, a.seed, a.min_cell);
  } else {
    const auto taus = parse_number_list(a.taus, "--taus");
    if (taus.size() != 2)
      throw ConfigError("--taus expects lower,upper");
    result = quantile_spread_test(panel, t[0], t[1], {taus[0], taus[1]}, a.perms, a.seed,
                                  a.min_cell);
  }
  for (const auto& w : result.warnings)
    spdlog::warn("{}", w);

  const fs::path csv = out / "dimtest.csv";
  {
    CsvWriter w(csv, {"variant", "statistic", "p_value", "n_effective"});
    w.row({to_string(result.variant), format_double(result.statistic),
           format_double(result.p_value), std::to_string(result.n_effective)});
  }
  write_metadata(csv, {{"stated", a.stated},
                       {"variant", a.variant},
                       {"scenarios", a.scenarios},
                       {"taus", a.taus},
                       {"perms", std::to_string(a.perms)},
                       {"seed", std::to_string(a.seed)},
                       {"min_cell", std::to_string(a.min_cell)},
                       {"cells", a.variant == "ks" ? "x per scenario"
                                                   : "(x_t2, x_t1) x deciles of p_t1"}});
  return 0;
}

int fail(const char* kind, const std::string& message, int code)
{
  std::cerr << nlohmann::json{{"error", kind}, {"message", message}}.dump() << '\n';
  return code;
}

} // namespace

int run(const std::vector<std::string>& args)
{
  CLI::App app{"Stated and actual choice estimation with grouped fixed effects"};
  app.set_version_flag("--version", std::string("statedpref ") + STATEDPREF_VERSION);
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off")
    ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Draw a synthetic pseudo-panel");
  simulate->add_option("--config", sim.config, "key=value DGP config (default: built-in design)");
  simulate->add_option("--seed", sim.seed, "Random seed");
  simulate->add_option("--out", sim.out, "Output directory");
  simulate->add_flag("--emit-latent", sim.emit_latent, "Also write latent.csv");

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "Two-step grouped estimation on CSV data");
  estimate->add_option("--stated", est.stated, "stated.csv")->required();
  estimate->add_option("--actual", est.actual, "actual.csv")->required();
  estimate->add_option("--membership", est.membership,
                       "person_id,member CSV for counterfactual populations");
  auto* k_opt = estimate->add_option("--k", est.k, "Fixed number of groups");
  estimate->add_option("--k-select", est.k_select, "K selection: min,max,gamma")
    ->excludes(k_opt);
  estimate->add_option("--restarts", est.restarts, "k-means restarts");
  estimate->add_option("--eval-points", est.eval_points, "Moment evaluation points a,b,...");
  estimate->add_option("--seed", est.seed, "Random seed");
  estimate->add_option("--out", est.out, "Output directory");
  estimate->add_option("--x1", est.x1, "Treatment value");
  estimate->add_option("--x0", est.x0, "Control value");
  estimate->add_option("--msb-grid", est.msb_grid, "MSB evaluation grid");
  estimate->add_option("--bandwidth", est.bandwidth, "Kernel bandwidth (default: Silverman)");
  estimate->add_option("--clamp-eps", est.clamp_eps, "Probability clamp before the logit");
  estimate->add_flag("--common-slope", est.common_slope, "Share the slope across groups");

  MonteCarloArgs mc;
  auto* montecarlo = app.add_subcommand("montecarlo", "Monte Carlo study of the estimators");
  montecarlo->add_option("--config", mc.config, "key=value DGP config (default: built-in design)");
  montecarlo->add_option("--s", mc.s, "Number of replications");
  montecarlo->add_option("--t", mc.t, "Scenarios per person (overrides config)")
    ->check(CLI::IsMember({5, 10, 20}));
  montecarlo->add_option("--seed", mc.seed, "Master seed");
  montecarlo->add_option("--parallelism", mc.parallelism, "Worker threads");
  montecarlo->add_option("--out", mc.out, "Output directory");
  montecarlo->add_option("--bins", mc.bins, "Density bins");
  montecarlo->add_option("--range", mc.range, "Density range lo,hi");
  montecarlo->add_option("--oracle-draws", mc.oracle_draws, "Draws for the oracle TE");
  montecarlo->add_option("--k", mc.k, "Fixed K instead of data-driven selection");

  DimTestArgs dt;
  auto* dimtest = app.add_subcommand("dimtest", "Test the dimension of heterogeneity");
  dimtest->add_option("--stated", dt.stated, "stated.csv")->required();
  dimtest->add_option("--variant", dt.variant, "ks|spread")->check(CLI::IsMember({"ks", "spread"}));
  dimtest->add_option("--scenarios", dt.scenarios, "t1,t2");
  dimtest->add_option("--taus", dt.taus, "Quantile levels for the spread variant");
  dimtest->add_option("--perms", dt.perms, "Permutations (ks) or bootstrap draws (spread)");
  dimtest->add_option("--seed", dt.seed, "Random seed");
  dimtest->add_option("--out", dt.out, "Output directory");
  dimtest->add_option("--min-cell", dt.min_cell, "Minimum persons per cell");

  std::vector<std::string> argv_rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(argv_rev);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0)
      return app.exit(e);
    app.exit(e, std::cout, std::cerr);
    return fail("usage", e.what(), 1);
  }

  auto logger = spdlog::stderr_color_mt("statedpref");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::from_str(log_level));

  int code = 0;
  try {
    if (*simulate)
      code = cmd_simulate(sim);
    else if (*estimate)
      code = cmd_estimate(est);
    else if (*montecarlo)
      code = cmd_montecarlo(mc);
    else if (*dimtest)
      code = cmd_dimtest(dt);
  } catch (const EstimationError& e) {
    code = fail("estimation", e.what(), 2);
  } catch (const ValidationError& e) {
    code = fail("validation", e.what(), 1);
  } catch (const ConfigError& e) {
    code = fail("config", e.what(), 1);
  } catch (const ArgumentError& e) {
    code = fail("argument", e.what(), 1);
  } catch (const std::exception& e) {
    code = fail("internal", e.what(), 2);
  }
  spdlog::drop("statedpref");
  return code;
}

} // namespace statedpref::cli
