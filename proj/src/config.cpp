#include "statedpref/config.hpp"

#include "statedpref/csv.hpp"
#include "statedpref/errors.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace statedpref {

namespace {

std::string trim(const std::string& s)
{
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos)
    return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& text, const std::string& what)
{
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw ConfigError(what + ": not a number: '" + text + "'");
  return v;
}

int parse_int(const std::string& text, const std::string& what)
{
  int v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw ConfigError(what + ": not an integer: '" + text + "'");
  return v;
}

// "prefix.<i>" or "prefix.<i>.<j>" with 1-based indices up to 4.
bool indexed_key(const std::string& key, const std::string& prefix, int arity, int& i, int& j)
{
  if (!key.starts_with(prefix + "."))
    return false;
  std::string rest = key.substr(prefix.size() + 1);
  std::vector<int> idx;
  std::istringstream in(rest);
  std::string part;
  while (std::getline(in, part, '.'))
    idx.push_back(parse_int(part, key));
  if (static_cast<int>(idx.size()) != arity)
    return false;
  for (int v : idx)
    if (v < 1 || v > 4)
      throw ConfigError(key + ": index out of range 1..4");
  i = idx[0] - 1;
  j = arity == 2 ? idx[1] - 1 : 0;
  return true;
}

} // namespace

std::vector<double> parse_number_list(const std::string& text, const std::string& what)
{
  std::vector<double> out;
  std::istringstream in(text);
  std::string part;
  while (std::getline(in, part, ','))
    out.push_back(parse_double(trim(part), what));
  if (out.empty())
    throw ConfigError(what + ": empty list");
  return out;
}

DgpConfig parse_dgp_config(std::istream& in, const std::string& source)
{
  DgpConfig cfg;
  std::set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#')
      continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(line_no);
    if (eq == std::string::npos)
      throw ConfigError(where + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second)
      throw ConfigError(where + ": duplicate key '" + key + "'");

    int i = 0;
    int j = 0;
    if (key == "n") {
      cfg.n = parse_int(value, where);
    } else if (key == "t_scenarios") {
      cfg.t_scenarios = parse_int(value, where);
    } else if (key == "noise_scale") {
      cfg.noise_scale = parse_double(value, where);
    } else if (key == "rounding") {
      if (value == "first_decimal")
        cfg.rounding = Rounding::first_decimal;
      else if (value == "none")
        cfg.rounding = Rounding::none;
      else
        throw ConfigError(where + ": rounding must be first_decimal or none");
    } else if (key == "threshold") {
      if (value == "uniform")
        cfg.threshold = ThresholdLaw::uniform;
      else if (value == "logistic")
        cfg.threshold = ThresholdLaw::logistic;
      else
        throw ConfigError(where + ": threshold must be uniform or logistic");
    } else if (key == "scenario_grid") {
      cfg.scenario_grid = parse_number_list(value, where);
    } else if (key == "actual_eta2_coef") {
      cfg.actual_eta2_coef = parse_double(value, where);
    } else if (key == "stated_eta2_coef") {
      cfg.stated_eta2_coef = parse_double(value, where);
    } else if (indexed_key(key, "mean", 1, i, j)) {
      cfg.mean(i) = parse_double(value, where);
    } else if (indexed_key(key, "cov", 2, i, j)) {
      cfg.cov(i, j) = cfg.cov(j, i) = parse_double(value, where);
    } else if (indexed_key(key, "actual_coef", 1, i, j)) {
      cfg.actual_coef(i) = parse_double(value, where);
    } else if (indexed_key(key, "stated_coef", 1, i, j)) {
      cfg.stated_coef(i) = parse_double(value, where);
    } else {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
  }
  validate(cfg);
  return cfg;
}

DgpConfig load_dgp_config(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open config " + path.string());
  return parse_dgp_config(in, path.string());
}

std::vector<std::pair<std::string, std::string>> dgp_config_entries(const DgpConfig& cfg)
{
  std::vector<std::pair<std::string, std::string>> out;
  out.emplace_back("n", std::to_string(cfg.n));
  out.emplace_back("t_scenarios", std::to_string(cfg.t_scenarios));
  out.emplace_back("noise_scale", format_double(cfg.noise_scale));
  out.emplace_back("rounding", cfg.rounding == Rounding::first_decimal ? "first_decimal" : "none");
  out.emplace_back("threshold", cfg.threshold == ThresholdLaw::uniform ? "uniform" : "logistic");
  std::string grid;
  for (std::size_t k = 0; k < cfg.scenario_grid.size(); ++k)
    grid += (k ? "," : "") + format_double(cfg.scenario_grid[k]);
  out.emplace_back("scenario_grid", grid);
  for (int i = 0; i < 4; ++i)
    out.emplace_back("mean." + std::to_string(i + 1), format_double(cfg.mean(i)));
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j)
      out.emplace_back("cov." + std::to_string(i + 1) + "." + std::to_string(j + 1),
                       format_double(cfg.cov(i, j)));
  for (int i = 0; i < 4; ++i)
    out.emplace_back("actual_coef." + std::to_string(i + 1), format_double(cfg.actual_coef(i)));
  out.emplace_back("actual_eta2_coef", format_double(cfg.actual_eta2_coef));
  for (int i = 0; i < 4; ++i)
    out.emplace_back("stated_coef." + std::to_string(i + 1), format_double(cfg.stated_coef(i)));
  out.emplace_back("stated_eta2_coef", format_double(cfg.stated_eta2_coef));
  return out;
}

} // namespace statedpref
