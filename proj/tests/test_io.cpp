#include "statedpref/config.hpp"
#include "statedpref/csv.hpp"
#include "statedpref/errors.hpp"
#include "statedpref/panel.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace statedpref;
namespace fs = std::filesystem;

namespace {

PseudoPanel small_panel()
{
  PseudoPanel p;
  p.t_count = 3;
  for (PersonId id : {1, 2})
    for (int s = 0; s < 3; ++s)
      p.stated.push_back({id, s, 0.5 * s - 0.5, 0.1 * (s + 1)});
  p.actual = {{1, 0.3, 1}, {2, -0.2, 0}};
  return p;
}

fs::path scratch(const std::string& name)
{
  const fs::path dir = fs::temp_directory_path() / "statedpref_unit";
  fs::create_directories(dir);
  return dir / name;
}

void write_text(const fs::path& p, const std::string& text)
{
  std::ofstream(p) << text;
}

} // namespace

TEST_CASE("validate_panel: accepts a well-formed panel")
{
  CHECK(validate_panel(small_panel()).empty());
  CHECK(infer_t_count(small_panel().stated) == 3);
}

TEST_CASE("validate_panel: lists every violation")
{
  PseudoPanel p = small_panel();
  p.stated[1].p_star = 1.5;
  p.stated[2].x = std::nan("");
  p.stated.push_back({2, 1, 0.0, 0.3});
  p.actual[1].d = 2;
  p.actual.push_back({3, 0.0, 1});
  const ValidationReport report = validate_panel(p);
  CHECK(report.size() >= 5);
  for (const auto& v : report)
    CHECK_FALSE(describe(v).empty());

  PseudoPanel missing = small_panel();
  missing.stated.erase(missing.stated.begin() + 4);
  CHECK_FALSE(validate_panel(missing).empty());
  PseudoPanel no_actual = small_panel();
  no_actual.actual.clear();
  CHECK_FALSE(validate_panel(no_actual).empty());
  CHECK(validate_panel(no_actual, {.require_actual = false}).empty());
}

TEST_CASE("csv: round trip of stated and actual records")
{
  const PseudoPanel p = small_panel();
  write_stated_csv(scratch("s.csv"), p.stated);
  write_actual_csv(scratch("a.csv"), p.actual);
  const PseudoPanel back = read_panel(scratch("s.csv"), scratch("a.csv"));
  REQUIRE(back.stated.size() == p.stated.size());
  CHECK(back.t_count == 3);
  for (std::size_t i = 0; i < p.stated.size(); ++i) {
    CHECK(back.stated[i].x == p.stated[i].x);
    CHECK(back.stated[i].p_star == p.stated[i].p_star);
  }
  CHECK(back.actual[0].d == 1);
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(-2.0) == "-2");
}

TEST_CASE("csv: malformed input names file and line")
{
  write_text(scratch("bad.csv"), "person_id,scenario_id,x,p_star\n1,0,abc,0.5\n");
  CHECK_THROWS_WITH_AS(read_stated_csv(scratch("bad.csv")), doctest::Contains("bad.csv:2"),
                       ValidationError);
  write_text(scratch("nocol.csv"), "person_id,x\n1,0\n");
  CHECK_THROWS_WITH_AS(read_stated_csv(scratch("nocol.csv")), doctest::Contains("scenario_id"),
                       ValidationError);
  CHECK_THROWS_WITH_AS(read_csv(scratch("absent.csv")), doctest::Contains("absent.csv"),
                       ValidationError);
}

TEST_CASE("csv: membership and metadata")
{
  write_text(scratch("m.csv"), "person_id,member\n1,1\n2,2\n");
  const auto m = read_membership_csv(scratch("m.csv"));
  CHECK(m.at(2) == 2);
  write_metadata(scratch("m.csv"), {{"seed", "4"}, {"n", "2"}});
  std::ifstream in(scratch("m.csv").string() + ".meta");
  std::string line;
  std::getline(in, line);
  CHECK(line == "seed=4");
}

TEST_CASE("config: parse, defaults and canonical form")
{
  std::istringstream in("# comment\nn=250\nthreshold=logistic\ncov.1.2=0.2\nscenario_grid=-1,0,1\n");
  const DgpConfig cfg = parse_dgp_config(in);
  CHECK(cfg.n == 250);
  CHECK(cfg.threshold == ThresholdLaw::logistic);
  CHECK(cfg.cov(1, 0) == 0.2);
  CHECK(cfg.scenario_grid == std::vector<double>{-1, 0, 1});
  CHECK(cfg.t_scenarios == 10);

  std::ostringstream canon;
  for (const auto& [k, v] : dgp_config_entries(cfg))
    canon << k << '=' << v << '\n';
  std::istringstream again(canon.str());
  const DgpConfig back = parse_dgp_config(again);
  CHECK(back.cov == cfg.cov);
  CHECK(back.scenario_grid == cfg.scenario_grid);
  CHECK(back.n == cfg.n);
}

TEST_CASE("config: shipped file matches the built-in defaults")
{
  const DgpConfig shipped = load_dgp_config(STATEDPREF_SOURCE_DIR "/configs/default.cfg");
  const DgpConfig def;
  CHECK(shipped.cov == def.cov);
  CHECK(shipped.mean == def.mean);
  CHECK(shipped.actual_coef == def.actual_coef);
  CHECK(shipped.stated_coef == def.stated_coef);
  CHECK(shipped.scenario_grid == def.scenario_grid);
  CHECK(shipped.n == def.n);
}

TEST_CASE("config: errors")
{
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return parse_dgp_config(in);
  };
  CHECK_THROWS_WITH_AS(parse("bogus=1\n"), doctest::Contains("bogus"), ConfigError);
  CHECK_THROWS_AS(parse("n=1\nn=2\n"), ConfigError);
  CHECK_THROWS_AS(parse("n=abc\n"), ConfigError);
  CHECK_THROWS_AS(parse("cov.5.1=1\n"), ConfigError);
  CHECK_THROWS_AS(parse("noline\n"), ConfigError);
  CHECK_THROWS_AS(parse("cov.1.2=3\n"), ConfigError);
  CHECK_THROWS_AS(load_dgp_config("/nonexistent.cfg"), ConfigError);
}
