#include "cli.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

namespace fs = std::filesystem;

namespace {

int run(std::vector<std::string> args)
{
  args.insert(args.begin(), {"statedpref", "--log-level", "off"});
  return statedpref::cli::run(args);
}

fs::path workdir()
{
  const fs::path dir = fs::temp_directory_path() / "statedpref_cli_test";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p)
{
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_CASE("cli: simulate then estimate")
{
  const fs::path dir = workdir() / "run1";
  fs::remove_all(dir);
  REQUIRE(run({"simulate", "--config", STATEDPREF_SOURCE_DIR "/configs/default.cfg", "--seed",
               "7", "--out", dir.string()}) == 0);
  for (const char* f : {"stated.csv", "actual.csv", "stated.csv.meta", "actual.csv.meta"})
    CHECK(fs::exists(dir / f));
  CHECK(slurp(dir / "stated.csv.meta").find("seed=7") != std::string::npos);

  REQUIRE(run({"estimate", "--stated", (dir / "stated.csv").string(), "--actual",
               (dir / "actual.csv").string(), "--k", "5", "--out", dir.string()}) == 0);
  const std::string fit = slurp(dir / "fit.csv");
  CHECK(fit.rfind("group,alpha,beta,n_obs,converged,separated\n", 0) == 0);
  CHECK(slurp(dir / "groups.csv").rfind("person_id,group,h_1,h_2\n", 0) == 0);
  CHECK(slurp(dir / "estimands.csv").find("\nte,") != std::string::npos);
  CHECK(fs::exists(dir / "estimands.csv.meta"));
}

TEST_CASE("cli: error exit codes")
{
  const fs::path dir = workdir();
  CHECK(run({"estimate", "--stated", "missing.csv", "--actual", "missing.csv", "--out",
             dir.string()}) == 1);
  CHECK(run({"simulate", "--config", "/nonexistent.cfg", "--out", dir.string()}) == 1);
  CHECK(run({"nonsense"}) == 1);
  CHECK(run({"dimtest", "--stated", "x.csv", "--variant", "other"}) == 1);

  std::ofstream(dir / "bad.cfg") << "unknown_key=3\n";
  CHECK(run({"simulate", "--config", (dir / "bad.cfg").string(), "--out", dir.string()}) == 1);

  // All-constant scenario designs leave nobody to group: estimation failure.
  std::ofstream(dir / "flat_stated.csv") << "person_id,scenario_id,x,p_star\n"
                                            "1,0,0,0.5\n1,1,1,0.5\n1,2,1,0.5\n"
                                            "2,0,0,0.5\n2,1,1,0.5\n2,2,1,0.5\n";
  std::ofstream(dir / "flat_actual.csv") << "person_id,x,d\n1,0,1\n2,1,0\n";
  CHECK(run({"estimate", "--stated", (dir / "flat_stated.csv").string(), "--actual",
             (dir / "flat_actual.csv").string(), "--k", "1", "--out", dir.string()}) == 2);
}

TEST_CASE("cli: dimtest and montecarlo outputs")
{
  const fs::path dir = workdir() / "run2";
  fs::remove_all(dir);
  REQUIRE(run({"simulate", "--seed", "3", "--out", dir.string()}) == 0);
  REQUIRE(run({"dimtest", "--stated", (dir / "stated.csv").string(), "--perms", "49", "--out",
               dir.string()}) == 0);
  CHECK(slurp(dir / "dimtest.csv").rfind("variant,statistic,p_value,n_effective\n", 0) == 0);
  REQUIRE(run({"dimtest", "--stated", (dir / "stated.csv").string(), "--variant", "spread",
               "--perms", "19", "--out", dir.string()}) == 0);
  CHECK(slurp(dir / "dimtest.csv").find("quantile_spread") != std::string::npos);

  REQUIRE(run({"montecarlo", "--s", "3", "--t", "5", "--oracle-draws", "20000", "--k", "4",
               "--out", dir.string()}) == 0);
  for (const char* f : {"replications.csv", "summary.csv", "density_T5.csv", "summary.csv.meta"})
    CHECK(fs::exists(dir / f));
  CHECK(run({"montecarlo", "--t", "7", "--out", dir.string()}) == 1);
}
