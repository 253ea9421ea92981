#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "compshop/cli.hpp"

using namespace compshop;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("compshop_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs the installed binary; returns its exit status.
int run_binary(const std::string& args) {
  const char* exe = std::getenv("COMPSHOP_CLI");
  REQUIRE(exe != nullptr);
  const std::string cmd = std::string(exe) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("grid parsing") {
  const auto g = cli::parse_grid("log:1e-4:10:6");
  REQUIRE(g.size() == 6);
  CHECK(g.front() == doctest::Approx(1e-4));
  CHECK(g.back() == doctest::Approx(10.0));
  CHECK(g[1] == doctest::Approx(1e-3));
  CHECK(cli::parse_grid("lin:0:1:5")[2] == doctest::Approx(0.5));
  CHECK(cli::parse_grid("1,0.1,0.01").size() == 3);
  CHECK_THROWS_AS(cli::parse_grid("1,2,1"), cli::InputError);
  CHECK_THROWS_AS(cli::parse_grid("log:0:1:3"), cli::InputError);
  CHECK_THROWS_AS(cli::parse_grid("cubic:1:2:3"), cli::InputError);
  CHECK_THROWS_AS(cli::parse_grid(""), cli::InputError);
}

TEST_CASE("number formatting is fixed and round-trips to 12 digits") {
  CHECK(cli::format_number(0.1) == "0.1");
  CHECK(cli::format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(std::stod(cli::format_number(0.198785773036)) == 0.198785773036);
}

TEST_CASE("atomic write replaces content and leaves no temporary") {
  const auto dir = scratch("atomic");
  const auto f = dir / "a.csv";
  cli::write_atomic(f, "one\n");
  cli::write_atomic(f, "two\n");
  CHECK(slurp(f) == "two\n");
  std::size_t n = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++n;
  CHECK(n == 1);
  // Missing parent directories are created.
  cli::write_atomic(dir / "nested" / "x.csv", "x");
  CHECK(slurp(dir / "nested" / "x.csv") == "x");
}

TEST_CASE("validation rejects out-of-range inputs") {
  cli::RunConfig cfg;
  cfg.subcommand = "solve";
  cfg.kappa = 1.0;
  CHECK_NOTHROW(cli::validate(cfg));
  cfg.omega = 0.6;
  CHECK_THROWS_AS(cli::validate(cfg), cli::InputError);
  cfg.omega = 0.25;
  cfg.kappa = -1.0;
  CHECK_THROWS_AS(cli::validate(cfg), cli::InputError);
}

TEST_CASE("solve writes a versioned JSON document, deterministically") {
  const auto dir = scratch("solve");
  cli::RunConfig cfg;
  cfg.subcommand = "solve";
  cfg.kappa = 1.0;
  cfg.out_dir = dir.string();
  std::ostringstream log;
  REQUIRE(cli::run(cfg, log) == cli::kExitOk);
  const auto text = slurp(dir / "solve.json");
  const auto j = nlohmann::json::parse(text);
  CHECK(j.at("schema_version") == cli::kSchemaVersion);
  CHECK(j.at("equilibrium").at("regime") == "expensive");
  CHECK(j.at("equilibrium").at("learning").at("lambda_star").get<double>() == doctest::Approx(0.198785773036).epsilon(1e-10));
  REQUIRE(cli::run(cfg, log) == cli::kExitOk);
  CHECK(slurp(dir / "solve.json") == text);
}

TEST_CASE("monopoly table") {
  const auto dir = scratch("monopoly");
  cli::RunConfig cfg;
  cfg.subcommand = "monopoly";
  cfg.kappa_grid = {1.0, 0.1};
  cfg.out_dir = dir.string();
  std::ostringstream log;
  REQUIRE(cli::run(cfg, log) == cli::kExitOk);
  std::istringstream csv(slurp(dir / "monopoly.csv"));
  std::string header, row;
  std::getline(csv, header);
  CHECK(header == "kappa,x_lo,x_hi,expected_price,consumer_welfare,trade_failure_prob");
  std::getline(csv, row);
  CHECK(row.rfind("1,0.320174534586,", 0) == 0);
}

TEST_CASE("binary: exit codes, config files and flag precedence") {
  const auto dir = scratch("binary");
  const std::string out = " --out-dir " + dir.string();
  CHECK(run_binary("solve --kappa 1" + out) == cli::kExitOk);
  CHECK(run_binary("solve --kappa 1 --omega 0.6" + out) == cli::kExitInput);
  CHECK(run_binary("no-such-command") == cli::kExitInput);
  CHECK(run_binary("solve --kappa 1 --out-dir /proc/compshop-nope") == cli::kExitInput);

  const auto cfg = dir / "cfg.json";
  cli::write_atomic(cfg, R"({"kappa": 0.1, "omega": 0.25, "output": "from_config"})");
  REQUIRE(run_binary("solve --config " + cfg.string() + out) == cli::kExitOk);
  CHECK(nlohmann::json::parse(slurp(dir / "from_config.json")).at("equilibrium").at("regime") == "cheap");
  // The command-line kappa wins over the file.
  REQUIRE(run_binary("solve --config " + cfg.string() + " --kappa 1" + out) == cli::kExitOk);
  CHECK(nlohmann::json::parse(slurp(dir / "from_config.json")).at("equilibrium").at("regime") == "expensive");

  CHECK(run_binary("simulate --kappa 1 --draws 100000" + out) == cli::kExitInput);
}
