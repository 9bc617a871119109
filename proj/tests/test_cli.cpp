#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "hcnas/io.hpp"

using namespace hcnas;

namespace {

namespace fs = std::filesystem;

struct CliFixture {
  fs::path dir;

  CliFixture() {
    dir = fs::temp_directory_path() / ("hcnas_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~CliFixture() { fs::remove_all(dir); }

  std::string path(const std::string& name) const { return (dir / name).string(); }

  int run(const std::string& args, const std::string& env = "") const {
    const std::string cmd = env + (env.empty() ? "" : " ") + HCNAS_CLI_PATH +
                            " " + args + " > " + path("stdout.txt") + " 2> " +
                            path("stderr.txt");
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
  }

  std::string slurp(const std::string& name) const {
    std::ifstream in(path(name), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
};

}  // namespace

TEST_CASE("gen, search, project and enumerate fit together") {
  CliFixture cli;
  REQUIRE(cli.run("gen space --stages 2 --max-depth 3 --configs 3 --out " +
                  cli.path("space.json")) == 0);
  REQUIRE(cli.run("gen table --space " + cli.path("space.json") +
                  " --seed 5 --out " + cli.path("table.json")) == 0);
  REQUIRE(cli.run("gen objective --space " + cli.path("space.json") +
                  " --seed 6 --out " + cli.path("obj.json")) == 0);

  const std::string base = "search --space " + cli.path("space.json") +
                           " --latency-table " + cli.path("table.json") +
                           " --objective " + cli.path("obj.json") +
                           " --budget-ms 14 --iters 200 --seed 3";
  REQUIRE(cli.run(base + " --out " + cli.path("run1")) == 0);

  const Json result = parse_json_file(cli.path("run1/result.json"));
  CHECK(result.at("latency_ms").get<double>() <= 14.0 + 1e-9);
  const DiscreteArch arch = arch_from_json(result.at("arch"));
  CHECK(arch.depth.size() == 2);
  CHECK(fs::exists(cli.path("run1/trace.csv")));
  CHECK(fs::exists(cli.path("run1/manifest.json")));
  CHECK(fs::exists(cli.path("run1/params.json")));
  CHECK(fs::exists(cli.path("run1/init_point.csv")));

  // identical manifest -> identical bytes
  REQUIRE(cli.run(base + " --out " + cli.path("run2")) == 0);
  CHECK(cli.slurp("run1/result.json") == cli.slurp("run2/result.json"));
  CHECK(cli.slurp("run1/trace.csv") == cli.slurp("run2/trace.csv"));

  // the converged point projects under the same budget
  REQUIRE(cli.run("project --params " + cli.path("run1/params.json") +
                  " --latency-table " + cli.path("table.json") +
                  " --budget 14") == 0);
  const Json projected = Json::parse(cli.slurp("stdout.txt"));
  CHECK(projected.at("projected_latency").get<double>() <= 14.0 + 1e-9);
  CHECK(projected.contains("argmax_latency"));
  CHECK(projected.contains("credit_argmax"));
  CHECK(projected.contains("credit_projected"));

  REQUIRE(cli.run("enumerate --space " + cli.path("space.json") +
                  " --latency-table " + cli.path("table.json") +
                  " --objective " + cli.path("obj.json") +
                  " --budget-ms 14 --out " + cli.path("enum")) == 0);
  const Json summary = Json::parse(cli.slurp("stdout.txt"));
  CHECK(summary.at("count").get<int>() == 1296);
  CHECK(summary.at("count_exact").get<std::string>() == "1296");
  REQUIRE(summary.contains("best_feasible"));
  CHECK(summary.at("best_feasible").at("latency_ms").get<double>() <=
        14.0 + 1e-9);
  std::ifstream csv(cli.path("enum/enumeration.csv"));
  std::string header;
  std::getline(csv, header);
  CHECK(header == "arch_json,latency_ms,score");
}

TEST_CASE("the remaining search flags are honored") {
  CliFixture cli;
  REQUIRE(cli.run("gen space --stages 2 --max-depth 3 --configs 3 --out " +
                  cli.path("space.json")) == 0);
  REQUIRE(cli.run("gen table --space " + cli.path("space.json") +
                  " --seed 5 --out " + cli.path("table.json")) == 0);
  REQUIRE(cli.run("gen objective --space " + cli.path("space.json") +
                  " --seed 6 --out " + cli.path("obj.json")) == 0);
  const std::string base = "search --space " + cli.path("space.json") +
                           " --latency-table " + cli.path("table.json") +
                           " --objective " + cli.path("obj.json") +
                           " --budget-ms 14 --iters 80 --seed 4";

  REQUIRE(cli.run(base + " --init lightest --schedule fw2 --block-rule random" +
                  " --exact-mckp --out " + cli.path("flags")) == 0);
  const Json result = parse_json_file(cli.path("flags/result.json"));
  CHECK(result.at("latency_ms").get<double>() <= 14.0 + 1e-9);
  REQUIRE(result.contains("greedy_arch"));
  CHECK(result.at("greedy_latency_ms").get<double>() <= 14.0 + 1e-9);
  const Json manifest = parse_json_file(cli.path("flags/manifest.json"));
  CHECK(manifest.at("init") == "lightest");
  CHECK(manifest.at("schedule") == "fw2");
  CHECK(manifest.at("block_rule") == "random");
  CHECK(manifest.at("exact_mckp") == true);

  REQUIRE(cli.run(base + " --schedule fixed:0.2 --out " + cli.path("fx")) == 0);
  std::ifstream csv(cli.path("fx/trace.csv"));
  std::string line;
  std::getline(csv, line);  // header
  std::getline(csv, line);
  CHECK(line.substr(line.rfind(',') + 1) == "0.20000000000000001");

  CHECK(cli.run(base + " --schedule fixed:1.5 --out " + cli.path("bad")) == 1);
}

TEST_CASE("infeasible budgets exit with code 2") {
  CliFixture cli;
  REQUIRE(cli.run("gen space --stages 2 --max-depth 3 --configs 3 --out " +
                  cli.path("space.json")) == 0);
  REQUIRE(cli.run("gen table --space " + cli.path("space.json") +
                  " --seed 5 --out " + cli.path("table.json")) == 0);
  REQUIRE(cli.run("gen objective --space " + cli.path("space.json") +
                  " --seed 6 --out " + cli.path("obj.json")) == 0);
  CHECK(cli.run("search --space " + cli.path("space.json") +
                " --latency-table " + cli.path("table.json") + " --objective " +
                cli.path("obj.json") + " --budget-ms 0.25 --iters 10 --out " +
                cli.path("run")) == 2);
  CHECK(cli.slurp("stderr.txt").find("minimal achievable") != std::string::npos);
}

TEST_CASE("bad inputs exit with code 1") {
  CliFixture cli;
  CHECK(cli.run("search --space missing.json --latency-table missing.json "
                "--objective missing.json --budget-ms 10 --out " +
                cli.path("run")) == 1);
  write_text_file(cli.path("garbage.json"), "{oops");
  REQUIRE(cli.run("gen space --stages 2 --max-depth 3 --configs 3 --out " +
                  cli.path("space.json")) == 0);
  CHECK(cli.run("gen table --space " + cli.path("garbage.json") + " --out " +
                cli.path("t.json")) == 1);
}

TEST_CASE("toy command writes the comparison table") {
  CliFixture cli;
  // the default grid includes lambda=100, which diverges at the default
  // learning rate; that is exactly what exit code 3 reports
  REQUIRE(cli.run("toy --dim 10 --iters 250 --seed 1 --out " +
                  cli.path("toy")) == 3);
  {
    std::ifstream csv(cli.path("toy/fw_vs_gd.csv"));
    std::string header;
    std::getline(csv, header);
    CHECK(header == "method,lambda,iter,objective,constraint_residual");
  }

  REQUIRE(cli.run("toy --dim 10 --iters 250 --seed 1 --lambdas 0.1 1 --out " +
                  cli.path("toy2")) == 0);
  std::ifstream csv(cli.path("toy2/fw_vs_gd.csv"));
  std::string header;
  std::getline(csv, header);
  int fw_rows = 0, gd_rows = 0;
  for (std::string line; std::getline(csv, line);) {
    if (line.rfind("fw,", 0) == 0) ++fw_rows;
    if (line.rfind("gd,", 0) == 0) ++gd_rows;
  }
  CHECK(fw_rows == 250);
  CHECK(gd_rows == 2 * 250);
}

TEST_CASE("validate-latency reports a unit slope") {
  CliFixture cli;
  REQUIRE(cli.run("gen space --stages 2 --max-depth 3 --configs 3 --out " +
                  cli.path("space.json")) == 0);
  REQUIRE(cli.run("gen table --space " + cli.path("space.json") +
                  " --seed 5 --out " + cli.path("table.json")) == 0);
  REQUIRE(cli.run("validate-latency --space " + cli.path("space.json") +
                  " --latency-table " + cli.path("table.json") +
                  " --samples 20 --mc-samples 4000 --seed 2 --out " +
                  cli.path("val")) == 0);
  const Json fit = Json::parse(cli.slurp("stdout.txt"));
  CHECK(std::abs(fit.at("slope").get<double>() - 1.0) <= 0.02);
  CHECK(fit.at("r2").get<double>() >= 0.98);
}

TEST_CASE("HCNAS_SEED overrides the seed flag") {
  CliFixture cli;
  REQUIRE(cli.run("gen space --stages 2 --max-depth 3 --configs 3 --out " +
                  cli.path("space.json")) == 0);
  REQUIRE(cli.run("gen table --space " + cli.path("space.json") +
                  " --seed 5 --out " + cli.path("table.json")) == 0);
  REQUIRE(cli.run("gen objective --space " + cli.path("space.json") +
                  " --seed 6 --out " + cli.path("obj.json")) == 0);
  const std::string base = "search --space " + cli.path("space.json") +
                           " --latency-table " + cli.path("table.json") +
                           " --objective " + cli.path("obj.json") +
                           " --budget-ms 14 --iters 50";
  REQUIRE(cli.run(base + " --seed 1 --out " + cli.path("a")) == 0);
  REQUIRE(cli.run(base + " --seed 9 --out " + cli.path("b")) == 0);
  REQUIRE(cli.run(base + " --seed 1 --out " + cli.path("c"),
                  "HCNAS_SEED=9") == 0);
  const Json ma = parse_json_file(cli.path("a/manifest.json"));
  const Json mb = parse_json_file(cli.path("b/manifest.json"));
  const Json mc = parse_json_file(cli.path("c/manifest.json"));
  CHECK(ma.at("seed").get<std::uint64_t>() == 1);
  CHECK(mb.at("seed").get<std::uint64_t>() == 9);
  CHECK(mc.at("seed").get<std::uint64_t>() == 9);
  CHECK(cli.slurp("b/trace.csv") == cli.slurp("c/trace.csv"));
}
