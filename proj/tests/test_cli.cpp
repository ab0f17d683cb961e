#include <filesystem>

#include "bitmcts/pipeline.hpp"
#include "doctest.h"
#include "json.hpp"
#include "support/schema_check.hpp"
#include "support/test_util.hpp"

using namespace bitmcts;
using namespace bitmcts::test;

namespace fs = std::filesystem;

TEST_SUITE("cli") {

TEST_CASE("generate with one seed twice produces byte-identical run directories") {
  TempDir tmp("cli-gen");
  const std::string base = " generate --provider synthetic --seed 7 --theme memory"
                           " --theme-id t1 --config /dev/null";
  const auto run1 = run_cli(base + " --out " + (tmp.path() / "a").string());
  const auto run2 = run_cli(base + " --out " + (tmp.path() / "b").string());
  REQUIRE(run1.exit_code == 0);
  REQUIRE(run2.exit_code == 0);

  std::string diff;
  CHECK_MESSAGE(directories_identical(tmp.path() / "a", tmp.path() / "b", &diff), diff);
}

TEST_CASE("different seeds diverge") {
  TempDir tmp("cli-seeds");
  REQUIRE(run_cli(" generate --provider synthetic --seed 7 --theme memory --out " +
                  (tmp.path() / "a").string())
              .exit_code == 0);
  REQUIRE(run_cli(" generate --provider synthetic --seed 8 --theme memory --out " +
                  (tmp.path() / "b").string())
              .exit_code == 0);
  CHECK_FALSE(directories_identical(tmp.path() / "a", tmp.path() / "b"));
}

TEST_CASE("search subcommand stops before the fiction stage") {
  TempDir tmp("cli-search");
  const auto result = run_cli(" search --provider synthetic --seed 3 --theme memory --out " +
                              (tmp.path() / "run").string());
  REQUIRE(result.exit_code == 0);
  CHECK(fs::exists(tmp.path() / "run" / run_files::kRoughOutline));
  CHECK(fs::exists(tmp.path() / "run" / run_files::kRefinedOutline));
  CHECK_FALSE(fs::exists(tmp.path() / "run" / run_files::kFiction));
}

TEST_CASE("dump-tree output validates against the published schema") {
  TempDir tmp("cli-dump");
  REQUIRE(run_cli(" generate --provider synthetic --seed 5 --theme memory --out " +
                  (tmp.path() / "run").string())
              .exit_code == 0);

  for (const char* phase : {"forward", "backward"}) {
    const auto dumped = run_cli(" dump-tree --run " + (tmp.path() / "run").string() +
                                " --phase " + phase);
    REQUIRE(dumped.exit_code == 0);
    const nlohmann::json tree = nlohmann::json::parse(dumped.out);

    const nlohmann::json schema = nlohmann::json::parse(
        slurp_file(fs::path(BITMCTS_SOURCE_DIR) / "docs" / "tree_schema.json"));
    SchemaChecker checker(schema);
    const auto violation = checker.validate(tree);
    CHECK_MESSAGE(!violation.has_value(), violation.value_or(""));
  }
}

TEST_CASE("ablate runs a strategy variant and stamps the metadata") {
  TempDir tmp("cli-ablate");
  const auto result = run_cli(
      " ablate --provider synthetic --seed 11 --theme memory --strategy order-swapped --out " +
      (tmp.path() / "run").string());
  REQUIRE(result.exit_code == 0);
  const nlohmann::json run = nlohmann::json::parse(
      slurp_file(tmp.path() / "run" / run_files::kRun));
  CHECK(run.at("strategy").at("kind") == "order-swapped");
}

TEST_CASE("resume completes a partially wiped run directory") {
  TempDir tmp("cli-resume");
  const std::string dir = (tmp.path() / "run").string();
  REQUIRE(run_cli(" generate --provider synthetic --seed 13 --theme memory --out " + dir)
              .exit_code == 0);
  const std::string fiction_before = slurp_file(fs::path(dir) / run_files::kFiction);
  fs::remove(fs::path(dir) / run_files::kFiction);
  fs::remove(fs::path(dir) / run_files::kMetrics);

  const auto resumed = run_cli(" resume --run " + dir + " --provider synthetic --seed 13");
  REQUIRE(resumed.exit_code == 0);
  CHECK(slurp_file(fs::path(dir) / run_files::kFiction) == fiction_before);
}

TEST_CASE("config errors exit 2 with machine-readable JSON on stderr") {
  const auto result = run_cli(" generate --provider synthetic");  // no theme anywhere
  CHECK(result.exit_code == 2);
  const nlohmann::json err = nlohmann::json::parse(result.err.substr(result.err.find('{')));
  CHECK(err.at("error").at("code") == 2);
  CHECK(err.at("error").contains("message"));

  const auto bad_strategy =
      run_cli(" generate --provider synthetic --theme memory --strategy dfs");
  CHECK(bad_strategy.exit_code == 2);
}

TEST_CASE("an unreachable endpoint exits with the provider-error code") {
  TempDir tmp("cli-dead");
  const auto result =
      run_cli(" generate --provider openai --theme memory"
              " --endpoint http://127.0.0.1:1/v1 --prompts-dir " +
              std::string(BITMCTS_SOURCE_DIR) + "/prompts/en --cache-dir " +
              (tmp.path() / "cache").string() + " --out " + (tmp.path() / "run").string());
  CHECK(result.exit_code == 3);
  const nlohmann::json err = nlohmann::json::parse(result.err.substr(result.err.find('{')));
  CHECK(err.at("error").at("code") == 3);
}

TEST_CASE("offline generate with a cold cache exits with the cache-miss code") {
  TempDir tmp("cli-offline");
  const auto result =
      run_cli(" generate --provider openai --offline --theme memory"
              " --endpoint http://127.0.0.1:1/v1 --prompts-dir " +
              std::string(BITMCTS_SOURCE_DIR) + "/prompts/en --cache-dir " +
              (tmp.path() / "cache").string() + " --out " + (tmp.path() / "run").string());
  CHECK(result.exit_code == 4);
  const nlohmann::json err = nlohmann::json::parse(result.err.substr(result.err.find('{')));
  CHECK(err.at("error").at("code") == 4);
}

TEST_CASE("evaluate lengths over generated artifacts") {
  TempDir tmp("cli-eval");
  // Two systems, one theme each: artifacts laid out as <system>/<theme>/.
  REQUIRE(run_cli(" generate --provider synthetic --seed 1 --theme memory --theme-id t1"
                  " --out " +
                  (tmp.path() / "in" / "sysA" / "t1").string())
              .exit_code == 0);
  REQUIRE(run_cli(" generate --provider synthetic --seed 2 --theme memory --theme-id t1"
                  " --out " +
                  (tmp.path() / "in" / "sysB" / "t1").string())
              .exit_code == 0);

  const auto lengths = run_cli(" evaluate --input " + (tmp.path() / "in").string() +
                               " --mode lengths --out " + (tmp.path() / "out").string());
  REQUIRE(lengths.exit_code == 0);
  CHECK(fs::exists(tmp.path() / "out" / "lengths.csv"));
  const std::string csv = slurp_file(tmp.path() / "out" / "lengths.csv");
  CHECK(csv.find("sysA") != std::string::npos);
  CHECK(csv.find("sysB") != std::string::npos);
}

TEST_CASE("evaluate comparative emits tables and transcripts") {
  TempDir tmp("cli-eval-comp");
  for (const char* sys : {"sysA", "sysB"}) {
    for (const char* theme : {"t1", "t2"}) {
      const std::string seed = std::string(sys) == "sysA" ? "1" : "2";
      REQUIRE(run_cli(" generate --provider synthetic --seed " + seed + " --theme memory" +
                      " --theme-id " + theme + " --out " +
                      (tmp.path() / "in" / sys / theme).string())
                  .exit_code == 0);
    }
  }
  const auto result = run_cli(" evaluate --input " + (tmp.path() / "in").string() +
                              " --mode comparative --judge longest --rounds 4 --with-worst" +
                              " --out " + (tmp.path() / "out").string());
  REQUIRE(result.exit_code == 0);
  for (const char* name : {"win_rates.csv", "win_rates.md", "loss_rates.csv", "rounds.jsonl"}) {
    CHECK_MESSAGE(fs::exists(tmp.path() / "out" / name), name);
  }
  // 2 themes x 4 rounds of transcripts.
  const std::string jsonl = slurp_file(tmp.path() / "out" / "rounds.jsonl");
  CHECK(std::count(jsonl.begin(), jsonl.end(), '\n') == 8);

  const auto pairwise = run_cli(" evaluate --input " + (tmp.path() / "in").string() +
                                " --mode pairwise --judge position-biased --rounds 4" +
                                " --pair sysA,sysB --out " + (tmp.path() / "pw").string());
  REQUIRE(pairwise.exit_code == 0);
  const std::string csv = slurp_file(tmp.path() / "pw" / "pairwise_win_rates.csv");
  // Position bias cancels to exactly 0.5 everywhere.
  CHECK(csv.find("0.5000") != std::string::npos);
}

}  // TEST_SUITE
