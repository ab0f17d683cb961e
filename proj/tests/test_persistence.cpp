#include <thread>

#include "bitmcts/cache.hpp"
#include "bitmcts/config.hpp"
#include "bitmcts/errors.hpp"
#include "bitmcts/pipeline.hpp"
#include "bitmcts/sha256.hpp"
#include "bitmcts/synthetic.hpp"
#include "doctest.h"
#include "support/test_util.hpp"

using namespace bitmcts;
using namespace bitmcts::test;

TEST_SUITE("persistence") {

TEST_CASE("sha256 known-answer vectors") {
  CHECK(Sha256::hash("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(Sha256::hash("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(Sha256::hash("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq") ==
        "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
  // Multi-block input (> 64 bytes).
  CHECK(Sha256::hash(std::string(1000, 'a')) ==
        "41edece42d63e8d9bf515a9ba6932e1c20cbc9f5a5d134645adb5db1b9737ea3");
}

TEST_CASE("cache keys react to every field") {
  const CacheKey base = CacheKey::make("openai", "m1", "prompt", 0.3, 0);
  CHECK(base.digest == CacheKey::make("openai", "m1", "prompt", 0.3, 0).digest);
  CHECK(base.digest != CacheKey::make("openai", "m2", "prompt", 0.3, 0).digest);
  CHECK(base.digest != CacheKey::make("openai", "m1", "prompt!", 0.3, 0).digest);
  CHECK(base.digest != CacheKey::make("openai", "m1", "prompt", 0.4, 0).digest);
  CHECK(base.digest != CacheKey::make("openai", "m1", "prompt", 0.3, 1).digest);
  CHECK(base.digest != CacheKey::make("synthetic", "m1", "prompt", 0.3, 0).digest);
}

TEST_CASE("cache put/get round-trips bytes and is idempotent") {
  TempDir tmp("cache-rt");
  ResponseCache cache(tmp.path());
  const CacheKey key = CacheKey::make("openai", "m", "p", 0.0, 0);
  CHECK_FALSE(cache.get(key).has_value());

  const std::string payload = "raw response \n with newlines \x01 and bytes";
  cache.put(key, payload);
  REQUIRE(cache.get(key).has_value());
  CHECK(*cache.get(key) == payload);

  cache.put(key, payload);  // idempotent overwrite
  CHECK(*cache.get(key) == payload);
}

TEST_CASE("concurrent puts of one key settle on a single consistent file") {
  TempDir tmp("cache-race");
  ResponseCache cache(tmp.path());
  const CacheKey key = CacheKey::make("openai", "m", "contended", 0.0, 0);
  const std::string payload(4096, 'z');

  std::vector<std::thread> writers;
  for (int i = 0; i < 8; ++i) {
    writers.emplace_back([&] {
      for (int j = 0; j < 50; ++j) cache.put(key, payload);
    });
  }
  for (auto& t : writers) t.join();

  REQUIRE(cache.get(key).has_value());
  CHECK(*cache.get(key) == payload);
  // No stray temp files left behind.
  std::size_t files = 0;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(tmp.path())) {
    if (entry.is_regular_file()) ++files;
  }
  CHECK(files == 1);
}

TEST_CASE("config file parsing fills nested keys") {
  TempDir tmp("config");
  const auto path = tmp.path() / "run.conf";
  write_text_file(path, R"(# sample config
theme.id = t9
theme.text = twenty-four solar terms
provider.kind = synthetic   # inline comments start at whitespace + '#' 
synthetic.seed = 99
synthetic.evaluator = length-monotone
search.forward.iterations = 12
search.forward.d_max = 3
search.backward.iterations = 9
strategy.kind = beam
strategy.beam_width = 3
pipeline.refinement = false
output_dir = out
cache_dir = cachehere
verbosity = 1
)");
  const RunConfig config = load_run_config(path);
  CHECK(config.themes.size() == 1);
  CHECK(config.themes[0].id == "t9");
  CHECK(config.themes[0].text == "twenty-four solar terms");
  CHECK(config.synthetic.seed == 99);
  CHECK(config.synthetic.evaluator == SyntheticEvaluatorMode::LengthMonotone);
  CHECK(config.forward.iterations == 12);
  CHECK(config.forward.d_max == 3);
  CHECK(config.backward.iterations == 9);
  CHECK(config.strategy.kind == StrategyKind::Beam);
  CHECK(config.strategy.beam_width == 3);
  CHECK_FALSE(config.refinement_enabled);
  CHECK(config.output_dir == "out");
  CHECK(config.verbosity == 1);
  config.validate();
}

TEST_CASE("config files can carry a theme batch") {
  TempDir tmp("config-batch");
  const auto path = tmp.path() / "batch.conf";
  write_text_file(path, R"(theme.0.id = t0
theme.0.text = dream
theme.1.id = t1
theme.1.text = a letter from 2035
)");
  const RunConfig config = load_run_config(path);
  REQUIRE(config.themes.size() == 2);
  CHECK(config.themes[0].text == "dream");
  CHECK(config.themes[1].id == "t1");
  config.validate();
}

TEST_CASE("unknown config keys and malformed values are rejected") {
  TempDir tmp("config-bad");
  const auto bad_key = tmp.path() / "bad1.conf";
  write_text_file(bad_key, "search.forward.iterationz = 5\n");
  CHECK_THROWS_AS(load_run_config(bad_key), ConfigError);

  const auto bad_value = tmp.path() / "bad2.conf";
  write_text_file(bad_value, "search.forward.iterations = fifty\n");
  CHECK_THROWS_AS(load_run_config(bad_value), ConfigError);

  const auto bad_line = tmp.path() / "bad3.conf";
  write_text_file(bad_line, "just some words\n");
  CHECK_THROWS_AS(load_run_config(bad_line), ConfigError);
}

TEST_CASE("master seed propagates to every component") {
  RunConfig config;
  apply_master_seed(config, 424242);
  CHECK(config.forward.seed == 424242);
  CHECK(config.backward.seed == 424242);
  CHECK(config.synthetic.seed == 424242);
}

TEST_CASE("run directory carries the full stage file set") {
  TempDir tmp("rundir");
  const Theme theme = make_theme("t1", "memory");
  SyntheticProvider provider(SyntheticOptions{.seed = 77});
  PipelineOptions options;
  options.forward.iterations = 5;
  options.forward.d_max = 2;
  options.forward.k_max = 2;
  options.backward = options.forward;
  options.run_dir = tmp.path() / "run";
  run_pipeline(theme, options, provider);

  for (const char* name :
       {run_files::kRun, run_files::kConflict, run_files::kClimax, run_files::kTreeForward,
        run_files::kTreeBackward, run_files::kRoughOutline, run_files::kRefinedOutline,
        run_files::kFiction, run_files::kMetrics}) {
    CHECK_MESSAGE(std::filesystem::exists(options.run_dir / name), name);
  }
  // Tree dumps parse and carry a real root for the MCTS strategy.
  const auto tree = read_json_file(options.run_dir / run_files::kTreeForward);
  CHECK(tree.at("root").is_object());
  CHECK(tree.at("root").at("visits").get<int>() == 5);
}

TEST_CASE("resume after deleting late stages skips early providers entirely") {
  TempDir tmp("resume");
  const Theme theme = make_theme("t1", "memory");
  PipelineOptions options;
  options.forward.iterations = 5;
  options.forward.d_max = 2;
  options.forward.k_max = 2;
  options.backward = options.forward;
  options.run_dir = tmp.path() / "run";

  SyntheticProvider first(SyntheticOptions{.seed = 31});
  const FictionArtifact original = run_pipeline(theme, options, first);

  // Wipe refinement and fiction outputs; resume must redo only those.
  std::filesystem::remove(options.run_dir / run_files::kRefinedOutline);
  std::filesystem::remove(options.run_dir / run_files::kFiction);
  std::filesystem::remove(options.run_dir / run_files::kMetrics);

  SyntheticProvider second(SyntheticOptions{.seed = 31});
  const FictionArtifact resumed = resume_pipeline(options.run_dir, second);

  CHECK(second.counts().get("conflict") == 0);
  CHECK(second.counts().get("climax") == 0);
  CHECK(second.counts().get("propose") == 0);
  CHECK(second.counts().get("screen") == 0);
  CHECK(second.counts().get("bookends") == 1);
  CHECK(second.counts().get("segment") == 3);
  CHECK(resumed.full_text == original.full_text);
  CHECK(to_json(resumed.rough_outline).dump() == to_json(original.rough_outline).dump());
}

TEST_CASE("resume with nothing missing performs zero provider calls") {
  TempDir tmp("resume-z");
  const Theme theme = make_theme("t1", "memory");
  PipelineOptions options;
  options.forward.iterations = 4;
  options.forward.d_max = 2;
  options.forward.k_max = 2;
  options.backward = options.forward;
  options.run_dir = tmp.path() / "run";

  SyntheticProvider first(SyntheticOptions{.seed = 3});
  run_pipeline(theme, options, first);
  SyntheticProvider second(SyntheticOptions{.seed = 3});
  const FictionArtifact resumed = resume_pipeline(options.run_dir, second);
  for (const char* op : {"conflict", "climax", "propose", "score", "bookends", "segment"}) {
    CHECK(second.counts().get(op) == 0);
  }
  CHECK_FALSE(resumed.full_text.empty());
}

TEST_CASE("resume without run.json is a config error") {
  TempDir tmp("resume-bad");
  SyntheticProvider provider(SyntheticOptions{});
  CHECK_THROWS_AS(resume_pipeline(tmp.path(), provider), ConfigError);
}

}  // TEST_SUITE
