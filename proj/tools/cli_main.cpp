// bitmcts command line: theme-to-fiction pipeline runs, outline-only search,
// strategy ablations, comparative evaluation, tree dumps, and resumption.
// Every failure exits with a machine-readable JSON object on stderr.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "bitmcts/baselines.hpp"
#include "bitmcts/config.hpp"
#include "bitmcts/engine.hpp"
#include "bitmcts/errors.hpp"
#include "bitmcts/eval.hpp"
#include "bitmcts/llm_provider.hpp"
#include "bitmcts/logging.hpp"
#include "bitmcts/pipeline.hpp"
#include "bitmcts/synthetic.hpp"

namespace fs = std::filesystem;
using namespace bitmcts;

namespace {

struct GlobalFlags {
  std::string config_path;
  std::string provider;
  std::string endpoint;
  std::string model;
  std::string prompts_dir;
  std::string cache_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool offline = false;
  bool timestamps = false;
  int verbosity = 2;
};

RunConfig build_config(const GlobalFlags& flags) {
  RunConfig config;
  if (!flags.config_path.empty()) config = load_run_config(flags.config_path);
  if (!flags.provider.empty()) config.provider_kind = flags.provider;
  if (!flags.endpoint.empty()) config.profile.endpoint = flags.endpoint;
  if (!flags.model.empty()) config.profile.model = flags.model;
  if (!flags.prompts_dir.empty()) config.profile.prompts_dir = flags.prompts_dir;
  if (!flags.cache_dir.empty()) config.cache_dir = flags.cache_dir;
  if (flags.seed_set) apply_master_seed(config, flags.seed);
  if (flags.offline) config.offline = true;
  if (flags.timestamps) config.record_timestamps = true;
  config.verbosity = flags.verbosity;
  set_log_level(static_cast<LogLevel>(std::clamp(config.verbosity, 0, 3)));
  return config;
}

struct ProviderBundle {
  std::unique_ptr<StoryProvider> provider;
  std::unique_ptr<ResponseCache> cache;
};

ProviderBundle make_provider(const RunConfig& config) {
  ProviderBundle bundle;
  if (config.provider_kind == "synthetic") {
    bundle.provider = std::make_unique<SyntheticProvider>(config.synthetic);
    return bundle;
  }
  bundle.cache = std::make_unique<ResponseCache>(config.cache_dir);
  bundle.provider = std::make_unique<LlmProvider>(config.profile, bundle.cache.get(),
                                                  config.offline, config.forward.seed);
  return bundle;
}

PipelineOptions pipeline_options(const RunConfig& config, const fs::path& run_dir) {
  PipelineOptions options;
  options.forward = config.forward;
  options.forward.direction = Direction::Forward;
  options.backward = config.backward;
  options.backward.direction = Direction::Backward;
  options.strategy = config.strategy;
  options.refinement_enabled = config.refinement_enabled;
  options.fiction_enabled = config.fiction_enabled;
  options.run_dir = run_dir;
  options.record_timestamps = config.record_timestamps;
  return options;
}

std::string default_run_dir_name(const Theme& theme) {
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(now).count();
  return theme.id + "-" + std::to_string(seconds);
}

int run_generate(const RunConfig& config, const std::string& theme_text,
                 const std::string& theme_id, const std::string& out_dir) {
  RunConfig effective = config;
  if (!theme_text.empty()) {
    effective.themes.clear();
    effective.themes.push_back(
        make_theme(theme_id.empty() ? "theme" : theme_id, theme_text));
  }
  if (effective.themes.empty()) {
    throw ConfigError("no theme given; use --theme or a config file");
  }
  effective.validate();
  for (const auto& theme : effective.themes) {
    ProviderBundle bundle = make_provider(effective);
    const fs::path run_dir = out_dir.empty()
                                 ? effective.output_dir / default_run_dir_name(theme)
                                 : fs::path(out_dir);
    const FictionArtifact artifact =
        run_pipeline(theme, pipeline_options(effective, run_dir), *bundle.provider);
    log_info("run complete: " + run_dir.string() +
             (artifact.complete ? "" : " (incomplete)"));
    std::cout << run_dir.string() << "\n";
  }
  return exit_code::kOk;
}

FictionSet load_fiction_set(const fs::path& input) {
  FictionSet fictions;
  if (!fs::is_directory(input)) {
    throw ConfigError("evaluation input is not a directory: " + input.string());
  }
  for (const auto& system_entry : fs::directory_iterator(input)) {
    if (!system_entry.is_directory()) continue;
    const std::string system_id = system_entry.path().filename().string();
    for (const auto& theme_entry : fs::directory_iterator(system_entry.path())) {
      if (!theme_entry.is_directory()) continue;
      const fs::path fiction = theme_entry.path() / run_files::kFiction;
      if (!fs::exists(fiction)) continue;
      fictions[theme_entry.path().filename().string()][system_id] = read_text_file(fiction);
    }
  }
  if (fictions.empty()) {
    throw ConfigError("no <system>/<theme>/fiction.md artifacts under " + input.string());
  }
  return fictions;
}

std::unique_ptr<Judge> make_judge(const RunConfig& config, const std::string& judge_kind,
                                  ProviderBundle& bundle) {
  if (judge_kind == "longest") return std::make_unique<LongestWinsJudge>();
  if (judge_kind == "position-biased") return std::make_unique<PositionBiasedJudge>();
  if (judge_kind == "seeded") return std::make_unique<SeededJudge>(config.synthetic.seed);
  if (judge_kind == "openai") {
    bundle.cache = std::make_unique<ResponseCache>(config.cache_dir);
    return std::make_unique<LlmJudge>(config.profile, bundle.cache.get(), config.offline);
  }
  throw ConfigError("unknown judge kind: " + judge_kind);
}

int run_evaluate(const RunConfig& config, const std::string& input, const std::string& out_dir,
                 const std::string& mode, const std::string& judge_kind, int rounds,
                 const std::string& pair, bool with_worst, bool with_theme_dim,
                 const std::string& length_mode) {
  const fs::path out = out_dir.empty() ? fs::path("eval-out") : fs::path(out_dir);
  fs::create_directories(out);
  const auto dimensions =
      with_theme_dim ? judge_dimensions_with_theme() : judge_dimensions();

  if (mode == "lengths") {
    const FictionSet fictions = load_fiction_set(input);
    const LengthMode lm = length_mode_from_string(length_mode);
    std::map<std::string, double> means;
    if (lm == LengthMode::ProviderReported) {
      std::map<std::string, std::vector<std::int64_t>> tokens;
      for (const auto& [theme_id, by_system] : fictions) {
        for (const auto& [system_id, text] : by_system) {
          const fs::path metrics = fs::path(input) / system_id / theme_id / run_files::kMetrics;
          const auto j = read_json_file(metrics);
          const auto& reported = j.at("fiction_length").at("reported_tokens");
          if (reported.is_null()) {
            throw ConfigError("no provider-reported tokens for " + system_id + "/" + theme_id);
          }
          tokens[system_id].push_back(reported.get<std::int64_t>());
        }
      }
      means = length_stats_reported(tokens);
    } else {
      std::map<std::string, std::vector<std::string>> texts;
      for (const auto& [theme_id, by_system] : fictions) {
        for (const auto& [system_id, text] : by_system) texts[system_id].push_back(text);
      }
      means = length_stats(texts, lm);
    }
    write_text_file(out / "lengths.csv", length_stats_csv(means));
    write_text_file(out / "lengths.md", length_stats_markdown(means));
    std::cout << length_stats_markdown(means);
    return exit_code::kOk;
  }

  const FictionSet fictions = load_fiction_set(input);
  ProviderBundle judge_bundle;
  std::unique_ptr<Judge> judge = make_judge(config, judge_kind, judge_bundle);

  std::vector<ComparisonRound> all_rounds;
  WinRateTable table;
  if (mode == "comparative") {
    all_rounds = run_comparative(fictions, *judge, rounds, config.synthetic.seed, dimensions,
                                 with_worst);
    table = aggregate_win_rates(all_rounds, dimensions);
    write_text_file(out / "win_rates.csv", win_rate_csv(table));
    write_text_file(out / "win_rates.md", win_rate_markdown(table));
    if (with_worst) {
      const WinRateTable losses =
          aggregate_win_rates(all_rounds, dimensions, PickSection::Worst);
      write_text_file(out / "loss_rates.csv", win_rate_csv(losses));
      write_text_file(out / "loss_rates.md", win_rate_markdown(losses));
    }
  } else if (mode == "pairwise") {
    const auto comma = pair.find(',');
    if (comma == std::string::npos) {
      throw ConfigError("--pair needs two system ids: a,b");
    }
    PairwiseResult result = run_pairwise(pair.substr(0, comma), pair.substr(comma + 1),
                                         fictions, *judge, rounds, config.synthetic.seed,
                                         dimensions);
    all_rounds = std::move(result.rounds);
    table = result.table;
    write_text_file(out / "pairwise_win_rates.csv", win_rate_csv(table));
    write_text_file(out / "pairwise_win_rates.md", win_rate_markdown(table));
  } else {
    throw ConfigError("unknown evaluate mode: " + mode);
  }

  std::string jsonl;
  for (const auto& round : all_rounds) jsonl += to_json(round).dump() + "\n";
  write_text_file(out / "rounds.jsonl", jsonl);
  std::cout << win_rate_markdown(table);
  if (table.invalid_rounds > 0) {
    log_warn(std::to_string(table.invalid_rounds) + " rounds invalid and excluded");
  }
  return exit_code::kOk;
}

int run_dump_tree(const std::string& run_dir, const std::string& phase) {
  const fs::path path = fs::path(run_dir) / (phase == "backward" ? run_files::kTreeBackward
                                                                 : run_files::kTreeForward);
  const nlohmann::json tree = read_json_file(path);
  std::cout << tree.dump(2) << "\n";
  return exit_code::kOk;
}

void print_error_json(int code, const std::string& kind, const std::string& message) {
  const nlohmann::json err = {
      {"error", {{"code", code}, {"kind", kind}, {"message", message}}}};
  std::cerr << err.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Climax-anchored bidirectional MCTS fiction pipeline"};
  app.require_subcommand(1);

  GlobalFlags flags;
  app.add_option("--config", flags.config_path, "Run configuration file");
  app.add_option("--provider", flags.provider, "Provider backend: synthetic | openai");
  app.add_option("--endpoint", flags.endpoint, "OpenAI-compatible API base URL");
  app.add_option("--model", flags.model, "Model name for the LLM backend");
  app.add_option("--prompts-dir", flags.prompts_dir, "Prompt template directory");
  app.add_option("--cache-dir", flags.cache_dir, "Response cache directory");
  auto* seed_opt = app.add_option("--seed", flags.seed, "Master seed for all components");
  app.add_flag("--offline", flags.offline, "Serve everything from cache; fail on miss");
  app.add_flag("--timestamps", flags.timestamps,
               "Record wall-clock timestamps in artifacts (breaks byte reproducibility)");
  app.add_option("-v,--verbosity", flags.verbosity, "0=error 1=warn 2=info 3=debug");

  std::string theme_text, theme_id, out_dir, strategy, run_dir, phase = "forward";
  std::string eval_input, eval_mode = "comparative", judge_kind = "longest", pair;
  std::string length_mode = "codepoints";
  int rounds = 4;
  bool no_refinement = false, with_worst = false, with_theme_dim = false;

  auto add_theme_opts = [&](CLI::App* cmd) {
    cmd->add_option("--theme", theme_text, "Theme text");
    cmd->add_option("--theme-id", theme_id, "Stable theme identifier");
    cmd->add_option("--out", out_dir, "Run directory (default: <output_dir>/<theme>-<time>)");
    cmd->add_option("--strategy", strategy,
                    "bit-mcts | beam | best-of-n | direct | unidirectional-forward | "
                    "order-swapped | no-early-stop");
    cmd->add_flag("--no-refinement", no_refinement, "Skip the outline refinement stage");
  };

  auto* generate = app.add_subcommand("generate", "Run the full theme-to-fiction pipeline");
  generate->fallthrough();
  add_theme_opts(generate);
  auto* search = app.add_subcommand("search", "Produce an outline only (no fiction stage)");
  search->fallthrough();
  add_theme_opts(search);
  auto* ablate = app.add_subcommand("ablate", "Run a strategy variant end to end");
  ablate->fallthrough();
  add_theme_opts(ablate);

  auto* evaluate = app.add_subcommand("evaluate", "Comparative / pairwise / length evaluation");
  evaluate->fallthrough();
  evaluate->add_option("--input", eval_input, "Directory of <system>/<theme>/ artifacts")
      ->required();
  evaluate->add_option("--out", out_dir, "Report output directory");
  evaluate->add_option("--mode", eval_mode, "comparative | pairwise | lengths");
  evaluate->add_option("--judge", judge_kind, "longest | position-biased | seeded | openai");
  evaluate->add_option("--rounds", rounds, "Rounds per theme (pairwise: must be even)");
  evaluate->add_option("--pair", pair, "Pairwise system ids: a,b");
  evaluate->add_flag("--with-worst", with_worst, "Also collect worst picks (loss rates)");
  evaluate->add_flag("--with-theme-dimension", with_theme_dim,
                     "Add the thematic-expression dimension");
  evaluate->add_option("--length-mode", length_mode,
                       "codepoints | whitespace-tokens | provider-reported");

  auto* dump_tree = app.add_subcommand("dump-tree", "Print a persisted search tree as JSON");
  dump_tree->fallthrough();
  dump_tree->add_option("--run", run_dir, "Run directory")->required();
  dump_tree->add_option("--phase", phase, "forward | backward");

  auto* resume = app.add_subcommand("resume", "Continue a persisted run from its last stage");
  resume->fallthrough();
  resume->add_option("--run", run_dir, "Run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cout << app.help();
    print_error_json(exit_code::kConfig, "cli", e.what());
    return exit_code::kConfig;
  }
  flags.seed_set = seed_opt->count() > 0;

  try {
    RunConfig config = build_config(flags);
    if (!strategy.empty()) config.strategy.kind = strategy_kind_from_string(strategy);
    if (no_refinement) config.refinement_enabled = false;

    if (generate->parsed() || ablate->parsed()) {
      return run_generate(config, theme_text, theme_id, out_dir);
    }
    if (search->parsed()) {
      config.fiction_enabled = false;
      return run_generate(config, theme_text, theme_id, out_dir);
    }
    if (evaluate->parsed()) {
      return run_evaluate(config, eval_input, out_dir, eval_mode, judge_kind, rounds, pair,
                          with_worst, with_theme_dim, length_mode);
    }
    if (dump_tree->parsed()) {
      return run_dump_tree(run_dir, phase);
    }
    if (resume->parsed()) {
      ProviderBundle bundle = make_provider(config);
      const FictionArtifact artifact = resume_pipeline(run_dir, *bundle.provider);
      log_info("resumed run complete: " + run_dir +
               (artifact.complete ? "" : " (incomplete)"));
      std::cout << run_dir << "\n";
      return exit_code::kOk;
    }
    throw ConfigError("no subcommand given");
  } catch (const Error& e) {
    print_error_json(e.exit_code(), "bitmcts", e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    print_error_json(1, "unexpected", e.what());
    return 1;
  }
}
