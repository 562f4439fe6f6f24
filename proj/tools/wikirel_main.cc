// wikirel: command line front end of the pipeline.
//
//   wikirel run --config wikirel.ini
//   wikirel score --config wikirel.ini --language en --model PR
//
// Exit status: 0 success, 1 a stage failed, 2 bad config or usage.

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>

#include "wikirel/config.h"
#include "wikirel/pipeline.h"

namespace {

using wikirel::Stage;

struct Options {
  std::string config = "wikirel.ini";
  std::vector<std::string> languages;
  std::string from, to;
  std::string output;
  std::vector<std::string> models;
  int top_k = 0;
  unsigned threads = 0;
  bool offline = false;
  std::vector<std::string> force;
  bool verbose = false;
  bool quiet = false;
};

const std::map<std::string, std::set<Stage>>& commands() {
  static const std::map<std::string, std::set<Stage>> c{
      {"identify", {Stage::kIdentify}},
      {"fetch", {Stage::kFetch}},
      {"extract", {Stage::kExtract, Stage::kResolve}},
      {"views", {Stage::kViews}},
      {"score", {Stage::kSnapshot, Stage::kScore}},
      {"report", {Stage::kReport}},
      {"run", {Stage::kReport}},
  };
  return c;
}

const char* describe(const std::string& name) {
  if (name == "identify") return "Identify the corpus articles of each language";
  if (name == "fetch") return "Fetch the revision histories and templates of the corpus";
  if (name == "extract") return "Extract cited URLs and resolve them to domains";
  if (name == "views") return "Collect daily page views of the corpus";
  if (name == "score") return "Build daily snapshots and compute source scores";
  if (name == "report") return "Write rank timelines and the language heatmap";
  return "Run every stage (reusing current artifacts)";
}

wikirel::PipelineConfig apply_overrides(wikirel::PipelineConfig cfg, const Options& o) {
  std::vector<std::string> problems;
  auto date = [&](const std::string& s, const char* flag) {
    auto d = wikirel::Date::parse(s);
    if (!d) problems.push_back(std::string(flag) + ": expected YYYY-MM-DD, got '" + s + "'");
    return d;
  };
  if (!o.from.empty()) {
    if (auto d = date(o.from, "--from")) cfg.window.from = *d;
  }
  if (!o.to.empty()) {
    if (auto d = date(o.to, "--to")) cfg.window.to = *d;
  }
  if (!o.models.empty()) {
    cfg.models.clear();
    for (const auto& m : o.models) {
      auto id = wikirel::parse_model_id(m);
      if (!id) problems.push_back("--model: unknown model '" + m + "'");
      else if (std::find(cfg.models.begin(), cfg.models.end(), *id) == cfg.models.end()) cfg.models.push_back(*id);
    }
  }
  if (!o.output.empty()) cfg.output_dir = std::filesystem::absolute(o.output);
  if (o.top_k) cfg.top_k = o.top_k;
  if (o.threads) cfg.threads = o.threads;
  if (!problems.empty()) throw wikirel::ConfigError(std::move(problems));
  return cfg;
}

int run(const std::string& command, const Options& o) {
  auto log = spdlog::stderr_color_mt("wikirel");
  log->set_pattern("%Y-%m-%dT%H:%M:%S %^%l%$ %v");
  log->set_level(o.quiet ? spdlog::level::warn : o.verbose ? spdlog::level::debug : spdlog::level::info);

  wikirel::RunOptions options;
  options.targets = commands().at(command);
  options.offline = o.offline;
  options.languages = {o.languages.begin(), o.languages.end()};
  options.log = [&](std::string_view msg) {
    if (msg.rfind("warning: ", 0) == 0) log->warn("{}", msg.substr(9));
    else log->info("{}", msg);
  };

  try {
    for (const auto& f : o.force) {
      auto s = wikirel::parse_stage(f);
      if (!s) throw wikirel::ConfigError({"--force: unknown stage '" + f + "'"});
      options.force.insert(*s);
    }
    auto cfg = apply_overrides(wikirel::load_config(o.config), o);
    log->debug("config {} fingerprint {}", o.config, wikirel::config_fingerprint(cfg));
    auto result = wikirel::run_pipeline(cfg, options);
    for (const auto& s : result.stages) {
      if (s.diagnostics.total() == 0) continue;
      for (const auto& [code, n] : s.diagnostics.counts()) {
        log->debug("{}: {} x{}", wikirel::to_string(s.stage), code, n);
      }
    }
    if (!result.ok) {
      log->error("stage {} failed: {}", wikirel::to_string(*result.failed_stage), result.error);
      log->error("manifest written to {}", (cfg.output_dir / "manifest.json").string());
      return 1;
    }
    log->info("done; {} network requests, outputs in {}", result.network_calls, cfg.output_dir.string());
    return 0;
  } catch (const wikirel::ConfigError& e) {
    log->error("{}", e.what());
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Source reliability scores from encyclopedia citation histories"};
  app.set_version_flag("--version", std::string(wikirel::library_version()));
  app.require_subcommand(1);

  Options o;
  app.add_option("-c,--config", o.config, "Pipeline config file")->capture_default_str();
  app.add_option("-l,--language", o.languages, "Restrict to a language (repeatable)");
  app.add_option("--from", o.from, "Window start, YYYY-MM-DD");
  app.add_option("--to", o.to, "Window end, YYYY-MM-DD");
  app.add_option("-o,--output", o.output, "Output directory (overrides the config)");
  app.add_option("-m,--model", o.models, "F, PR or PR2 (repeatable)");
  app.add_option("-k,--top-k", o.top_k, "Domains ranked this high in some month are reported")
      ->check(CLI::PositiveNumber);
  app.add_option("-j,--threads", o.threads, "Worker threads (0 = all cores)");
  app.add_flag("--offline", o.offline, "Serve every request from the cache");
  app.add_option("--force", o.force, "Rerun this stage even if current (repeatable)");
  app.add_flag("-v,--verbose", o.verbose, "Debug logging");
  app.add_flag("-q,--quiet", o.quiet, "Warnings and errors only");

  for (const auto& [name, _] : commands()) {
    app.add_subcommand(name, describe(name))->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  return run(app.get_subcommands().front()->get_name(), o);
}
