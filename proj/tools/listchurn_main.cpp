#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "listchurn/errors.hpp"
#include "listchurn/pipeline.hpp"

using namespace listchurn;
namespace fs = std::filesystem;

namespace {

void print_outcome(const StageOutcome& o) {
  std::cout << nlohmann::ordered_json{{"stage", std::string(to_string(o.stage))},
                                      {"written", o.written},
                                      {"skipped", o.skipped},
                                      {"partial", o.partial}}
                   .dump()
            << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Longitudinal churn and update-speed analysis of ad and tracker blacklists"};
  std::string stage_name;
  std::string config_file;
  std::optional<int> from_year, to_year, interval_months, max_parallel;
  std::optional<std::string> cache_dir, psl_mode, out;
  std::optional<double> rate_limit;
  std::string scenario_file;

  app.add_option("stage", stage_name,
                 "crawl-sites, crawl-lists, extract, match, metrics, report, simulate or all")
      ->required();
  app.add_option("--config", config_file, "run configuration (TOML)");
  app.add_option("--from-year", from_year, "first analysed year");
  app.add_option("--to-year", to_year, "last analysed year");
  app.add_option("--interval-months", interval_months, "crawl interval in months (default 3)");
  app.add_option("--cache-dir", cache_dir, "recorded-response cache directory");
  app.add_option("--psl-mode", psl_mode, "suffix-aware or naive");
  app.add_option("--rate-limit", rate_limit, "archive requests per second, 0 for unpaced");
  app.add_option("--max-parallel", max_parallel, "concurrent archive fetches");
  app.add_option("--out", out, "output directory");
  app.add_option("--scenario", scenario_file, "scenario JSON for the simulate stage");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  std::optional<fs::path> out_dir;
  try {
    const Stage stage = stage_from_string(stage_name);

    if (stage == Stage::kSimulate) {
      if (scenario_file.empty()) throw ConfigError("simulate needs --scenario");
      if (!out) throw ConfigError("simulate needs --out");
      out_dir = *out;
      std::ifstream in(scenario_file, std::ios::binary);
      if (!in) throw ConfigError("cannot read scenario " + scenario_file);
      std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      auto summary = simulate(scenario_from_json(text), *out_dir);
      std::cout << nlohmann::ordered_json{{"stage", "simulate"},
                                          {"config", summary.config_file.generic_string()},
                                          {"observations", summary.observations},
                                          {"lists", summary.lists},
                                          {"expected", summary.expected},
                                          {"cached_responses", summary.cached_responses}}
                       .dump()
                << "\n";
      fs::remove(*out_dir / "error.json");
      return 0;
    }

    if (config_file.empty()) throw ConfigError("--config is required for " + stage_name);
    RunConfig config = load_config(config_file);
    if (out) config.out = *out;
    out_dir = config.out;
    if (from_year) config.from_year = *from_year;
    if (to_year) config.to_year = *to_year;
    if (interval_months) config.interval_months = *interval_months;
    if (cache_dir) config.cache_dir = *cache_dir;
    if (psl_mode) config.psl_mode = psl_mode_from_string(*psl_mode);
    if (rate_limit) config.rate_limit = *rate_limit;
    if (max_parallel) config.max_parallel = *max_parallel;

    Pipeline pipeline(config);
    fs::create_directories(config.out);
    fs::remove(pipeline.layout().error());
    std::vector<StageOutcome> outcomes;
    if (stage == Stage::kAll) {
      outcomes = pipeline.all();
    } else {
      outcomes.push_back(pipeline.run(stage));
    }
    bool partial = false;
    for (const auto& o : outcomes) {
      print_outcome(o);
      partial = partial || o.partial;
    }
    return partial ? 3 : 0;
  } catch (const std::exception& e) {
    const std::string record = error_record(e, stage_name);
    std::cerr << record << "\n";
    if (out_dir) {
      std::error_code ec;
      fs::create_directories(*out_dir, ec);
      std::ofstream(*out_dir / "error.json") << record << "\n";
    }
    return exit_code_for(e);
  }
}
