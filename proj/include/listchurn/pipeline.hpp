#pragma once

#include <exception>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "listchurn/config.hpp"
#include "listchurn/fixture.hpp"
#include "listchurn/report.hpp"
#include "listchurn/transport.hpp"

namespace listchurn {

enum class Stage { kCrawlSites, kCrawlLists, kExtract, kMatch, kMetrics, kReport, kSimulate, kAll };

std::string_view to_string(Stage stage);
Stage stage_from_string(std::string_view text);  // throws ConfigError

// Artifact locations under the output directory.
struct RunLayout {
  std::filesystem::path root;

  std::filesystem::path captures() const { return root / "crawl" / "captures.jsonl"; }
  std::filesystem::path skips() const { return root / "crawl" / "skips.jsonl"; }
  std::filesystem::path list_skips() const { return root / "crawl" / "list_skips.jsonl"; }
  std::filesystem::path store() const { return root / "store"; }
  std::filesystem::path detections() const { return root / "match" / "detections.jsonl"; }
  std::filesystem::path entities() const { return root / "match" / "entities.json"; }
  std::filesystem::path metrics() const { return root / "metrics" / "metrics.json"; }
  std::filesystem::path reports() const { return root / "reports"; }
  std::filesystem::path error() const { return root / "error.json"; }
};

struct StageOutcome {
  Stage stage = Stage::kAll;
  std::size_t written = 0;  // records or files produced
  std::size_t skipped = 0;  // intervals recorded as skips
  // A skip other than a plain coverage gap: retries exhausted or the
  // archive unreachable.
  bool partial = false;
};

// One run over a validated config. Every stage reads the previous stage's
// artifacts from disk, so stages can run in separate invocations.
class Pipeline {
 public:
  // `upstream` replaces the live HTTP client below the cache. Offline
  // configs never reach upstream.
  explicit Pipeline(RunConfig config, Transport* upstream = nullptr);
  ~Pipeline();

  const RunConfig& config() const { return config_; }
  RunLayout layout() const { return {config_.out}; }

  StageOutcome crawl_sites();
  StageOutcome crawl_lists();
  StageOutcome extract();
  StageOutcome match();
  StageOutcome metrics();
  StageOutcome report();
  std::vector<StageOutcome> all();
  StageOutcome run(Stage stage);  // any stage but simulate

 private:
  Transport& transport();
  const SuffixTable& suffixes() const { return *suffixes_; }

  RunConfig config_;
  Transport* injected_;
  std::unique_ptr<Transport> http_;
  std::unique_ptr<Transport> paced_;
  std::unique_ptr<CachingTransport> cache_;
  std::unique_ptr<SuffixTable> owned_suffixes_;
  const SuffixTable* suffixes_ = nullptr;
};

struct SimulationSummary {
  std::filesystem::path config_file;
  std::size_t observations = 0;
  std::size_t lists = 0;
  std::size_t expected = 0;
  std::size_t cached_responses = 0;
};

inline constexpr const char* kSimulatedArchive = "https://web.archive.org";

// Writes the scenario, its corpus, the expected rows, site lists, a
// recorded-response cache that replays the corpus as archive captures, and
// an offline config whose `all` run needs no network.
SimulationSummary simulate(const ScenarioSpec& spec, const std::filesystem::path& dir);

// Exit status for a failure: 2 config, 4 store conflict, 1 otherwise.
int exit_code_for(const std::exception& e);
// {"error": kind, "message": ..., "stage": ..., "exit_code": n}
std::string error_record(const std::exception& e, std::string_view stage);

}  // namespace listchurn
