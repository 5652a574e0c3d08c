#include "listchurn/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "listchurn/archive.hpp"
#include "listchurn/errors.hpp"
#include "listchurn/metrics.hpp"
#include "listchurn/page.hpp"

namespace listchurn {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

constexpr std::pair<Stage, std::string_view> kStageNames[] = {
    {Stage::kCrawlSites, "crawl-sites"}, {Stage::kCrawlLists, "crawl-lists"},
    {Stage::kExtract, "extract"},        {Stage::kMatch, "match"},
    {Stage::kMetrics, "metrics"},        {Stage::kReport, "report"},
    {Stage::kSimulate, "simulate"},      {Stage::kAll, "all"},
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("IoError", "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw Error("IoError", "cannot write " + path.string());
  }
  fs::rename(tmp, path);
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::vector<std::string> out;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back(line);
  }
  return out;
}

std::string trimmed(std::string s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

struct SiteEntry {
  std::string host;
  RegistrableDomain site;
  std::vector<std::string> countries;  // sorted
};

// Site lists in country order; a site named by several hosts keeps the
// first host seen.
std::vector<SiteEntry> load_sites(const RunConfig& config, const SuffixTable& table) {
  std::map<RegistrableDomain, SiteEntry> by_site;
  for (const auto& [cc, file] : config.site_lists) {
    if (!fs::exists(file)) throw ConfigError("site list for " + cc + " not found: " + file.string());
    int n = 0;
    for (const auto& raw : read_lines(file)) {
      ++n;
      std::string line = trimmed(raw);
      if (line.empty() || line.front() == '#') continue;
      try {
        std::string host =
            line.find("://") != std::string::npos ? parse_url(line).host : normalize_host(line);
        auto site = registrable_domain(host, table, config.psl_mode);
        auto [it, fresh] = by_site.try_emplace(site, SiteEntry{host, site, {}});
        if (std::find(it->second.countries.begin(), it->second.countries.end(), cc) ==
            it->second.countries.end()) {
          it->second.countries.push_back(cc);
        }
      } catch (const Error& e) {
        throw ConfigError(file.string() + ":" + std::to_string(n) + ": " + e.what());
      }
    }
  }
  std::vector<SiteEntry> out;
  for (auto& [_, entry] : by_site) {
    std::sort(entry.countries.begin(), entry.countries.end());
    out.push_back(std::move(entry));
  }
  return out;
}

std::string site_url(const std::string& host) { return "http://" + host + "/"; }

Json skip_json(const std::string& subject, const std::string& url, const TargetDate& target,
               const SkipReason& skip) {
  return Json{{"subject", subject},
              {"url", url},
              {"year", target.year},
              {"quarter", target.quarter},
              {"reason", std::string(to_string(skip.kind))},
              {"attempts", skip.attempts},
              {"detail", skip.detail}};
}

bool is_partial(const SkipReason& skip) {
  return skip.kind != SkipReason::Kind::kNoMemento;
}

// Runs `work(i)` for i in [0, n) on up to `parallel` threads.
template <typename Work>
void parallel_for(std::size_t n, int parallel, Work work) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (true) {
      std::size_t i = next++;
      if (i >= n) return;
      try {
        work(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(parallel, 1)), n);
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<std::string> archive_hosts(const RunConfig& config) {
  auto hosts = default_archive_hosts();
  try {
    auto host = parse_url(config.archive_url).host;
    if (std::find(hosts.begin(), hosts.end(), host) == hosts.end()) hosts.push_back(host);
  } catch (const Error&) {
  }
  return hosts;
}

}  // namespace

std::string_view to_string(Stage stage) {
  for (const auto& [s, name] : kStageNames) {
    if (s == stage) return name;
  }
  return "all";
}

Stage stage_from_string(std::string_view text) {
  for (const auto& [s, name] : kStageNames) {
    if (name == text) return s;
  }
  throw ConfigError("unknown stage: " + std::string(text));
}

Pipeline::Pipeline(RunConfig config, Transport* upstream)
    : config_(std::move(config)), injected_(upstream) {
  validate(config_);
  if (config_.psl_file) {
    owned_suffixes_ = std::make_unique<SuffixTable>(SuffixTable::load_file(config_.psl_file->string()));
    suffixes_ = owned_suffixes_.get();
  } else {
    suffixes_ = &SuffixTable::bundled();
  }
}

Pipeline::~Pipeline() = default;

Transport& Pipeline::transport() {
  if (cache_) return *cache_;
  Transport* up = nullptr;
  if (!config_.offline) {
    up = injected_;
    if (!up) {
      http_ = std::make_unique<HttpTransport>();
      up = http_.get();
    }
    if (config_.rate_limit > 0) {
      auto gap = std::chrono::milliseconds(static_cast<long>(1000.0 / config_.rate_limit));
      paced_ = std::make_unique<PacedTransport>(*up, gap);
      up = paced_.get();
    }
  }
  cache_ = std::make_unique<CachingTransport>(config_.cache_dir, up);
  return *cache_;
}

StageOutcome Pipeline::crawl_sites() {
  const auto sites = load_sites(config_, suffixes());
  const auto targets =
      schedule_intervals(config_.from_year, config_.to_year, config_.interval_months);
  ArchiveClient client(transport(), config_.archive_url);
  RetryPolicy policy;
  policy.max_tries_per_interval = config_.max_tries;
  policy.max_parallel = config_.max_parallel;

  const std::size_t n = sites.size() * targets.size();
  std::vector<FetchResult> results(n);
  parallel_for(n, config_.max_parallel, [&](std::size_t i) {
    const auto& s = sites[i / targets.size()];
    results[i] = client.capture(site_url(s.host), targets[i % targets.size()], policy);
  });

  StageOutcome outcome{Stage::kCrawlSites};
  std::string captures, skips;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = sites[i / targets.size()];
    const auto& t = targets[i % targets.size()];
    if (const auto* snap = std::get_if<FetchedSnapshot>(&results[i])) {
      captures += Json{{"site", s.site.value()},
                       {"url", site_url(s.host)},
                       {"year", t.year},
                       {"quarter", t.quarter},
                       {"memento_url", snap->memento.memento_url},
                       {"memento_timestamp", format_iso_timestamp(snap->memento.memento_timestamp)},
                       {"delta_days", snap->memento.delta_days},
                       {"over_gap", snap->memento.over_gap},
                       {"status", snap->fetch_status},
                       {"attempts", snap->attempts}}
                      .dump() +
                  "\n";
      ++outcome.written;
    } else {
      const auto& skip = std::get<SkipReason>(results[i]);
      skips += skip_json(s.site.value(), site_url(s.host), t, skip).dump() + "\n";
      ++outcome.skipped;
      outcome.partial = outcome.partial || is_partial(skip);
    }
  }
  write_file(layout().captures(), captures);
  write_file(layout().skips(), skips);
  return outcome;
}

StageOutcome Pipeline::crawl_lists() {
  TimelineStore store(layout().store());
  StageOutcome outcome{Stage::kCrawlLists};
  std::string skips;
  const auto targets =
      schedule_intervals(config_.list_start_year(), config_.to_year, config_.interval_months);
  for (const auto& source : config_.blacklists) {
    if (source.path) {
      if (!fs::is_directory(*source.path)) {
        throw ConfigError("blacklist " + source.list_id + ": not a directory: " +
                          source.path->string());
      }
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(*source.path)) {
        if (e.is_regular_file() && e.path().filename().string().front() != '.') {
          files.push_back(e.path());
        }
      }
      std::sort(files.begin(), files.end());
      for (const auto& file : files) {
        Date date;
        try {
          date = parse_iso_date(file.filename().string().substr(0, 10));
        } catch (const Error&) {
          throw ConfigError("blacklist " + source.list_id + ": file name is not a date: " +
                            file.string());
        }
        int y = year_of(date);
        if (y < config_.list_start_year() || y > config_.to_year) continue;
        auto snap = make_snapshot(source.list_id, date, read_file(file), source.format,
                                  suffixes(), config_.psl_mode);
        if (store.put_list_snapshot(ListRecord::from_snapshot(snap))) ++outcome.written;
      }
      continue;
    }

    ArchiveClient client(transport(), config_.archive_url);
    RetryPolicy policy;
    policy.max_tries_per_interval = config_.max_tries;
    std::vector<FetchResult> results(targets.size());
    parallel_for(targets.size(), config_.max_parallel, [&](std::size_t i) {
      results[i] = client.capture(*source.url, targets[i], policy);
    });
    for (std::size_t i = 0; i < targets.size(); ++i) {
      if (const auto* got = std::get_if<FetchedSnapshot>(&results[i])) {
        auto snap = make_snapshot(source.list_id, date_of(got->memento.memento_timestamp),
                                  got->body, source.format, suffixes(), config_.psl_mode);
        if (store.put_list_snapshot(ListRecord::from_snapshot(snap))) ++outcome.written;
      } else {
        const auto& skip = std::get<SkipReason>(results[i]);
        skips += skip_json(source.list_id, *source.url, targets[i], skip).dump() + "\n";
        ++outcome.skipped;
        outcome.partial = outcome.partial || is_partial(skip);
      }
    }
  }
  write_file(layout().list_skips(), skips);
  return outcome;
}

StageOutcome Pipeline::extract() {
  if (!fs::exists(layout().captures())) {
    throw MissingStage("no captures at " + layout().captures().string() + "; run crawl-sites");
  }
  std::map<std::string, std::vector<std::string>> countries;
  for (const auto& s : load_sites(config_, suffixes())) countries[s.site.value()] = s.countries;

  // Bodies come from the cache only; extraction never touches the network.
  CachingTransport replay(config_.cache_dir, nullptr);
  const auto hosts = archive_hosts(config_);
  TimelineStore store(layout().store());
  StageOutcome outcome{Stage::kExtract};
  for (const auto& line : read_lines(layout().captures())) {
    if (line.empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::exception& e) {
      throw ParseError(std::string("captures: ") + e.what());
    }
    const auto site_name = j.at("site").get<std::string>();
    auto cc = countries.find(site_name);
    if (cc == countries.end()) continue;  // dropped from the site lists since the crawl
    MementoRef memento;
    memento.original_url = j.at("url").get<std::string>();
    memento.memento_url = j.at("memento_url").get<std::string>();
    memento.memento_timestamp = parse_iso_timestamp(j.at("memento_timestamp").get<std::string>());
    PageCapture capture{RegistrableDomain::from_canonical(site_name, config_.psl_mode),
                        TargetDate::make(j.at("year").get<int>(), j.at("quarter").get<int>(),
                                         config_.interval_months),
                        memento, "", j.at("status").get<int>()};
    HttpResponse body = replay.get(capture.memento.memento_url);
    capture.body = std::move(body.body);
    auto page = observe_page(capture, suffixes(), config_.psl_mode, hosts);

    ObservationRecord record{page.site,      cc->second,
                             page.year,      page.quarter,
                             page.memento_timestamp, std::move(page.third_party_domains)};
    if (store.put_observation(std::move(record))) ++outcome.written;
  }
  return outcome;
}

StageOutcome Pipeline::match() {
  TimelineStore store(layout().store());
  if (store.observations().empty()) {
    throw MissingStage("no observations in " + layout().store().string() + "; run extract");
  }
  if (store.list_ids().empty()) {
    throw MissingStage("no blacklist snapshots in " + layout().store().string() +
                       "; run crawl-lists");
  }
  const MetricsOptions options{config_.from_year, config_.to_year, config_.first_seen};
  const auto retained = store.complete_sites(config_.from_year, config_.to_year);
  std::vector<DetectionRecord> all;
  for (auto& [_, records] : list_detections(store, options)) {
    all.insert(all.end(), records.begin(), records.end());
  }
  write_detections(layout().detections(), all);

  std::set<std::string> observed;
  for (const auto& [key, _] : store.observations()) observed.insert(std::get<0>(key));
  Json kept = Json::array(), discarded = Json::array();
  for (const auto& s : observed) {
    (retained.count(RegistrableDomain::from_canonical(s, config_.psl_mode)) ? kept : discarded)
        .push_back(s);
  }
  Json countries = Json::object();
  for (const auto& [cc, sites] : store.sites_by_country()) {
    Json members = Json::array();
    for (const auto& s : sites) {
      if (retained.count(s)) members.push_back(s.value());
    }
    countries[cc] = members;
  }
  Json entities{{"from_year", config_.from_year},   {"to_year", config_.to_year},
                {"first_seen", std::string(to_string(config_.first_seen))},
                {"lists", store.list_ids()},         {"retained_sites", kept},
                {"discarded_sites", discarded},      {"countries", countries}};
  write_file(layout().entities(), entities.dump(1) + "\n");
  return {Stage::kMatch, all.size(), 0, false};
}

StageOutcome Pipeline::metrics() {
  if (!fs::exists(layout().entities())) {
    throw MissingStage("no match artifacts at " + layout().entities().string() + "; run match");
  }
  auto detections = read_detections(layout().detections());
  Json entities;
  try {
    entities = Json::parse(read_file(layout().entities()));
  } catch (const Json::exception& e) {
    throw ParseError(std::string("entities: ") + e.what());
  }
  if (entities.at("from_year").get<int>() != config_.from_year ||
      entities.at("to_year").get<int>() != config_.to_year ||
      entities.at("first_seen").get<std::string>() != to_string(config_.first_seen)) {
    throw MissingStage("match artifacts were built with other settings; rerun match");
  }
  auto domain = [&](const Json& v) {
    return RegistrableDomain::from_canonical(v.get<std::string>(), config_.psl_mode);
  };
  std::map<std::string, std::vector<DetectionRecord>> by_list;
  for (const auto& id : entities.at("lists")) by_list[id.get<std::string>()];
  for (auto& d : detections) by_list[d.list_id].push_back(std::move(d));
  std::set<RegistrableDomain> retained;
  for (const auto& s : entities.at("retained_sites")) retained.insert(domain(s));
  std::map<std::string, std::set<RegistrableDomain>> countries;
  for (const auto& [cc, sites] : entities.at("countries").items()) {
    auto& members = countries[cc];
    for (const auto& s : sites) members.insert(domain(s));
  }

  auto inputs = build_entity_inputs(by_list, retained, countries);
  auto bundle = compute_metrics(inputs, config_.from_year, config_.to_year);
  auto tables = report_tables(bundle);
  write_file(layout().metrics(), tables_to_json(tables));
  std::size_t rows = 0;
  for (const auto& t : tables) rows += t.rows.size();
  return {Stage::kMetrics, rows, 0, false};
}

StageOutcome Pipeline::report() {
  if (!fs::exists(layout().metrics())) {
    throw MissingStage("no metrics at " + layout().metrics().string() + "; run metrics");
  }
  auto tables = tables_from_json(read_file(layout().metrics()));
  for (const auto& t : tables) emit_report(t, layout().reports());
  return {Stage::kReport, tables.size(), 0, false};
}

StageOutcome Pipeline::run(Stage stage) {
  switch (stage) {
    case Stage::kCrawlSites:
      return crawl_sites();
    case Stage::kCrawlLists:
      return crawl_lists();
    case Stage::kExtract:
      return extract();
    case Stage::kMatch:
      return match();
    case Stage::kMetrics:
      return metrics();
    case Stage::kReport:
      return report();
    case Stage::kSimulate:
    case Stage::kAll:
      break;
  }
  throw PreconditionError("Pipeline::run handles single pipeline stages only");
}

std::vector<StageOutcome> Pipeline::all() {
  std::vector<StageOutcome> out;
  for (Stage s : {Stage::kCrawlSites, Stage::kCrawlLists, Stage::kExtract, Stage::kMatch,
                  Stage::kMetrics, Stage::kReport}) {
    out.push_back(run(s));
  }
  return out;
}

namespace {

std::string memento_url(const std::string& original, Timestamp t) {
  return std::string(kSimulatedArchive) + "/web/" + format_archive_timestamp(t) + "/" + original;
}

std::string timemap_body(const std::string& original, const std::vector<Timestamp>& times) {
  std::string out = "<" + original + ">; rel=\"original\"";
  for (auto t : times) out += ",\n<" + memento_url(original, t) + ">; rel=\"memento\"";
  return out + "\n";
}

// A page whose external third-party scripts name exactly `domains`, mixed
// with markup the extractor has to see through.
std::string page_html(const std::string& site, Timestamp t, const DomainSet& domains) {
  const std::string ts = format_archive_timestamp(t);
  std::string html = "<!DOCTYPE html>\n<html><head><title>" + site + "</title>\n";
  html += "<script src=\"" + std::string(kSimulatedArchive) +
          "/_static/js/bundle-playback.js\"></script>\n";
  html += "<!-- BEGIN WAYBACK TOOLBAR INSERT -->\n<script src=\"/_static/js/toolbar.js\">"
          "</script>\n<!-- END WAYBACK TOOLBAR INSERT -->\n";
  html += "<script src=\"/web/" + ts + "js_/http://" + site + "/js/main.js\"></script>\n";
  html += "<!-- <script src=\"http://commented-out.invalid/old.js\"></script> -->\n";
  html += "<script>document.write('<script src=\"http://inline.invalid/w.js\"></scr' + "
          "'ipt>');</script>\n</head>\n<body>\n";
  std::size_t k = 0;
  for (const auto& d : domains) {
    switch (k++ % 3) {
      case 0:
        html += "<script type=\"text/javascript\" src=\"" + std::string(kSimulatedArchive) +
                "/web/" + ts + "js_/http://cdn." + d.value() + "/tag.js\"></script>\n";
        break;
      case 1:
        html += "<SCRIPT SRC='//" + d.value() + "/px.js?a=1&amp;b=2'></SCRIPT>\n";
        break;
      default:
        html += "<script async src=http://ad." + d.value() + "/load.js></script>\n";
        break;
    }
  }
  html += "<noscript><img src=\"http://pixel.invalid/p.gif\"></noscript>\n</body></html>\n";
  return html;
}

std::string list_body(const ListRecord& list) {
  std::string out;
  switch (list.source_format) {
    case ListFormat::kFilterList:
      out = "[Adblock Plus 2.0]\n! Title: " + list.list_id + "\n##.ad-banner\n";
      for (const auto& d : list.domains) out += "||" + d.value() + "^$third-party\n";
      break;
    case ListFormat::kHosts:
      out = "# " + list.list_id + "\n127.0.0.1 localhost\n";
      for (const auto& d : list.domains) out += "0.0.0.0 " + d.value() + "\n";
      break;
    default:
      out = "# " + list.list_id + "\n";
      for (const auto& d : list.domains) out += d.value() + "\n";
      break;
  }
  return out;
}

}  // namespace

SimulationSummary simulate(const ScenarioSpec& spec, const fs::path& dir) {
  const Corpus corpus = generate_corpus(spec);
  fs::create_directories(dir);
  SimulationSummary summary;

  write_file(dir / "scenario.json", scenario_to_json(spec));
  std::string obs_lines, list_lines, expected_lines;
  for (const auto& o : corpus.observations) obs_lines += to_json_line(o) + "\n";
  for (const auto& l : corpus.lists) list_lines += to_json_line(l) + "\n";
  for (const auto& e : corpus.expected) {
    expected_lines += Json{{"entity", e.entity},
                           {"year", e.year},
                           {"metric", e.metric},
                           {"value", e.value}}
                          .dump() +
                      "\n";
  }
  write_file(dir / "corpus" / "observations.jsonl", obs_lines);
  write_file(dir / "corpus" / "lists.jsonl", list_lines);
  write_file(dir / "expected.jsonl", expected_lines);
  summary.observations = corpus.observations.size();
  summary.lists = corpus.lists.size();
  summary.expected = corpus.expected.size();

  RunConfig config;
  config.from_year = spec.from_year;
  config.to_year = spec.to_year;
  config.cache_dir = "cache";
  config.out = "run";
  config.archive_url = kSimulatedArchive;
  config.offline = true;
  config.rate_limit = 0;
  config.max_parallel = 2;

  const fs::path cache_dir = dir / "cache";
  fs::remove_all(cache_dir);
  CachingTransport cache(cache_dir, nullptr);
  ArchiveClient urls(cache, kSimulatedArchive);

  // Sites: one timemap each; every capture is preceded by a redirecting
  // memento at the interval start that the crawler has to retry past.
  std::map<std::string, std::vector<const ObservationRecord*>> by_site;
  std::map<std::string, std::set<std::string>> country_sites;
  for (const auto& o : corpus.observations) {
    by_site[o.site.value()].push_back(&o);
    for (const auto& cc : o.country_tags) country_sites[cc].insert(o.site.value());
  }
  for (const auto& [site, observations] : by_site) {
    const std::string original = site_url(site);
    std::vector<Timestamp> times;
    for (const auto* o : observations) {
      Timestamp decoy{TargetDate::make(o->year, o->quarter).nominal_date};
      if (decoy != o->memento_timestamp) {
        times.push_back(decoy);
        cache.put(memento_url(original, decoy),
                  {302, "", memento_url(original, o->memento_timestamp)});
      }
      times.push_back(o->memento_timestamp);
      cache.put(memento_url(original, o->memento_timestamp),
                {200, page_html(site, o->memento_timestamp, o->domains), ""});
    }
    std::sort(times.begin(), times.end());
    cache.put(urls.timemap_url(original), {200, timemap_body(original, times), ""});
  }
  for (const auto& [cc, sites] : country_sites) {
    std::string text = "# " + cc + " site list\n";
    for (const auto& s : sites) text += s + "\n";
    const fs::path file = fs::path("sites") / (cc + ".txt");
    write_file(dir / file, text);
    config.site_lists[cc] = file;
  }

  // Lists: one archived URL per list, one memento per snapshot at noon.
  std::map<std::string, std::vector<const ListRecord*>> by_list;
  for (const auto& l : corpus.lists) by_list[l.list_id].push_back(&l);
  for (const auto& [id, snapshots] : by_list) {
    const std::string original = "http://lists.example/" + id + ".txt";
    std::vector<Timestamp> times;
    for (const auto* l : snapshots) {
      Timestamp t = Timestamp{l->capture_date} + std::chrono::hours(12);
      times.push_back(t);
      cache.put(memento_url(original, t), {200, list_body(*l), ""});
    }
    std::sort(times.begin(), times.end());
    cache.put(urls.timemap_url(original), {200, timemap_body(original, times), ""});
    config.blacklists.push_back({id, original, std::nullopt, snapshots.front()->source_format});
  }
  summary.cached_responses = cache.size();

  summary.config_file = dir / "listchurn.toml";
  write_file(summary.config_file, config_to_toml(config));
  return summary;
}

int exit_code_for(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    if (err->kind() == "ConfigError") return 2;
    if (err->kind() == "ConflictingRecord") return 4;
  }
  return 1;
}

std::string error_record(const std::exception& e, std::string_view stage) {
  const auto* err = dynamic_cast<const Error*>(&e);
  return Json{{"error", err ? err->kind() : std::string("InternalError")},
              {"message", e.what()},
              {"stage", std::string(stage)},
              {"exit_code", exit_code_for(e)}}
      .dump();
}

}  // namespace listchurn
