#include "listchurn/store.hpp"

#include <algorithm>
#include <fstream>

#include "json.hpp"
#include "listchurn/errors.hpp"

namespace listchurn {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kObservationsFile = "observations.jsonl";
constexpr const char* kListsFile = "lists.jsonl";

json domains_json(const DomainSet& set) {
  json arr = json::array();
  for (const auto& d : set) arr.push_back(d.value());
  return arr;
}

DomainSet domains_from(const json& arr) {
  DomainSet out;
  for (const auto& v : arr) out.insert(RegistrableDomain::from_canonical(v.get<std::string>()));
  return out;
}

template <typename F>
auto parse_line(std::string_view line, const char* what, F&& build) {
  try {
    return build(json::parse(line));
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad ") + what + " record: " + e.what());
  } catch (const InvalidHost& e) {
    throw ParseError(std::string("bad ") + what + " record: " + e.what());
  } catch (const UnderspecifiedHost& e) {
    throw ParseError(std::string("bad ") + what + " record: " + e.what());
  }
}

template <typename F>
void read_lines(const fs::path& file, F&& each) {
  std::ifstream in(file);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) each(line);
  }
}

}  // namespace

std::string_view to_string(FirstSeenScope scope) {
  return scope == FirstSeenScope::kGlobal ? "global" : "year-local";
}

FirstSeenScope first_seen_scope_from_string(std::string_view text) {
  if (text == "year-local") return FirstSeenScope::kYearLocal;
  if (text == "global") return FirstSeenScope::kGlobal;
  throw ConfigError("unknown first-seen scope: " + std::string(text));
}

ListRecord ListRecord::from_snapshot(const BlacklistSnapshot& s) {
  return ListRecord{s.list_id, s.capture_date, s.domains, s.source_format, s.rule_count};
}

DetectionRecord make_detection(RegistrableDomain domain, RegistrableDomain site, int year,
                               Date web_first_seen, std::string list_id, Date list_first_seen,
                               Date list_earliest_snapshot) {
  long raw = days_between(web_first_seen, list_first_seen);
  bool first_snapshot = list_first_seen == list_earliest_snapshot;
  // Listed in the first snapshot and seen no later: the real listing date
  // is unknown, so count it as a one-day reaction.
  long td = first_snapshot && raw >= 0 ? 1 : raw;
  return DetectionRecord{std::move(domain),   std::move(site), year, web_first_seen,
                         std::move(list_id),  list_first_seen, td,   first_snapshot,
                         web_first_seen < list_earliest_snapshot};
}

TimelineStore::TimelineStore(fs::path dir) : dir_(std::move(dir)) {
  fs::create_directories(*dir_);
  read_lines(*dir_ / kObservationsFile,
             [&](const std::string& line) { insert_observation(observation_from_json(line)); });
  read_lines(*dir_ / kListsFile,
             [&](const std::string& line) { insert_list(list_record_from_json(line)); });
}

void TimelineStore::append(const std::string& file, const std::string& line) const {
  if (!dir_) return;
  std::ofstream out(*dir_ / file, std::ios::app);
  out << line << '\n';
  if (!out) throw Error("IoError", "cannot append to " + (*dir_ / file).string());
}

bool TimelineStore::insert_observation(ObservationRecord record) {
  if (record.country_tags.empty()) throw PreconditionError("observation without country tags");
  if (record.quarter < 1) throw PreconditionError("observation quarter must be >= 1");
  std::sort(record.country_tags.begin(), record.country_tags.end());
  record.country_tags.erase(std::unique(record.country_tags.begin(), record.country_tags.end()),
                            record.country_tags.end());
  ObservationKey key{record.site.value(), record.year, record.quarter};
  auto it = observations_.find(key);
  if (it != observations_.end()) {
    if (it->second == record) return false;
    throw ConflictingRecord("observation " + record.site.value() + " " +
                            std::to_string(record.year) + "Q" + std::to_string(record.quarter) +
                            " differs from the stored one");
  }
  observations_.emplace(std::move(key), std::move(record));
  return true;
}

bool TimelineStore::put_observation(ObservationRecord record) {
  std::sort(record.country_tags.begin(), record.country_tags.end());
  std::string line = to_json_line(record);
  bool added = insert_observation(std::move(record));
  if (added) append(kObservationsFile, line);
  return added;
}

bool TimelineStore::insert_list(ListRecord record) {
  if (record.list_id.empty()) throw PreconditionError("list record without list_id");
  auto& index = lists_[record.list_id];
  auto it = index.snapshots.find(record.capture_date);
  if (it != index.snapshots.end()) {
    if (it->second == record) return false;
    throw ConflictingRecord("list " + record.list_id + " snapshot " +
                            format_iso_date(record.capture_date) + " differs from the stored one");
  }
  for (const auto& d : record.domains) {
    auto [pos, fresh] = index.first_seen.emplace(d, record.capture_date);
    if (!fresh && record.capture_date < pos->second) pos->second = record.capture_date;
  }
  index.snapshots.emplace(record.capture_date, std::move(record));
  return true;
}

bool TimelineStore::put_list_snapshot(ListRecord record) {
  std::string line = to_json_line(record);
  bool added = insert_list(std::move(record));
  if (added) append(kListsFile, line);
  return added;
}

const TimelineStore::ListIndex& TimelineStore::list_index(const std::string& list_id) const {
  auto it = lists_.find(list_id);
  if (it == lists_.end()) throw UnknownList("no snapshots registered for list " + list_id);
  return it->second;
}

std::vector<std::string> TimelineStore::list_ids() const {
  std::vector<std::string> ids;
  for (const auto& [id, _] : lists_) ids.push_back(id);
  return ids;
}

std::vector<ListRecord> TimelineStore::snapshots(const std::string& list_id) const {
  std::vector<ListRecord> out;
  for (const auto& [_, r] : list_index(list_id).snapshots) out.push_back(r);
  return out;
}

DomainSet TimelineStore::list_universe(const std::string& list_id) const {
  DomainSet out;
  for (const auto& [d, _] : list_index(list_id).first_seen) out.insert(d);
  return out;
}

Date TimelineStore::earliest_snapshot(const std::string& list_id) const {
  return list_index(list_id).snapshots.begin()->first;
}

std::optional<FirstSeen> TimelineStore::list_first_seen(const RegistrableDomain& domain,
                                                        const std::string& list_id) const {
  const ListIndex& index = list_index(list_id);
  auto it = index.first_seen.find(domain);
  if (it == index.first_seen.end()) return std::nullopt;
  return FirstSeen{it->second, it->second == index.snapshots.begin()->first};
}

std::set<RegistrableDomain> TimelineStore::complete_sites(int from_year, int to_year) const {
  std::map<RegistrableDomain, std::set<int>> years;
  for (const auto& [_, obs] : observations_) {
    if (obs.year >= from_year && obs.year <= to_year) years[obs.site].insert(obs.year);
  }
  std::set<RegistrableDomain> out;
  const std::size_t needed = static_cast<std::size_t>(std::max(0, to_year - from_year + 1));
  for (auto& [site, ys] : years) {
    if (ys.size() == needed) out.insert(site);
  }
  return out;
}

std::map<std::string, std::set<RegistrableDomain>> TimelineStore::sites_by_country() const {
  std::map<std::string, std::set<RegistrableDomain>> out;
  for (const auto& [_, obs] : observations_) {
    for (const auto& c : obs.country_tags) out[c].insert(obs.site);
  }
  return out;
}

std::vector<DetectionRecord> TimelineStore::build_detections(
    int year, const std::string& list_id, FirstSeenScope scope,
    const std::set<RegistrableDomain>* sites) const {
  const ListIndex& index = list_index(list_id);
  const Date earliest = index.snapshots.begin()->first;

  // (site, domain) -> earliest sighting within the year.
  std::map<std::pair<RegistrableDomain, RegistrableDomain>, Timestamp> seen;
  for (const auto& [_, obs] : observations_) {
    if (obs.year != year) continue;
    if (sites && !sites->count(obs.site)) continue;
    for (const auto& d : obs.domains) {
      if (!index.first_seen.count(d)) continue;
      auto [pos, fresh] = seen.emplace(std::pair{obs.site, d}, obs.memento_timestamp);
      if (!fresh && obs.memento_timestamp < pos->second) pos->second = obs.memento_timestamp;
    }
  }
  if (scope == FirstSeenScope::kGlobal) {
    for (const auto& [_, obs] : observations_) {
      if (obs.year >= year) continue;
      for (const auto& d : obs.domains) {
        auto pos = seen.find(std::pair{obs.site, d});
        if (pos != seen.end() && obs.memento_timestamp < pos->second) {
          pos->second = obs.memento_timestamp;
        }
      }
    }
  }

  std::vector<DetectionRecord> out;
  out.reserve(seen.size());
  for (const auto& [key, ts] : seen) {
    out.push_back(make_detection(key.second, key.first, year, date_of(ts), list_id,
                                 index.first_seen.at(key.second), earliest));
  }
  return out;
}

std::vector<DetectionRecord> union_detections(const std::vector<DetectionRecord>& records) {
  std::map<std::tuple<std::string, std::string, int>, const DetectionRecord*> best;
  for (const auto& r : records) {
    auto key = std::tuple{r.site.value(), r.domain.value(), r.year};
    auto [pos, fresh] = best.emplace(key, &r);
    if (fresh) continue;
    const DetectionRecord* cur = pos->second;
    if (r.list_first_seen < cur->list_first_seen ||
        (r.list_first_seen == cur->list_first_seen && r.list_id < cur->list_id)) {
      pos->second = &r;
    }
  }
  std::vector<DetectionRecord> out;
  out.reserve(best.size());
  for (const auto& [_, r] : best) out.push_back(*r);
  return out;
}

std::string to_json_line(const ObservationRecord& r) {
  json j = {{"site", r.site.value()},
            {"country_tags", r.country_tags},
            {"year", r.year},
            {"quarter", r.quarter},
            {"memento_timestamp", format_iso_timestamp(r.memento_timestamp)},
            {"domains", domains_json(r.domains)}};
  return j.dump();
}

std::string to_json_line(const ListRecord& r) {
  json j = {{"list_id", r.list_id},
            {"capture_date", format_iso_date(r.capture_date)},
            {"domains", domains_json(r.domains)},
            {"source_format", std::string(to_string(r.source_format))},
            {"rule_count", r.rule_count}};
  return j.dump();
}

std::string to_json_line(const DetectionRecord& r) {
  json j = {{"domain", r.domain.value()},
            {"site", r.site.value()},
            {"year", r.year},
            {"web_first_seen", format_iso_date(r.web_first_seen)},
            {"list_id", r.list_id},
            {"list_first_seen", format_iso_date(r.list_first_seen)},
            {"time_difference_days", r.time_difference_days},
            {"first_snapshot", r.first_snapshot},
            {"censored", r.censored}};
  return j.dump();
}

ObservationRecord observation_from_json(std::string_view line) {
  return parse_line(line, "observation", [](const json& j) {
    return ObservationRecord{
        RegistrableDomain::from_canonical(j.at("site").get<std::string>()),
        j.at("country_tags").get<std::vector<std::string>>(),
        j.at("year").get<int>(),
        j.at("quarter").get<int>(),
        parse_iso_timestamp(j.at("memento_timestamp").get<std::string>()),
        domains_from(j.at("domains"))};
  });
}

ListRecord list_record_from_json(std::string_view line) {
  return parse_line(line, "list", [](const json& j) {
    return ListRecord{j.at("list_id").get<std::string>(),
                      parse_iso_date(j.at("capture_date").get<std::string>()),
                      domains_from(j.at("domains")),
                      list_format_from_string(j.at("source_format").get<std::string>()),
                      j.at("rule_count").get<std::size_t>()};
  });
}

DetectionRecord detection_from_json(std::string_view line) {
  return parse_line(line, "detection", [](const json& j) {
    return DetectionRecord{RegistrableDomain::from_canonical(j.at("domain").get<std::string>()),
                           RegistrableDomain::from_canonical(j.at("site").get<std::string>()),
                           j.at("year").get<int>(),
                           parse_iso_date(j.at("web_first_seen").get<std::string>()),
                           j.at("list_id").get<std::string>(),
                           parse_iso_date(j.at("list_first_seen").get<std::string>()),
                           j.at("time_difference_days").get<long>(),
                           j.value("first_snapshot", false),
                           j.value("censored", false)};
  });
}

void write_detections(const fs::path& file, const std::vector<DetectionRecord>& records) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  fs::path tmp = file;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    for (const auto& r : records) out << to_json_line(r) << '\n';
    if (!out) throw Error("IoError", "cannot write " + tmp.string());
  }
  fs::rename(tmp, file);
}

std::vector<DetectionRecord> read_detections(const fs::path& file) {
  if (!fs::exists(file)) throw MissingStage("no detections at " + file.string());
  std::vector<DetectionRecord> out;
  read_lines(file, [&](const std::string& line) { out.push_back(detection_from_json(line)); });
  return out;
}

}  // namespace listchurn
