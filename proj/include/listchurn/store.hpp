#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "listchurn/blacklist.hpp"
#include "listchurn/calendar.hpp"
#include "listchurn/domain.hpp"

namespace listchurn {

struct ObservationRecord {
  RegistrableDomain site;
  std::vector<std::string> country_tags;  // sorted, non-empty
  int year = 0;
  int quarter = 0;
  Timestamp memento_timestamp;
  DomainSet domains;

  friend bool operator==(const ObservationRecord&, const ObservationRecord&) = default;
};

struct ListRecord {
  std::string list_id;
  Date capture_date;
  DomainSet domains;
  ListFormat source_format = ListFormat::kUnknown;
  std::size_t rule_count = 0;

  static ListRecord from_snapshot(const BlacklistSnapshot& s);

  friend bool operator==(const ListRecord&, const ListRecord&) = default;
};

// time_difference_days = list_first_seen - web_first_seen. Positive means
// the domain was on the web first (reactive), zero or negative means the
// list had it first (proactive).
struct DetectionRecord {
  RegistrableDomain domain;
  RegistrableDomain site;
  int year = 0;
  Date web_first_seen;
  std::string list_id;
  Date list_first_seen;
  long time_difference_days = 0;
  bool first_snapshot = false;  // domain present in the list's earliest snapshot
  bool censored = false;        // web_first_seen precedes the earliest snapshot

  bool reactive() const { return time_difference_days > 0; }

  friend bool operator==(const DetectionRecord&, const DetectionRecord&) = default;
};

enum class FirstSeenScope { kYearLocal, kGlobal };

std::string_view to_string(FirstSeenScope scope);
FirstSeenScope first_seen_scope_from_string(std::string_view text);

// Applies the first-snapshot rule and the censoring flag.
DetectionRecord make_detection(RegistrableDomain domain, RegistrableDomain site, int year,
                               Date web_first_seen, std::string list_id, Date list_first_seen,
                               Date list_earliest_snapshot);

struct FirstSeen {
  Date date;
  bool first_snapshot = false;
};

// Observations and list snapshots with first-seen indexes. Opened on a
// directory, new records are appended to observations.jsonl / lists.jsonl;
// default-constructed stores live in memory only.
class TimelineStore {
 public:
  using ObservationKey = std::tuple<std::string, int, int>;  // site, year, quarter

  TimelineStore() = default;
  explicit TimelineStore(std::filesystem::path dir);

  // True when the record was new. Throws ConflictingRecord when the key
  // exists with different content, PreconditionError on invariant breaks.
  bool put_observation(ObservationRecord record);
  bool put_list_snapshot(ListRecord record);

  const std::map<ObservationKey, ObservationRecord>& observations() const {
    return observations_;
  }
  std::vector<std::string> list_ids() const;
  std::vector<ListRecord> snapshots(const std::string& list_id) const;
  // Union of every snapshot of the list.
  DomainSet list_universe(const std::string& list_id) const;
  Date earliest_snapshot(const std::string& list_id) const;

  // Throws UnknownList.
  std::optional<FirstSeen> list_first_seen(const RegistrableDomain& domain,
                                           const std::string& list_id) const;

  // Sites with at least one observation in every year of [from, to].
  std::set<RegistrableDomain> complete_sites(int from_year, int to_year) const;
  // Sites tagged with each country code.
  std::map<std::string, std::set<RegistrableDomain>> sites_by_country() const;

  // One record per (site, domain) observed in `year` whose domain the list
  // ever contained. `sites`, when given, restricts the sites considered.
  std::vector<DetectionRecord> build_detections(
      int year, const std::string& list_id, FirstSeenScope scope = FirstSeenScope::kYearLocal,
      const std::set<RegistrableDomain>* sites = nullptr) const;

 private:
  struct ListIndex {
    std::map<Date, ListRecord> snapshots;
    std::map<RegistrableDomain, Date> first_seen;
  };

  const ListIndex& list_index(const std::string& list_id) const;
  bool insert_observation(ObservationRecord record);
  bool insert_list(ListRecord record);
  void append(const std::string& file, const std::string& line) const;

  std::optional<std::filesystem::path> dir_;
  std::map<ObservationKey, ObservationRecord> observations_;
  std::map<std::string, ListIndex> lists_;
};

// Earliest-listed detection per (site, domain, year) across lists; ties go
// to the smaller list_id. Used for country and global scope.
std::vector<DetectionRecord> union_detections(const std::vector<DetectionRecord>& records);

// JSON-lines (de)serialization, field names as in the record types.
std::string to_json_line(const ObservationRecord& r);
std::string to_json_line(const ListRecord& r);
std::string to_json_line(const DetectionRecord& r);
ObservationRecord observation_from_json(std::string_view line);
ListRecord list_record_from_json(std::string_view line);
DetectionRecord detection_from_json(std::string_view line);

// Rewrites the file with one record per line.
void write_detections(const std::filesystem::path& file,
                      const std::vector<DetectionRecord>& records);
std::vector<DetectionRecord> read_detections(const std::filesystem::path& file);

}  // namespace listchurn
