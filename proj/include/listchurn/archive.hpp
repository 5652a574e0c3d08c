#pragma once

#include <chrono>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "listchurn/calendar.hpp"
#include "listchurn/transport.hpp"

namespace listchurn {

// One scheduled snapshot slot. `quarter` is the 1-based interval index
// within the year (a calendar quarter at the default three-month spacing).
struct TargetDate {
  int year = 0;
  int quarter = 1;
  int interval_months = 3;
  Date nominal_date;

  static TargetDate make(int year, int quarter, int interval_months = 3);

  // First day after the interval.
  Date interval_end() const { return add_months(nominal_date, interval_months); }
  bool contains(Timestamp t) const;

  friend bool operator==(const TargetDate& a, const TargetDate& b) {
    return a.year == b.year && a.quarter == b.quarter && a.interval_months == b.interval_months;
  }
};

// Evenly spaced targets covering whole years; interval_months must divide 12.
std::vector<TargetDate> schedule_intervals(int from_year, int to_year, int interval_months);

inline std::vector<TargetDate> schedule_quarters(int from_year, int to_year) {
  return schedule_intervals(from_year, to_year, 3);
}

// |delta| beyond which a resolution is flagged as far from its target.
inline constexpr long kOverGapDays = 183;

struct Memento {
  std::string url;
  Timestamp timestamp;
};

struct MementoRef {
  std::string original_url;
  std::string memento_url;
  Timestamp memento_timestamp;
  long delta_days = 0;  // memento minus nominal date
  bool over_gap = false;
};

struct RetryPolicy {
  int max_tries_per_interval = 4;
  std::chrono::milliseconds politeness_delay{0};
  int max_parallel = 1;
};

struct FetchedSnapshot {
  MementoRef memento;
  std::string body;
  int fetch_status = 0;
  int attempts = 0;
};

struct SkipReason {
  enum class Kind { kIntervalExhausted, kNoMemento, kTransportFailed };
  Kind kind = Kind::kNoMemento;
  int attempts = 0;
  std::string detail;
};

std::string_view to_string(SkipReason::Kind kind);

using FetchResult = std::variant<FetchedSnapshot, SkipReason>;

// Timestamp embedded in a memento URL's `/web/<digits>[modifier]/` segment.
std::optional<Timestamp> archive_timestamp_of(std::string_view memento_url);

// Removes an archive's `/web/<timestamp><modifier>/` rewrite prefix (with or
// without the archive origin). Other URLs are returned unchanged.
std::string strip_archive_rewrite(std::string_view url);

// Parses a Link-format TimeMap; entries whose rel names a memento are kept,
// sorted by timestamp.
std::vector<Memento> parse_timemap(std::string_view link_format);

// Nearest memento to the target's nominal date; ties go to the earlier
// capture. Throws NoMemento on an empty list.
MementoRef nearest_memento(const std::string& original_url, const std::vector<Memento>& mementos,
                           const TargetDate& target);

// Mementos inside the target's interval, nearest to the nominal date first.
std::vector<Memento> interval_candidates(const std::vector<Memento>& mementos,
                                         const TargetDate& target);

bool is_redirect_status(int status);

// Memento client for one archive. Safe to share between workers.
class ArchiveClient {
 public:
  ArchiveClient(Transport& transport, std::string archive_base);

  const std::string& archive_base() const { return base_; }
  std::string timemap_url(const std::string& original_url) const;

  // Throws NoMemento for URLs with no captures, ArchiveUnreachable for
  // transport failures. Results are memoized per URL.
  std::vector<Memento> timemap(const std::string& original_url);

  MementoRef resolve_memento(const std::string& original_url, const TargetDate& target);

  // Tries in-interval mementos, starting with `ref`, discarding redirects,
  // until one succeeds or max_tries_per_interval attempts have been made.
  // Never throws for archive-side failures.
  FetchResult fetch_snapshot(const MementoRef& ref, const TargetDate& target,
                             const RetryPolicy& policy);

  // resolve_memento followed by fetch_snapshot, with resolution failures
  // mapped to skip reasons.
  FetchResult capture(const std::string& original_url, const TargetDate& target,
                      const RetryPolicy& policy);

 private:
  Transport& transport_;
  std::string base_;
  std::mutex mutex_;
  std::map<std::string, std::vector<Memento>> timemaps_;
};

}  // namespace listchurn
