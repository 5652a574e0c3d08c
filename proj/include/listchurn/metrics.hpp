#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "listchurn/domain.hpp"
#include "listchurn/store.hpp"

namespace listchurn {

enum class EntityKind { kList, kCountry, kGlobal };

std::string_view to_string(EntityKind kind);

// Everything the metrics need about one entity: the sites it covers and
// its detections (one per site, domain and year) over the analysed years.
struct EntityInput {
  EntityKind kind = EntityKind::kList;
  std::string entity;
  std::set<RegistrableDomain> sites;
  std::vector<DetectionRecord> detections;
};

// |a ∩ b| / |a ∪ b|, 0 when both are empty.
double stability(const DomainSet& current, const DomainSet& previous);

struct Diversity {
  double value = 0;
  bool degenerate = false;  // empty current set
};

// 1 - |current ∩ history| / |current|.
Diversity diversity(const DomainSet& current, const DomainSet& history);

struct ChurnScore {
  EntityKind kind = EntityKind::kList;
  std::string entity;
  int year = 0;
  double stability = 0;
  double diversity = 1;
  std::size_t domains = 0;
  bool first_year = false;
  bool degenerate = false;
};

// Rows from the first year with a non-empty domain set to `to_year`.
std::vector<ChurnScore> churn_series(const EntityInput& input, int from_year, int to_year);

struct SpeedRaw {
  double reactive_raw = 0;
  double proactive_raw = 0;
  double mean_reactive_days = 0;
  double mean_proactive_days = 0;  // zero or negative
  std::size_t n_reactive = 0;
  std::size_t n_proactive = 0;
};

// Reactive: positive time differences, n / mean. Proactive: the rest,
// n * |mean|. Empty partitions score 0.
SpeedRaw speed_raw(std::span<const DetectionRecord> detections);

struct SpeedScore {
  EntityKind kind = EntityKind::kList;
  std::string entity;
  int year = 0;
  SpeedRaw raw;
  double reactive = 0;
  double proactive = 0;
};

// Divides each raw score by the maximum within its entity kind.
std::vector<SpeedScore> normalize_scores(std::vector<SpeedScore> rows);

enum class AverageBy { kYears, kCountries, kBoth };

std::string_view to_string(AverageBy by);

// Averages over years keep the entity; averages over countries (any entity
// of the row's kind) keep the year. Missing cells are skipped.
struct ChurnAverage {
  EntityKind kind = EntityKind::kList;
  AverageBy by = AverageBy::kYears;
  std::optional<std::string> entity;
  std::optional<int> year;
  std::size_t cells = 0;
  double stability = 0;
  double diversity = 0;
};

struct SpeedAverage {
  EntityKind kind = EntityKind::kList;
  AverageBy by = AverageBy::kYears;
  std::optional<std::string> entity;
  std::optional<int> year;
  std::size_t cells = 0;
  double reactive = 0;
  double proactive = 0;
};

std::vector<ChurnAverage> average_over(std::span<const ChurnScore> rows, AverageBy by);
std::vector<SpeedAverage> average_over(std::span<const SpeedScore> rows, AverageBy by);

struct ProminenceRow {
  EntityKind kind = EntityKind::kList;
  std::string entity;
  int year = 0;
  std::size_t distinct_domains_per_site_sum = 0;
  std::size_t sites = 0;
  double per_site_average = 0;
  // Year-over-year change; only meaningful when has_previous.
  bool has_previous = false;
  double pct_sites_increase = 0;
  double pct_sites_decrease = 0;
  std::map<long, std::size_t> change_histogram;  // non-zero deltas
};

// Per-site distinct domain counts by year; a missing year means the site
// was not present that year.
using SiteYearCounts = std::map<std::string, std::map<int, std::size_t>>;

std::vector<ProminenceRow> prominence(const SiteYearCounts& counts, EntityKind kind,
                                      const std::string& entity, int from_year, int to_year);
std::vector<ProminenceRow> prominence(const EntityInput& input, int from_year, int to_year);

enum class CensoredMode { kInclude, kExclude };

std::string_view to_string(CensoredMode mode);

struct ListSummaryRow {
  std::string list_id;
  CensoredMode censored_mode = CensoredMode::kInclude;
  std::size_t total_detections = 0;
  double mean_days = 0;          // over detections
  double mean_days_by_year = 0;  // mean of the yearly means
  std::size_t n_reactive = 0;
  double mean_reactive_days = 0;
  std::size_t n_proactive = 0;
  double mean_proactive_days = 0;
};

ListSummaryRow list_summary(const std::string& list_id,
                            std::span<const DetectionRecord> detections, CensoredMode mode);

inline constexpr long kTimeToListBucketDays = 30;

struct TimeToListRow {
  std::string list_id;
  long bucket_start_days = 0;  // bucket covers [start, start + 30)
  std::size_t count = 0;
};

// Non-censored detections bucketed by time difference.
std::vector<TimeToListRow> time_to_list_distribution(const std::string& list_id,
                                                     std::span<const DetectionRecord> detections);

struct MetricsBundle {
  std::vector<ChurnScore> churn;
  std::vector<SpeedScore> speed;
  std::vector<ProminenceRow> prominence;
  std::vector<ListSummaryRow> list_summary;
  std::vector<TimeToListRow> time_to_list;
  std::vector<ChurnAverage> churn_average;
  std::vector<SpeedAverage> speed_average;
};

struct MetricsOptions {
  int from_year = 2009;
  int to_year = 2017;
  FirstSeenScope first_seen = FirstSeenScope::kYearLocal;
};

// Per-list detections over the retained sites, for every list and year.
std::map<std::string, std::vector<DetectionRecord>> list_detections(
    const TimelineStore& store, const MetricsOptions& options);

// List, country and global entities from per-list detections. Countries
// and the global entity use the earliest listing across lists.
std::vector<EntityInput> build_entity_inputs(
    const std::map<std::string, std::vector<DetectionRecord>>& by_list,
    const std::set<RegistrableDomain>& retained_sites,
    const std::map<std::string, std::set<RegistrableDomain>>& sites_by_country);

MetricsBundle compute_metrics(std::span<const EntityInput> entities, int from_year,
                              int to_year);

// Store to bundle in one call: retention, detections, entities, metrics.
MetricsBundle compute_all(const TimelineStore& store, const MetricsOptions& options);

}  // namespace listchurn
