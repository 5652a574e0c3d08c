#include "listchurn/metrics.hpp"

#include <algorithm>
#include <tuple>

namespace listchurn {

namespace {

DomainSet domains_in_year(std::span<const DetectionRecord> detections, int year) {
  DomainSet out;
  for (const auto& d : detections) {
    if (d.year == year) out.insert(d.domain);
  }
  return out;
}

std::vector<DetectionRecord> detections_in_year(std::span<const DetectionRecord> detections,
                                                int year) {
  std::vector<DetectionRecord> out;
  for (const auto& d : detections) {
    if (d.year == year) out.push_back(d);
  }
  return out;
}

double mean_of(long long sum, std::size_t n) {
  return n == 0 ? 0.0 : static_cast<double>(sum) / static_cast<double>(n);
}

struct Averaged {
  EntityKind kind;
  std::optional<std::string> entity;
  std::optional<int> year;
  std::size_t cells = 0;
  double a = 0;
  double b = 0;
};

// Groups rows by the key the averaging mode keeps and means two fields.
template <typename Row, typename A, typename B>
std::vector<Averaged> average_rows(std::span<const Row> rows, AverageBy by, A first, B second) {
  using Key = std::tuple<EntityKind, std::optional<std::string>, std::optional<int>>;
  std::map<Key, Averaged> groups;
  for (const auto& r : rows) {
    Key key{r.kind, std::nullopt, std::nullopt};
    if (by == AverageBy::kYears) std::get<1>(key) = r.entity;
    if (by == AverageBy::kCountries) std::get<2>(key) = r.year;
    auto [it, fresh] = groups.try_emplace(key, Averaged{r.kind, std::get<1>(key), std::get<2>(key)});
    ++it->second.cells;
    it->second.a += first(r);
    it->second.b += second(r);
  }
  std::vector<Averaged> out;
  for (auto& [_, g] : groups) {
    g.a /= static_cast<double>(g.cells);
    g.b /= static_cast<double>(g.cells);
    out.push_back(g);
  }
  return out;
}

}  // namespace

std::string_view to_string(EntityKind kind) {
  switch (kind) {
    case EntityKind::kList:
      return "list";
    case EntityKind::kCountry:
      return "country";
    case EntityKind::kGlobal:
      return "global";
  }
  return "unknown";
}

std::string_view to_string(AverageBy by) {
  switch (by) {
    case AverageBy::kYears:
      return "years";
    case AverageBy::kCountries:
      return "countries";
    case AverageBy::kBoth:
      return "both";
  }
  return "unknown";
}

std::string_view to_string(CensoredMode mode) {
  return mode == CensoredMode::kInclude ? "include" : "exclude";
}

double stability(const DomainSet& current, const DomainSet& previous) {
  std::size_t common = 0;
  for (const auto& d : current) common += previous.count(d);
  std::size_t all = current.size() + previous.size() - common;
  return all == 0 ? 0.0 : static_cast<double>(common) / static_cast<double>(all);
}

Diversity diversity(const DomainSet& current, const DomainSet& history) {
  if (current.empty()) return {0.0, true};
  std::size_t seen = 0;
  for (const auto& d : current) seen += history.count(d);
  return {1.0 - static_cast<double>(seen) / static_cast<double>(current.size()), false};
}

std::vector<ChurnScore> churn_series(const EntityInput& input, int from_year, int to_year) {
  std::vector<ChurnScore> rows;
  DomainSet previous;
  DomainSet history;
  bool started = false;
  for (int year = from_year; year <= to_year; ++year) {
    DomainSet current = domains_in_year(input.detections, year);
    if (!started && current.empty()) continue;
    ChurnScore row{input.kind, input.entity, year, 0.0, 1.0, current.size(), !started, false};
    if (started) {
      row.stability = stability(current, previous);
      Diversity div = diversity(current, history);
      row.diversity = div.value;
      row.degenerate = div.degenerate;
    }
    started = true;
    rows.push_back(row);
    history.insert(current.begin(), current.end());
    previous = std::move(current);
  }
  return rows;
}

SpeedRaw speed_raw(std::span<const DetectionRecord> detections) {
  SpeedRaw out;
  long long reactive_sum = 0;
  long long proactive_sum = 0;
  for (const auto& d : detections) {
    if (d.reactive()) {
      ++out.n_reactive;
      reactive_sum += d.time_difference_days;
    } else {
      ++out.n_proactive;
      proactive_sum += d.time_difference_days;
    }
  }
  out.mean_reactive_days = mean_of(reactive_sum, out.n_reactive);
  out.mean_proactive_days = mean_of(proactive_sum, out.n_proactive);
  // n / (S / n) and n * |S / n|, kept as single roundings of exact values.
  if (reactive_sum > 0) {
    const auto n = static_cast<long long>(out.n_reactive);
    out.reactive_raw = static_cast<double>(n * n) / static_cast<double>(reactive_sum);
  }
  out.proactive_raw = static_cast<double>(-proactive_sum);
  return out;
}

std::vector<SpeedScore> normalize_scores(std::vector<SpeedScore> rows) {
  std::map<EntityKind, std::pair<double, double>> max;
  for (const auto& r : rows) {
    auto& m = max[r.kind];
    m.first = std::max(m.first, r.raw.reactive_raw);
    m.second = std::max(m.second, r.raw.proactive_raw);
  }
  for (auto& r : rows) {
    const auto& m = max[r.kind];
    r.reactive = m.first > 0 ? r.raw.reactive_raw / m.first : 0.0;
    r.proactive = m.second > 0 ? r.raw.proactive_raw / m.second : 0.0;
  }
  return rows;
}

std::vector<ChurnAverage> average_over(std::span<const ChurnScore> rows, AverageBy by) {
  std::vector<ChurnAverage> out;
  for (const auto& g : average_rows(rows, by, [](const ChurnScore& r) { return r.stability; },
                                    [](const ChurnScore& r) { return r.diversity; })) {
    out.push_back({g.kind, by, g.entity, g.year, g.cells, g.a, g.b});
  }
  return out;
}

std::vector<SpeedAverage> average_over(std::span<const SpeedScore> rows, AverageBy by) {
  std::vector<SpeedAverage> out;
  for (const auto& g : average_rows(rows, by, [](const SpeedScore& r) { return r.reactive; },
                                    [](const SpeedScore& r) { return r.proactive; })) {
    out.push_back({g.kind, by, g.entity, g.year, g.cells, g.a, g.b});
  }
  return out;
}

std::vector<ProminenceRow> prominence(const SiteYearCounts& counts, EntityKind kind,
                                      const std::string& entity, int from_year, int to_year) {
  std::vector<ProminenceRow> rows;
  for (int year = from_year; year <= to_year; ++year) {
    ProminenceRow row;
    row.kind = kind;
    row.entity = entity;
    row.year = year;
    std::size_t both = 0, up = 0, down = 0;
    for (const auto& [site, by_year] : counts) {
      auto now = by_year.find(year);
      if (now == by_year.end()) continue;
      row.distinct_domains_per_site_sum += now->second;
      ++row.sites;
      auto before = by_year.find(year - 1);
      if (year == from_year || before == by_year.end()) continue;
      ++both;
      long delta = static_cast<long>(now->second) - static_cast<long>(before->second);
      if (delta > 0) ++up;
      if (delta < 0) ++down;
      if (delta != 0) ++row.change_histogram[delta];
    }
    if (row.sites == 0) continue;
    row.per_site_average = static_cast<double>(row.distinct_domains_per_site_sum) /
                           static_cast<double>(row.sites);
    if (year > from_year) {
      row.has_previous = true;
      if (both > 0) {
        row.pct_sites_increase = 100.0 * static_cast<double>(up) / static_cast<double>(both);
        row.pct_sites_decrease = 100.0 * static_cast<double>(down) / static_cast<double>(both);
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ProminenceRow> prominence(const EntityInput& input, int from_year, int to_year) {
  std::map<std::string, std::map<int, DomainSet>> sets;
  for (const auto& site : input.sites) {
    for (int y = from_year; y <= to_year; ++y) sets[site.value()][y];
  }
  for (const auto& d : input.detections) {
    if (d.year < from_year || d.year > to_year) continue;
    sets[d.site.value()][d.year].insert(d.domain);
  }
  SiteYearCounts counts;
  for (const auto& [site, by_year] : sets) {
    for (const auto& [y, s] : by_year) counts[site][y] = s.size();
  }
  return prominence(counts, input.kind, input.entity, from_year, to_year);
}

ListSummaryRow list_summary(const std::string& list_id,
                            std::span<const DetectionRecord> detections, CensoredMode mode) {
  ListSummaryRow row;
  row.list_id = list_id;
  row.censored_mode = mode;
  long long total = 0, reactive = 0, proactive = 0;
  std::map<int, std::pair<long long, std::size_t>> by_year;
  for (const auto& d : detections) {
    if (mode == CensoredMode::kExclude && d.censored) continue;
    ++row.total_detections;
    total += d.time_difference_days;
    auto& y = by_year[d.year];
    y.first += d.time_difference_days;
    ++y.second;
    if (d.reactive()) {
      ++row.n_reactive;
      reactive += d.time_difference_days;
    } else {
      ++row.n_proactive;
      proactive += d.time_difference_days;
    }
  }
  row.mean_days = mean_of(total, row.total_detections);
  row.mean_reactive_days = mean_of(reactive, row.n_reactive);
  row.mean_proactive_days = mean_of(proactive, row.n_proactive);
  if (!by_year.empty()) {
    double sum = 0;
    for (const auto& [_, y] : by_year) sum += mean_of(y.first, y.second);
    row.mean_days_by_year = sum / static_cast<double>(by_year.size());
  }
  return row;
}

std::vector<TimeToListRow> time_to_list_distribution(const std::string& list_id,
                                                     std::span<const DetectionRecord> detections) {
  std::map<long, std::size_t> buckets;
  for (const auto& d : detections) {
    if (d.censored) continue;
    long td = d.time_difference_days;
    long q = td / kTimeToListBucketDays;
    if (td % kTimeToListBucketDays != 0 && td < 0) --q;
    ++buckets[q * kTimeToListBucketDays];
  }
  std::vector<TimeToListRow> rows;
  for (const auto& [start, n] : buckets) rows.push_back({list_id, start, n});
  return rows;
}

std::map<std::string, std::vector<DetectionRecord>> list_detections(
    const TimelineStore& store, const MetricsOptions& options) {
  const auto retained = store.complete_sites(options.from_year, options.to_year);
  std::map<std::string, std::vector<DetectionRecord>> out;
  for (const auto& id : store.list_ids()) {
    auto& all = out[id];
    for (int y = options.from_year; y <= options.to_year; ++y) {
      auto year = store.build_detections(y, id, options.first_seen, &retained);
      all.insert(all.end(), year.begin(), year.end());
    }
  }
  return out;
}

std::vector<EntityInput> build_entity_inputs(
    const std::map<std::string, std::vector<DetectionRecord>>& by_list,
    const std::set<RegistrableDomain>& retained_sites,
    const std::map<std::string, std::set<RegistrableDomain>>& sites_by_country) {
  std::vector<EntityInput> out;
  std::vector<DetectionRecord> every;
  for (const auto& [id, detections] : by_list) {
    EntityInput list{EntityKind::kList, id, retained_sites, {}};
    for (const auto& d : detections) {
      if (retained_sites.count(d.site)) list.detections.push_back(d);
    }
    every.insert(every.end(), list.detections.begin(), list.detections.end());
    out.push_back(std::move(list));
  }
  const auto merged = union_detections(every);
  for (const auto& [country, sites] : sites_by_country) {
    EntityInput c{EntityKind::kCountry, country, {}, {}};
    for (const auto& s : sites) {
      if (retained_sites.count(s)) c.sites.insert(s);
    }
    if (c.sites.empty()) continue;
    for (const auto& d : merged) {
      if (c.sites.count(d.site)) c.detections.push_back(d);
    }
    out.push_back(std::move(c));
  }
  if (!retained_sites.empty()) {
    out.push_back(EntityInput{EntityKind::kGlobal, "global", retained_sites, merged});
  }
  return out;
}

MetricsBundle compute_metrics(std::span<const EntityInput> entities, int from_year,
                              int to_year) {
  MetricsBundle out;
  std::vector<SpeedScore> speed;
  for (const auto& e : entities) {
    auto churn = churn_series(e, from_year, to_year);
    for (const auto& c : churn) {
      auto year = detections_in_year(e.detections, c.year);
      speed.push_back(SpeedScore{e.kind, e.entity, c.year, speed_raw(year), 0.0, 0.0});
    }
    out.churn.insert(out.churn.end(), churn.begin(), churn.end());
    auto prom = prominence(e, from_year, to_year);
    out.prominence.insert(out.prominence.end(), prom.begin(), prom.end());
    if (e.kind == EntityKind::kList) {
      out.list_summary.push_back(list_summary(e.entity, e.detections, CensoredMode::kInclude));
      out.list_summary.push_back(list_summary(e.entity, e.detections, CensoredMode::kExclude));
      auto dist = time_to_list_distribution(e.entity, e.detections);
      out.time_to_list.insert(out.time_to_list.end(), dist.begin(), dist.end());
    }
  }
  out.speed = normalize_scores(std::move(speed));
  for (AverageBy by : {AverageBy::kYears, AverageBy::kCountries, AverageBy::kBoth}) {
    auto c = average_over(std::span<const ChurnScore>(out.churn), by);
    out.churn_average.insert(out.churn_average.end(), c.begin(), c.end());
    auto s = average_over(std::span<const SpeedScore>(out.speed), by);
    out.speed_average.insert(out.speed_average.end(), s.begin(), s.end());
  }
  return out;
}

MetricsBundle compute_all(const TimelineStore& store, const MetricsOptions& options) {
  auto by_list = list_detections(store, options);
  auto entities = build_entity_inputs(by_list,
                                      store.complete_sites(options.from_year, options.to_year),
                                      store.sites_by_country());
  return compute_metrics(entities, options.from_year, options.to_year);
}

}  // namespace listchurn
