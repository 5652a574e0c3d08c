#include "oracle/brute_force.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace oracle {

using listchurn::ListRecord;
using listchurn::ObservationRecord;
using Names = std::vector<std::string>;  // sorted, unique

Fraction Fraction::of(std::int64_t n, std::int64_t d) {
  if (d < 0) n = -n, d = -d;
  std::int64_t g = std::gcd(n < 0 ? -n : n, d);
  if (g == 0) g = 1;
  return {n / g, d / g};
}

namespace {

long day_number(std::chrono::sys_days d) { return d.time_since_epoch().count(); }

bool contains(const Names& s, const std::string& x) {
  return std::find(s.begin(), s.end(), x) != s.end();
}

void add(Names& s, const std::string& x) {
  if (!contains(s, x)) {
    s.push_back(x);
    std::sort(s.begin(), s.end());
  }
}

std::int64_t common(const Names& a, const Names& b) {
  std::int64_t n = 0;
  for (const auto& x : a) n += contains(b, x) ? 1 : 0;
  return n;
}

struct Detection {
  std::string site;
  std::string domain;
  int year;
  std::string list;
  long list_day;  // first listing, as a day number
  long td;
  bool censored;
};

struct Entity {
  std::string kind;
  std::string name;
  Names sites;
  std::vector<Detection> detections;
};

}  // namespace

Rows brute_force_metrics(const std::vector<ObservationRecord>& observations,
                         const std::vector<ListRecord>& lists, int from_year, int to_year) {
  Rows rows;

  // Sites captured in every year of the range.
  std::map<std::string, std::set<int>> site_years;
  for (const auto& o : observations) {
    if (o.year >= from_year && o.year <= to_year) site_years[o.site.value()].insert(o.year);
  }
  Names kept;
  for (const auto& [site, years] : site_years) {
    if (static_cast<int>(years.size()) == to_year - from_year + 1) kept.push_back(site);
  }

  Names list_ids;
  for (const auto& l : lists) add(list_ids, l.list_id);

  // Earliest day of each (site, year, domain) sighting.
  std::map<std::tuple<std::string, int, std::string>, long> web_day;
  for (const auto& o : observations) {
    long d = day_number(std::chrono::floor<std::chrono::days>(o.memento_timestamp));
    for (const auto& x : o.domains) {
      auto key = std::tuple{o.site.value(), o.year, x.value()};
      auto it = web_day.find(key);
      if (it == web_day.end() || d < it->second) web_day[key] = d;
    }
  }

  // Per-list detections.
  std::map<std::string, std::vector<Detection>> by_list;
  for (const auto& id : list_ids) {
    long earliest = 0;
    bool have = false;
    std::map<std::string, long> listed;
    for (const auto& l : lists) {
      if (l.list_id != id) continue;
      long d = day_number(l.capture_date);
      if (!have || d < earliest) earliest = d, have = true;
      for (const auto& x : l.domains) {
        auto it = listed.find(x.value());
        if (it == listed.end() || d < it->second) listed[x.value()] = d;
      }
    }
    auto& out = by_list[id];
    for (const auto& [key, web] : web_day) {
      const auto& [site, y, domain] = key;
      if (y < from_year || y > to_year || !contains(kept, site)) continue;
      auto it = listed.find(domain);
      if (it == listed.end()) continue;
      long td = it->second - web;
      if (it->second == earliest && td >= 0) td = 1;
      out.push_back({site, domain, y, id, it->second, td, web < earliest});
    }
  }

  std::vector<Entity> entities;
  for (const auto& id : list_ids) entities.push_back({"list", id, kept, by_list[id]});

  // Earliest listing across all lists, ties to the smaller list id.
  std::map<std::tuple<std::string, int, std::string>, Detection> best;
  for (const auto& id : list_ids) {
    for (const auto& d : by_list[id]) {
      auto key = std::tuple{d.site, d.year, d.domain};
      auto it = best.find(key);
      if (it == best.end() || d.list_day < it->second.list_day) best.insert_or_assign(key, d);
    }
  }
  std::vector<Detection> merged;
  for (const auto& [_, d] : best) merged.push_back(d);

  Names countries;
  for (const auto& o : observations) {
    for (const auto& c : o.country_tags) add(countries, c);
  }
  for (const auto& c : countries) {
    Entity e{"country", c, {}, {}};
    for (const auto& o : observations) {
      if (contains(kept, o.site.value()) && contains(o.country_tags, c)) {
        add(e.sites, o.site.value());
      }
    }
    if (e.sites.empty()) continue;
    for (const auto& d : merged) {
      if (contains(e.sites, d.site)) e.detections.push_back(d);
    }
    entities.push_back(e);
  }
  if (!kept.empty()) entities.push_back({"global", "global", kept, merged});

  std::map<std::string, std::pair<double, double>> max_raw;
  for (const auto& e : entities) {
    std::map<int, Names> t;
    for (int y = from_year; y <= to_year; ++y) t[y];
    for (const auto& d : e.detections) add(t[d.year], d.domain);

    int first = 0;
    for (int y = to_year; y >= from_year; --y) {
      if (!t[y].empty()) first = y;
    }
    if (first != 0) {
      Names history;
      for (int y = from_year; y < first; ++y) {
        for (const auto& x : t[y]) add(history, x);
      }
      for (int y = first; y <= to_year; ++y) {
        ChurnCell c{0.0, 1.0};
        if (y != first) {
          std::int64_t both = common(t[y], t[y - 1]);
          std::int64_t either =
              static_cast<std::int64_t>(t[y].size() + t[y - 1].size()) - both;
          c.stability = either == 0 ? 0.0 : Fraction::of(both, either).value();
          if (t[y].empty()) {
            c.diversity = 0.0;
          } else {
            auto size = static_cast<std::int64_t>(t[y].size());
            c.diversity = Fraction::of(size - common(t[y], history), size).value();
          }
        }
        rows.churn[{e.kind, e.name, y}] = c;
        for (const auto& x : t[y]) add(history, x);

        SpeedCell s;
        std::int64_t sum_r = 0, sum_p = 0;
        for (const auto& d : e.detections) {
          if (d.year != y) continue;
          if (d.td > 0) {
            ++s.n_reactive;
            sum_r += d.td;
          } else {
            ++s.n_proactive;
            sum_p += d.td;
          }
        }
        if (s.n_reactive > 0) {
          s.mean_reactive_days = Fraction::of(sum_r, s.n_reactive).value();
          s.reactive_raw = Fraction::of(s.n_reactive * s.n_reactive, sum_r).value();
        }
        if (s.n_proactive > 0) {
          s.mean_proactive_days = Fraction::of(sum_p, s.n_proactive).value();
          s.proactive_raw = Fraction::of(s.n_proactive * -sum_p, s.n_proactive).value();
        }
        auto& m = max_raw[e.kind];
        m.first = std::max(m.first, s.reactive_raw);
        m.second = std::max(m.second, s.proactive_raw);
        rows.speed[{e.kind, e.name, y}] = s;
      }
    }

    std::map<int, std::map<std::string, std::int64_t>> counts;
    for (int y = from_year; y <= to_year; ++y) {
      for (const auto& site : e.sites) counts[y][site] = 0;
    }
    std::set<std::tuple<int, std::string, std::string>> pairs;
    for (const auto& d : e.detections) {
      if (pairs.insert({d.year, d.site, d.domain}).second) ++counts[d.year][d.site];
    }
    for (int y = from_year; y <= to_year && !e.sites.empty(); ++y) {
      ProminenceCell p;
      for (const auto& [site, n] : counts[y]) p.sum += n;
      p.sites = static_cast<std::int64_t>(e.sites.size());
      p.average = Fraction::of(p.sum, p.sites).value();
      if (y > from_year) {
        p.has_previous = true;
        std::int64_t up = 0, down = 0;
        for (const auto& site : e.sites) {
          long delta = static_cast<long>(counts[y][site] - counts[y - 1][site]);
          if (delta > 0) ++up;
          if (delta < 0) ++down;
          if (delta != 0) ++p.histogram[delta];
        }
        p.pct_increase = Fraction::of(100 * up, p.sites).value();
        p.pct_decrease = Fraction::of(100 * down, p.sites).value();
      }
      rows.prominence[{e.kind, e.name, y}] = p;
    }

    if (e.kind != "list") continue;
    for (std::string mode : {"include", "exclude"}) {
      SummaryCell s;
      std::int64_t sum = 0, sum_r = 0, sum_p = 0;
      std::map<int, std::pair<std::int64_t, std::int64_t>> yearly;
      for (const auto& d : e.detections) {
        if (mode == "exclude" && d.censored) continue;
        ++s.total;
        sum += d.td;
        yearly[d.year].first += d.td;
        yearly[d.year].second += 1;
        if (d.td > 0) {
          ++s.n_reactive;
          sum_r += d.td;
        } else {
          ++s.n_proactive;
          sum_p += d.td;
        }
      }
      if (s.total > 0) s.mean_days = Fraction::of(sum, s.total).value();
      if (s.n_reactive > 0) s.mean_reactive_days = Fraction::of(sum_r, s.n_reactive).value();
      if (s.n_proactive > 0) s.mean_proactive_days = Fraction::of(sum_p, s.n_proactive).value();
      if (!yearly.empty()) {
        long double total = 0;
        for (const auto& [y, v] : yearly) total += Fraction::of(v.first, v.second).value();
        s.mean_days_by_year = static_cast<double>(total / static_cast<long double>(yearly.size()));
      }
      rows.list_summary[{e.name, mode}] = s;
    }
  }

  for (auto& [key, s] : rows.speed) {
    const auto& m = max_raw[std::get<0>(key)];
    s.reactive = m.first > 0 ? s.reactive_raw / m.first : 0.0;
    s.proactive = m.second > 0 ? s.proactive_raw / m.second : 0.0;
  }
  return rows;
}

}  // namespace oracle
