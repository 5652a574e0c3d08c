#include "listchurn/fixture.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>

#include "json.hpp"
#include "listchurn/errors.hpp"

namespace listchurn {

namespace {

constexpr double kTargetTolerance = 1e-12;
constexpr const char* kCountryCodes[] = {"au", "br", "ca", "de", "fr", "gb", "in",
                                         "jp", "ru", "us", "cn", "kr", "it", "es"};
constexpr const char* kTrackerSuffixes[] = {".com", ".net", ".co.uk", ".io", ".com.au"};

std::string tracker_name(int i) {
  static const char* stems[] = {"adsrv", "trk", "pixel", "beacon", "metrics", "tags"};
  return std::string(stems[i % 6]) + std::to_string(i) + kTrackerSuffixes[(i / 6) % 5];
}

std::string site_name(int i) { return "site" + std::to_string(i) + ".com"; }

RegistrableDomain dom(const std::string& v) { return RegistrableDomain::from_canonical(v); }

void validate(const ScenarioSpec& spec) {
  auto fail = [](const std::string& m) { throw PreconditionError("scenario: " + m); };
  if (spec.n_sites < 1) fail("n_sites must be positive");
  if (spec.n_domains < 1) fail("n_domains must be positive");
  if (spec.from_year > spec.to_year) fail("empty year range");
  if (spec.to_year - spec.from_year > 60) fail("year range too long");
  if (spec.churn_rate < 0 || spec.churn_rate > 1) fail("churn_rate outside [0,1]");
  if (spec.site_gap_rate < 0 || spec.site_gap_rate > 1) fail("site_gap_rate outside [0,1]");
  if (spec.n_lists < 1) fail("n_lists must be positive");
  if (spec.n_countries < 1 || spec.n_countries > 14) fail("n_countries must be in [1,14]");
  if (spec.listing_lag_spread_days < 0) fail("negative lag spread");
}

// k distinct picks from `pool`, in pool order.
std::vector<int> sample(ScenarioRng& rng, std::vector<int> pool, std::size_t k) {
  for (std::size_t i = 0; i < k && i < pool.size(); ++i) {
    std::size_t j = i + rng.below(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(std::min(k, pool.size()));
  std::sort(pool.begin(), pool.end());
  return pool;
}

Timestamp capture_time(ScenarioRng& rng, int year, int quarter) {
  Date start = make_date(year, static_cast<unsigned>(3 * (quarter - 1) + 1), 1);
  return Timestamp{start + std::chrono::days{rng.below(85)}} +
         std::chrono::hours{rng.below(24)} + std::chrono::minutes{rng.below(60)};
}

// Observations for one site-year: every domain lands in at least one of the
// chosen quarters.
void emit_site_year(ScenarioRng& rng, std::vector<ObservationRecord>& out, const std::string& site,
                    const std::vector<std::string>& countries, int year,
                    const std::vector<int>& domains, bool all_quarters) {
  std::vector<int> quarters;
  for (int q = 1; q <= 4; ++q) {
    if (all_quarters || rng.chance(0.6)) quarters.push_back(q);
  }
  if (quarters.empty()) quarters.push_back(static_cast<int>(rng.below(4)) + 1);
  std::map<int, DomainSet> by_quarter;
  for (int q : quarters) by_quarter[q];
  for (int d : domains) {
    int home = quarters[rng.below(quarters.size())];
    for (int q : quarters) {
      if (q == home || rng.chance(0.3)) by_quarter[q].insert(dom(tracker_name(d)));
    }
  }
  for (auto& [q, set] : by_quarter) {
    out.push_back(ObservationRecord{dom(site), countries, year, q, capture_time(rng, year, q),
                                    std::move(set)});
  }
}

struct Merged {
  std::optional<double> stability;
  std::optional<double> diversity;
  std::optional<std::size_t> union_size;
};

bool close(double a, double b) { return std::fabs(a - b) <= kTargetTolerance; }

std::map<int, Merged> merge_targets(const ScenarioSpec& spec) {
  std::map<int, Merged> out;
  auto set_field = [](auto& slot, const auto& value, const PlantedTarget& t) {
    if (!value) return;
    if (slot && !(*slot == *value)) {
      throw UnrealizableTarget("conflicting targets for " + t.entity + " " +
                               std::to_string(t.year));
    }
    slot = value;
  };
  for (const auto& t : spec.planted_targets) {
    if (t.entity != kPlantedList && t.entity != kPlantedCountry && t.entity != "global") {
      throw PreconditionError("planted target entity must be '" + std::string(kPlantedList) +
                              "', '" + kPlantedCountry + "' or 'global'");
    }
    if (t.year < spec.from_year || t.year > spec.to_year) {
      throw PreconditionError("planted target year outside the scenario range");
    }
    Merged& m = out[t.year];
    set_field(m.stability, t.stability, t);
    set_field(m.diversity, t.diversity, t);
    set_field(m.union_size, t.union_size, t);
  }
  return out;
}

Corpus generate_planted(const ScenarioSpec& spec, ScenarioRng& rng) {
  const auto targets = merge_targets(spec);
  const int n = spec.n_domains;
  std::vector<int> previous;
  std::vector<bool> in_history(static_cast<std::size_t>(n), false);
  std::map<int, std::vector<int>> yearly;

  for (int year = spec.from_year; year <= spec.to_year; ++year) {
    auto t = targets.find(year);
    const Merged* goal = t == targets.end() ? nullptr : &t->second;
    std::vector<int> old, fresh;
    for (int d = 0; d < n; ++d) {
      bool prev = std::binary_search(previous.begin(), previous.end(), d);
      if (in_history[static_cast<std::size_t>(d)] && !prev) old.push_back(d);
      if (!in_history[static_cast<std::size_t>(d)]) fresh.push_back(d);
    }
    const std::size_t p = previous.size(), o = old.size(), f = fresh.size();
    std::size_t k1 = 0, k2 = 0, k3 = 0;

    if (year == spec.from_year) {
      if (goal && ((goal->stability && !close(*goal->stability, 0.0)) ||
                   (goal->diversity && !close(*goal->diversity, 1.0)))) {
        throw UnrealizableTarget("the first year always has stability 0 and diversity 1");
      }
      if (goal && goal->union_size) {
        if (*goal->union_size < 1 || *goal->union_size > f) {
          throw UnrealizableTarget("first-year union size not available in the universe");
        }
        k3 = *goal->union_size;
      } else {
        k3 = static_cast<std::size_t>(rng.between(1, std::min(n, 10)));
      }
    } else if (goal) {
      std::vector<std::array<std::size_t, 3>> solutions;
      for (std::size_t a = 0; a <= p; ++a) {
        for (std::size_t b = 0; b <= o; ++b) {
          for (std::size_t c = 0; c <= f; ++c) {
            if (a + b + c == 0) continue;
            std::size_t uni = p + b + c;
            if (goal->union_size && uni != *goal->union_size) continue;
            if (goal->stability &&
                !close(static_cast<double>(a) / static_cast<double>(uni), *goal->stability)) {
              continue;
            }
            if (goal->diversity && !close(static_cast<double>(c) / static_cast<double>(a + b + c),
                                          *goal->diversity)) {
              continue;
            }
            solutions.push_back({a, b, c});
          }
        }
      }
      if (solutions.empty()) {
        throw UnrealizableTarget("no integer set sizes realise the target for " +
                                 std::to_string(year) + " with a universe of " +
                                 std::to_string(n) + " domains");
      }
      const auto& s = solutions[rng.below(solutions.size())];
      k1 = s[0];
      k2 = s[1];
      k3 = s[2];
    } else {
      for (std::size_t i = 0; i < p; ++i) k1 += rng.chance(1.0 - spec.churn_rate) ? 1 : 0;
      std::size_t replace = p - k1;
      k3 = std::min(replace, f);
      k2 = std::min(replace - k3, o);
      if (k1 + k2 + k3 == 0) k1 = std::min<std::size_t>(1, p), k3 = p == 0 ? 1 : 0;
    }

    std::vector<int> current = sample(rng, previous, k1);
    auto from_old = sample(rng, old, k2);
    auto from_fresh = sample(rng, fresh, k3);
    current.insert(current.end(), from_old.begin(), from_old.end());
    current.insert(current.end(), from_fresh.begin(), from_fresh.end());
    std::sort(current.begin(), current.end());
    for (int d : current) in_history[static_cast<std::size_t>(d)] = true;
    yearly[year] = current;
    previous = std::move(current);
  }

  Corpus corpus;
  const std::vector<std::string> countries{kPlantedCountry};
  for (const auto& [year, domains] : yearly) {
    std::vector<std::vector<int>> per_site(static_cast<std::size_t>(spec.n_sites));
    for (int d : domains) per_site[rng.below(per_site.size())].push_back(d);
    for (int s = 0; s < spec.n_sites; ++s) {
      emit_site_year(rng, corpus.observations, site_name(s), countries, year,
                     per_site[static_cast<std::size_t>(s)], true);
    }
  }
  DomainSet all;
  for (int d = 0; d < n; ++d) all.insert(dom(tracker_name(d)));
  corpus.lists.push_back(ListRecord{kPlantedList, make_date(spec.from_year, 1, 1), all,
                                    ListFormat::kDomainList, all.size()});
  for (const auto& t : spec.planted_targets) {
    if (t.stability) corpus.expected.push_back({t.entity, t.year, "stability", *t.stability});
    if (t.diversity) corpus.expected.push_back({t.entity, t.year, "diversity", *t.diversity});
  }
  return corpus;
}

Corpus generate_random(const ScenarioSpec& spec, ScenarioRng& rng) {
  const int n = spec.n_domains;
  std::vector<int> everything(static_cast<std::size_t>(n));
  for (int d = 0; d < n; ++d) everything[static_cast<std::size_t>(d)] = d;

  std::map<std::string, int> ids;
  for (int d = 0; d < n; ++d) ids[tracker_name(d)] = d;

  Corpus corpus;
  std::map<int, Timestamp> web_first;
  std::set<int> retained_domains;
  bool any_gap_free = false;
  for (int s = 0; s < spec.n_sites; ++s) {
    std::vector<std::string> countries{kCountryCodes[s % spec.n_countries]};
    if (spec.n_countries > 1 && rng.chance(0.3)) {
      countries.push_back(kCountryCodes[rng.below(static_cast<std::uint64_t>(spec.n_countries))]);
      std::sort(countries.begin(), countries.end());
      countries.erase(std::unique(countries.begin(), countries.end()), countries.end());
    }
    auto k = static_cast<std::size_t>(rng.between(1, std::min(n, 8)));
    std::vector<int> current = sample(rng, everything, k);
    bool gap = false;
    for (int year = spec.from_year; year <= spec.to_year; ++year) {
      if (year > spec.from_year) {
        for (auto& d : current) {
          if (!rng.chance(spec.churn_rate)) continue;
          std::vector<int> outside;
          for (int x = 0; x < n; ++x) {
            if (!std::binary_search(current.begin(), current.end(), x)) outside.push_back(x);
          }
          if (!outside.empty()) d = outside[rng.below(outside.size())];
          std::sort(current.begin(), current.end());
        }
      }
      if (rng.chance(spec.site_gap_rate)) {
        gap = true;
        continue;
      }
      std::size_t before = corpus.observations.size();
      emit_site_year(rng, corpus.observations, site_name(s), countries, year, current, false);
      for (std::size_t i = before; i < corpus.observations.size(); ++i) {
        const auto& o = corpus.observations[i];
        for (const auto& d : o.domains) {
          auto [pos, fresh] = web_first.emplace(ids.at(d.value()), o.memento_timestamp);
          if (!fresh && o.memento_timestamp < pos->second) pos->second = o.memento_timestamp;
        }
      }
    }
    if (!gap) {
      any_gap_free = true;
      retained_domains.insert(current.begin(), current.end());
    }
  }

  const Date range_start = make_date(spec.from_year, 1, 1);
  const Date range_end = make_date(spec.to_year, 12, 31);
  const long range_days = days_between(range_start, range_end);
  std::set<int> covered_anywhere;
  static const ListFormat formats[] = {ListFormat::kHosts, ListFormat::kFilterList,
                                       ListFormat::kDomainList};
  for (int l = 0; l < spec.n_lists; ++l) {
    const std::string id = "list" + std::to_string(l);
    const double coverage = 0.5 + 0.4 * static_cast<double>(l) / spec.n_lists;
    std::map<int, std::pair<Date, std::optional<Date>>> listing;  // listed, delisted
    for (int d = 0; d < n; ++d) {
      if (!rng.chance(coverage)) continue;
      Date base = web_first.count(d) ? date_of(web_first.at(d))
                                     : range_start + std::chrono::days{rng.below(
                                                         static_cast<std::uint64_t>(range_days))};
      long lag = rng.between(spec.listing_lag_mean_days - spec.listing_lag_spread_days,
                             spec.listing_lag_mean_days + spec.listing_lag_spread_days);
      Date listed = base + std::chrono::days{lag};
      std::optional<Date> delisted;
      if (rng.chance(0.2)) delisted = listed + std::chrono::days{rng.between(200, 1500)};
      listing.emplace(d, std::pair{listed, delisted});
    }
    const int start_year =
        std::min(spec.to_year, spec.from_year + static_cast<int>(rng.below(3)));
    const int step = l % 2 == 0 ? 3 : 6;
    const ListFormat format = formats[l % 3];
    for (Date month = make_date(start_year, 1, 1); month <= range_end;
         month = add_months(month, step)) {
      Date when = month + std::chrono::days{rng.below(20)};
      if (when > range_end) break;
      DomainSet domains;
      for (const auto& [d, span] : listing) {
        if (span.first <= when && (!span.second || when < *span.second)) {
          domains.insert(dom(tracker_name(d)));
          covered_anywhere.insert(d);
        }
      }
      corpus.lists.push_back(ListRecord{id, when, std::move(domains), format, 0});
      corpus.lists.back().rule_count = corpus.lists.back().domains.size();
    }
  }

  // A frozen world keeps every entity's yearly set fixed.
  if (spec.churn_rate == 0.0 && any_gap_free) {
    bool listed = std::any_of(retained_domains.begin(), retained_domains.end(),
                              [&](int d) { return covered_anywhere.count(d) > 0; });
    for (int year = spec.from_year + 1; listed && year <= spec.to_year; ++year) {
      corpus.expected.push_back({"global", year, "stability", 1.0});
      corpus.expected.push_back({"global", year, "diversity", 0.0});
    }
  }
  return corpus;
}

}  // namespace

Corpus generate_corpus(const ScenarioSpec& spec) {
  validate(spec);
  ScenarioRng rng(spec.seed);
  return spec.planted_targets.empty() ? generate_random(spec, rng) : generate_planted(spec, rng);
}

ScenarioSpec scenario_from_json(std::string_view text) {
  try {
    auto j = nlohmann::json::parse(text);
    ScenarioSpec spec;
    spec.seed = j.value("seed", spec.seed);
    spec.n_sites = j.value("n_sites", spec.n_sites);
    spec.n_domains = j.value("n_domains", spec.n_domains);
    if (j.contains("years")) {
      spec.from_year = j.at("years").at(0).get<int>();
      spec.to_year = j.at("years").at(1).get<int>();
    }
    spec.churn_rate = j.value("churn_rate", spec.churn_rate);
    if (j.contains("listing_lag_days")) {
      const auto& lag = j.at("listing_lag_days");
      spec.listing_lag_mean_days = lag.value("mean", spec.listing_lag_mean_days);
      spec.listing_lag_spread_days = lag.value("spread", spec.listing_lag_spread_days);
    }
    spec.n_lists = j.value("n_lists", spec.n_lists);
    spec.n_countries = j.value("n_countries", spec.n_countries);
    spec.site_gap_rate = j.value("site_gap_rate", spec.site_gap_rate);
    for (const auto& t : j.value("planted_targets", nlohmann::json::array())) {
      PlantedTarget target;
      target.entity = t.at("entity").get<std::string>();
      target.year = t.at("year").get<int>();
      if (t.contains("stability")) target.stability = t.at("stability").get<double>();
      if (t.contains("diversity")) target.diversity = t.at("diversity").get<double>();
      if (t.contains("union_size")) target.union_size = t.at("union_size").get<std::size_t>();
      spec.planted_targets.push_back(std::move(target));
    }
    validate(spec);
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("scenario file: ") + e.what());
  }
}

std::string scenario_to_json(const ScenarioSpec& spec) {
  nlohmann::json targets = nlohmann::json::array();
  for (const auto& t : spec.planted_targets) {
    nlohmann::json j = {{"entity", t.entity}, {"year", t.year}};
    if (t.stability) j["stability"] = *t.stability;
    if (t.diversity) j["diversity"] = *t.diversity;
    if (t.union_size) j["union_size"] = *t.union_size;
    targets.push_back(j);
  }
  nlohmann::json j = {
      {"seed", spec.seed},
      {"n_sites", spec.n_sites},
      {"n_domains", spec.n_domains},
      {"years", {spec.from_year, spec.to_year}},
      {"churn_rate", spec.churn_rate},
      {"listing_lag_days",
       {{"mean", spec.listing_lag_mean_days}, {"spread", spec.listing_lag_spread_days}}},
      {"n_lists", spec.n_lists},
      {"n_countries", spec.n_countries},
      {"site_gap_rate", spec.site_gap_rate},
      {"planted_targets", targets}};
  return j.dump(2);
}

}  // namespace listchurn
