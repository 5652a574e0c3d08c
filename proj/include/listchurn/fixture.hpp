#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "listchurn/store.hpp"

namespace listchurn {

// Metric values to realise exactly for one entity-year. In a planted
// corpus every entity (the single list, the single country, global) sees
// the same yearly domain sets, so any of their names may be used.
struct PlantedTarget {
  std::string entity;
  int year = 0;
  std::optional<double> stability;
  std::optional<double> diversity;
  std::optional<std::size_t> union_size;  // |T_i ∪ T_i-1|
};

struct ScenarioSpec {
  std::uint64_t seed = 1;
  int n_sites = 20;
  int n_domains = 60;
  int from_year = 2009;
  int to_year = 2017;
  double churn_rate = 0.3;
  // Listing lag in days relative to the domain's first web appearance,
  // drawn uniformly from [mean - spread, mean + spread].
  long listing_lag_mean_days = 60;
  long listing_lag_spread_days = 180;
  int n_lists = 2;
  int n_countries = 2;
  // Chance that a site has no capture at all in a given year.
  double site_gap_rate = 0.03;
  std::vector<PlantedTarget> planted_targets;
};

// One expected metric value known by construction.
struct ExpectedRow {
  std::string entity;
  int year = 0;
  std::string metric;  // "stability" | "diversity"
  double value = 0;
};

struct Corpus {
  std::vector<ObservationRecord> observations;
  std::vector<ListRecord> lists;
  std::vector<ExpectedRow> expected;
};

inline constexpr const char* kPlantedList = "planted";
inline constexpr const char* kPlantedCountry = "zz";

// Deterministic in the spec alone. Throws UnrealizableTarget when a
// planted value has no integer set-size solution, PreconditionError for
// invalid specs.
Corpus generate_corpus(const ScenarioSpec& spec);

ScenarioSpec scenario_from_json(std::string_view text);
std::string scenario_to_json(const ScenarioSpec& spec);

// mt19937_64 output is fixed by the standard; the library distributions
// are not, so draws are derived from raw output here.
class ScenarioRng {
 public:
  explicit ScenarioRng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t below(std::uint64_t n) { return engine_() % n; }
  bool chance(double p) { return static_cast<double>(engine_() >> 11) * 0x1.0p-53 < p; }
  long between(long lo, long hi) {
    return lo + static_cast<long>(below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace listchurn
