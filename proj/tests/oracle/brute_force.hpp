#pragma once

// Direct recomputation of every metric from raw observation and list
// records. Deliberately shares nothing with the store or metrics code:
// sets are plain sorted string vectors, ratios are exact fractions.

#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "listchurn/store.hpp"

namespace oracle {

struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Fraction of(std::int64_t n, std::int64_t d);
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

// (kind, entity, year); kind is "list", "country" or "global".
using CellKey = std::tuple<std::string, std::string, int>;

struct ChurnCell {
  double stability = 0;
  double diversity = 0;
};

struct SpeedCell {
  double reactive_raw = 0;
  double proactive_raw = 0;
  double reactive = 0;
  double proactive = 0;
  double mean_reactive_days = 0;
  double mean_proactive_days = 0;
  std::int64_t n_reactive = 0;
  std::int64_t n_proactive = 0;
};

struct ProminenceCell {
  std::int64_t sum = 0;
  std::int64_t sites = 0;
  double average = 0;
  bool has_previous = false;
  double pct_increase = 0;
  double pct_decrease = 0;
  std::map<long, std::int64_t> histogram;
};

struct SummaryCell {
  std::int64_t total = 0;
  double mean_days = 0;
  double mean_days_by_year = 0;
  std::int64_t n_reactive = 0;
  double mean_reactive_days = 0;
  std::int64_t n_proactive = 0;
  double mean_proactive_days = 0;
};

struct Rows {
  std::map<CellKey, ChurnCell> churn;
  std::map<CellKey, SpeedCell> speed;
  std::map<CellKey, ProminenceCell> prominence;
  // (list_id, "include" | "exclude")
  std::map<std::pair<std::string, std::string>, SummaryCell> list_summary;
};

Rows brute_force_metrics(const std::vector<listchurn::ObservationRecord>& observations,
                         const std::vector<listchurn::ListRecord>& lists, int from_year,
                         int to_year);

}  // namespace oracle
