#include "listchurn/report.hpp"

#include <charconv>
#include <fstream>

#include "json.hpp"
#include "listchurn/errors.hpp"

namespace listchurn {

namespace fs = std::filesystem;

namespace {

constexpr ColumnType S = ColumnType::kString;
constexpr ColumnType I = ColumnType::kInteger;
constexpr ColumnType N = ColumnType::kNumber;
constexpr ColumnType B = ColumnType::kBoolean;

std::vector<ReportSchema> build_schemas() {
  const Column scope{"scope", S, "entity kind: list, country or global"};
  const Column entity{"entity", S, "list id, country code or 'global'"};
  const Column year{"year", I, "calendar year"};
  return {
      {"annual_prominence",
       "Distinct blacklisted domains per website, summed and averaged per year",
       {scope,
        entity,
        year,
        {"sum", I, "sum over sites of distinct blacklisted domains"},
        {"sites", I, "sites in scope"},
        {"per_site_avg", N, "sum / sites"}}},
      {"change_stats",
       "Year-over-year change in per-site domain counts",
       {scope,
        entity,
        year,
        {"pct_increase", N, "percent of sites whose count grew since the previous year"},
        {"pct_decrease", N, "percent of sites whose count shrank"},
        {"histogram", S, "non-zero deltas as delta:count pairs separated by ';'"}}},
      {"churn",
       "Stability and diversity of the detected domain set",
       {scope,
        entity,
        year,
        {"stability", N, "Jaccard similarity with the previous year"},
        {"diversity", N, "share of domains never seen in earlier years"},
        {"domains", I, "size of the year's domain set"},
        {"degenerate", B, "empty domain set after the first year"}}},
      {"speed",
       "Reactive and proactive update speed",
       {scope,
        entity,
        year,
        {"reactive", N, "normalized reactive score"},
        {"proactive", N, "normalized proactive score"},
        {"reactive_raw", N, "n_reactive / mean_reactive_days"},
        {"proactive_raw", N, "n_proactive * |mean_proactive_days|"},
        {"mean_reactive_days", N, "mean positive time difference"},
        {"mean_proactive_days", N, "mean non-positive time difference"},
        {"n_reactive", I, "reactive (site, domain) detections"},
        {"n_proactive", I, "proactive (site, domain) detections"}}},
      {"list_summary",
       "Detections and listing delay per blacklist",
       {{"list_id", S, "blacklist id"},
        {"total_detections", I, "(site, domain, year) detections"},
        {"mean_days", N, "mean signed time difference over detections"},
        {"n_reactive", I, "detections with positive time difference"},
        {"mean_reactive_days", N, "mean positive time difference"},
        {"n_proactive", I, "detections with zero or negative time difference"},
        {"mean_proactive_days", N, "mean non-positive time difference"},
        {"censored_mode", S, "include or exclude detections seen before the first snapshot"},
        {"mean_days_by_year", N, "unweighted mean of the yearly means"}}},
      {"time_to_list_distribution",
       "Time differences of uncensored detections in 30-day buckets",
       {{"list_id", S, "blacklist id"},
        {"day_bucket", I, "bucket start in days; covers [start, start + 30)"},
        {"count", I, "detections in the bucket"}}},
      {"churn_average",
       "Churn scores averaged over years, entities or both",
       {scope,
        {"averaged_over", S, "years, countries (entities of the kind) or both"},
        {"entity", S, "entity, or '*' when averaged over entities"},
        {"year", S, "year, or '*' when averaged over years"},
        {"cells", I, "rows averaged"},
        {"stability", N, "mean stability"},
        {"diversity", N, "mean diversity"}}},
      {"speed_average",
       "Normalized speed scores averaged over years, entities or both",
       {scope,
        {"averaged_over", S, "years, countries (entities of the kind) or both"},
        {"entity", S, "entity, or '*' when averaged over entities"},
        {"year", S, "year, or '*' when averaged over years"},
        {"cells", I, "rows averaged"},
        {"reactive", N, "mean normalized reactive score"},
        {"proactive", N, "mean normalized proactive score"}}},
  };
}

std::string text(std::size_t v) { return std::to_string(v); }
std::string text(int v) { return std::to_string(v); }
std::string text(double v) { return format_number(v); }
std::string text(bool v) { return v ? "true" : "false"; }
std::string text(std::string_view v) { return std::string(v); }

template <typename... T>
std::vector<std::string> row(const T&... values) {
  return {text(values)...};
}

std::string csv_field(const std::string& v) {
  if (v.find_first_of(",\"\n\r") == std::string::npos) return v;
  std::string out = "\"";
  for (char c : v) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string_view to_string(ColumnType type) {
  switch (type) {
    case ColumnType::kString:
      return "string";
    case ColumnType::kInteger:
      return "integer";
    case ColumnType::kNumber:
      return "number";
    case ColumnType::kBoolean:
      return "boolean";
  }
  return "string";
}

const std::vector<ReportSchema>& report_schemas() {
  static const std::vector<ReportSchema> schemas = build_schemas();
  return schemas;
}

const ReportSchema& report_schema(std::string_view kind) {
  for (const auto& s : report_schemas()) {
    if (s.kind == kind) return s;
  }
  throw PreconditionError("unknown report kind: " + std::string(kind));
}

std::string format_number(double value) {
  if (value == 0) return "0";  // also folds -0
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, end);
}

std::vector<ReportTable> report_tables(const MetricsBundle& b) {
  std::vector<ReportTable> out;
  auto table = [&](const char* kind) -> ReportTable& {
    out.push_back({kind, {}});
    return out.back();
  };

  auto& prominence = table("annual_prominence");
  for (const auto& r : b.prominence) {
    prominence.rows.push_back(row(to_string(r.kind), r.entity, r.year,
                                  r.distinct_domains_per_site_sum, r.sites, r.per_site_average));
  }
  auto& change = table("change_stats");
  for (const auto& r : b.prominence) {
    if (!r.has_previous) continue;
    std::string hist;
    for (const auto& [delta, n] : r.change_histogram) {
      if (!hist.empty()) hist += ';';
      hist += std::to_string(delta) + ":" + std::to_string(n);
    }
    change.rows.push_back(row(to_string(r.kind), r.entity, r.year, r.pct_sites_increase,
                              r.pct_sites_decrease, std::string_view(hist)));
  }
  auto& churn = table("churn");
  for (const auto& r : b.churn) {
    churn.rows.push_back(row(to_string(r.kind), r.entity, r.year, r.stability, r.diversity,
                             r.domains, r.degenerate));
  }
  auto& speed = table("speed");
  for (const auto& r : b.speed) {
    speed.rows.push_back(row(to_string(r.kind), r.entity, r.year, r.reactive, r.proactive,
                             r.raw.reactive_raw, r.raw.proactive_raw, r.raw.mean_reactive_days,
                             r.raw.mean_proactive_days, r.raw.n_reactive, r.raw.n_proactive));
  }
  auto& summary = table("list_summary");
  for (const auto& r : b.list_summary) {
    summary.rows.push_back(row(r.list_id, r.total_detections, r.mean_days, r.n_reactive,
                               r.mean_reactive_days, r.n_proactive, r.mean_proactive_days,
                               to_string(r.censored_mode), r.mean_days_by_year));
  }
  auto& dist = table("time_to_list_distribution");
  for (const auto& r : b.time_to_list) {
    dist.rows.push_back({r.list_id, std::to_string(r.bucket_start_days), text(r.count)});
  }
  auto star = [](const auto& opt) {
    if (!opt) return std::string("*");
    if constexpr (std::is_same_v<std::decay_t<decltype(*opt)>, int>) {
      return std::to_string(*opt);
    } else {
      return std::string(*opt);
    }
  };
  auto& churn_avg = table("churn_average");
  for (const auto& r : b.churn_average) {
    churn_avg.rows.push_back({std::string(to_string(r.kind)), std::string(to_string(r.by)),
                              star(r.entity), star(r.year), text(r.cells), text(r.stability),
                              text(r.diversity)});
  }
  auto& speed_avg = table("speed_average");
  for (const auto& r : b.speed_average) {
    speed_avg.rows.push_back({std::string(to_string(r.kind)), std::string(to_string(r.by)),
                              star(r.entity), star(r.year), text(r.cells), text(r.reactive),
                              text(r.proactive)});
  }
  return out;
}

std::string to_csv(const ReportTable& table) {
  const ReportSchema& schema = report_schema(table.kind);
  std::string out;
  for (std::size_t i = 0; i < schema.columns.size(); ++i) {
    if (i) out += ',';
    out += schema.columns[i].name;
  }
  out += '\n';
  for (const auto& r : table.rows) {
    if (r.size() != schema.columns.size()) {
      throw PreconditionError(table.kind + " row has " + std::to_string(r.size()) +
                              " fields, schema has " + std::to_string(schema.columns.size()));
    }
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) out += ',';
      out += csv_field(r[i]);
    }
    out += '\n';
  }
  return out;
}

std::string schema_json(const ReportSchema& schema) {
  nlohmann::ordered_json columns = nlohmann::ordered_json::array();
  for (const auto& c : schema.columns) {
    columns.push_back(nlohmann::ordered_json{{"name", c.name},
                                             {"type", std::string(to_string(c.type))},
                                             {"description", c.description}});
  }
  nlohmann::ordered_json j{{"kind", schema.kind},
                           {"version", 1},
                           {"description", schema.description},
                           {"file", schema.kind + ".csv"},
                           {"columns", columns}};
  return j.dump(2) + "\n";
}

namespace {
void write_file(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw Error("IoError", "cannot write " + path.string());
  }
  fs::rename(tmp, path);
}
}  // namespace

void emit_report(const ReportTable& table, const fs::path& dir) {
  fs::create_directories(dir);
  std::string csv = to_csv(table);
  write_file(dir / (table.kind + ".csv"), csv);
  write_file(dir / (table.kind + ".schema.json"), schema_json(report_schema(table.kind)));
}

std::string tables_to_json(const std::vector<ReportTable>& tables) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& t : tables) j[t.kind] = t.rows;
  return j.dump(1) + "\n";
}

std::vector<ReportTable> tables_from_json(std::string_view text) {
  try {
    auto j = nlohmann::ordered_json::parse(text);
    std::vector<ReportTable> out;
    for (const auto& [kind, rows] : j.items()) {
      report_schema(kind);
      out.push_back({kind, rows.get<std::vector<std::vector<std::string>>>()});
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("metrics file: ") + e.what());
  }
}

}  // namespace listchurn
