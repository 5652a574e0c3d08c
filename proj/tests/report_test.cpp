#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "listchurn/errors.hpp"
#include "listchurn/report.hpp"

using namespace listchurn;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> names(std::string_view kind) {
  std::vector<std::string> out;
  for (const auto& c : report_schema(kind).columns) out.push_back(c.name);
  return out;
}

const ReportTable& table(const std::vector<ReportTable>& tables, std::string_view kind) {
  for (const auto& t : tables) {
    if (t.kind == kind) return t;
  }
  FAIL("missing table " << kind);
  throw;
}

}  // namespace

// Column order is part of the interface; changing it must fail here.
TEST_CASE("report columns are fixed") {
  using V = std::vector<std::string>;
  CHECK(names("annual_prominence") == V{"scope", "entity", "year", "sum", "sites", "per_site_avg"});
  CHECK(names("change_stats") ==
        V{"scope", "entity", "year", "pct_increase", "pct_decrease", "histogram"});
  CHECK(names("churn") ==
        V{"scope", "entity", "year", "stability", "diversity", "domains", "degenerate"});
  CHECK(names("speed") == V{"scope", "entity", "year", "reactive", "proactive", "reactive_raw",
                            "proactive_raw", "mean_reactive_days", "mean_proactive_days",
                            "n_reactive", "n_proactive"});
  CHECK(names("list_summary") ==
        V{"list_id", "total_detections", "mean_days", "n_reactive", "mean_reactive_days",
          "n_proactive", "mean_proactive_days", "censored_mode", "mean_days_by_year"});
  CHECK(names("time_to_list_distribution") == V{"list_id", "day_bucket", "count"});
  CHECK(names("churn_average") == V{"scope", "averaged_over", "entity", "year", "cells",
                                    "stability", "diversity"});
  CHECK(names("speed_average") == V{"scope", "averaged_over", "entity", "year", "cells",
                                    "reactive", "proactive"});
  CHECK(report_schemas().size() == 8);
  CHECK_THROWS_AS(report_schema("figures"), PreconditionError);
}

TEST_CASE("list_summary leads with the detection table columns") {
  auto cols = names("list_summary");
  std::vector<std::string> head(cols.begin(), cols.begin() + 7);
  CHECK(head == std::vector<std::string>{"list_id", "total_detections", "mean_days", "n_reactive",
                                         "mean_reactive_days", "n_proactive",
                                         "mean_proactive_days"});
}

TEST_CASE("churn rows for one list over three years") {
  MetricsBundle b;
  b.churn = {{EntityKind::kList, "l", 2010, 0, 1, 3, true, false},
             {EntityKind::kList, "l", 2011, 0.5, 0.25, 4, false, false},
             {EntityKind::kList, "l", 2012, 0, 0, 0, false, true}};
  auto tables = report_tables(b);
  auto csv = to_csv(table(tables, "churn"));
  CHECK(csv ==
        "scope,entity,year,stability,diversity,domains,degenerate\n"
        "list,l,2010,0,1,3,false\n"
        "list,l,2011,0.5,0.25,4,false\n"
        "list,l,2012,0,0,0,true\n");
}

TEST_CASE("empty rows give header-only files") {
  auto tables = report_tables(MetricsBundle{});
  CHECK(tables.size() == report_schemas().size());
  for (const auto& t : tables) {
    auto csv = to_csv(t);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1);
  }
}

TEST_CASE("change_stats carries the non-zero histogram") {
  ProminenceRow r;
  r.kind = EntityKind::kGlobal;
  r.entity = "global";
  r.year = 2011;
  r.has_previous = true;
  r.pct_sites_increase = 50;
  r.pct_sites_decrease = 25;
  r.change_histogram = {{-4, 1}, {2, 2}};
  ProminenceRow first = r;
  first.year = 2010;
  first.has_previous = false;
  MetricsBundle b;
  b.prominence = {first, r};
  auto tables = report_tables(b);
  CHECK(table(tables, "annual_prominence").rows.size() == 2);
  const auto& change = table(tables, "change_stats");
  REQUIRE(change.rows.size() == 1);
  CHECK(change.rows[0] == std::vector<std::string>{"global", "global", "2011", "50", "25", "-4:1;2:2"});
}

TEST_CASE("csv quoting and width check") {
  ReportTable t{"time_to_list_distribution", {{"a,b", "0", "1"}, {"say \"hi\"", "30", "2"}}};
  CHECK(to_csv(t) == "list_id,day_bucket,count\n\"a,b\",0,1\n\"say \"\"hi\"\"\",30,2\n");
  t.rows.push_back({"short"});
  CHECK_THROWS_AS(to_csv(t), PreconditionError);
}

TEST_CASE("numbers round-trip at full precision") {
  for (double v : {0.1, 1.0 / 3, 2.0 / 3, 1e-17, 123456789.125, -1280.066037735849}) {
    CHECK(std::stod(format_number(v)) == v);
  }
  CHECK(format_number(-0.0) == "0");
  CHECK(format_number(2) == "2");
}

TEST_CASE("emit_report writes csv and schema side by side") {
  auto dir = fs::temp_directory_path() / "listchurn_report_test";
  fs::remove_all(dir);
  ReportTable t{"time_to_list_distribution", {{"l", "-30", "4"}}};
  emit_report(t, dir);
  CHECK(slurp(dir / "time_to_list_distribution.csv") == "list_id,day_bucket,count\nl,-30,4\n");
  auto schema = nlohmann::json::parse(slurp(dir / "time_to_list_distribution.schema.json"));
  CHECK(schema["kind"] == "time_to_list_distribution");
  CHECK(schema["columns"].size() == 3);
  CHECK(schema["columns"][1]["name"] == "day_bucket");
  CHECK(schema["columns"][1]["type"] == "integer");
  fs::remove_all(dir);
}

TEST_CASE("tables survive the metrics file") {
  MetricsBundle b;
  b.time_to_list = {{"l", 0, 3}, {"l", 60, 1}};
  auto tables = report_tables(b);
  auto back = tables_from_json(tables_to_json(tables));
  REQUIRE(back.size() == tables.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].kind == tables[i].kind);
    CHECK(back[i].rows == tables[i].rows);
  }
  CHECK_THROWS_AS(tables_from_json("{"), ParseError);
  CHECK_THROWS_AS(tables_from_json("{\"nope\": []}"), PreconditionError);
}
