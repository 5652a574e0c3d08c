#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "listchurn/metrics.hpp"

namespace listchurn {

enum class ColumnType { kString, kInteger, kNumber, kBoolean };

std::string_view to_string(ColumnType type);

struct Column {
  std::string name;
  ColumnType type;
  std::string description;
};

// Fixed, documented column order per report kind.
struct ReportSchema {
  std::string kind;
  std::string description;
  std::vector<Column> columns;
};

const std::vector<ReportSchema>& report_schemas();
// Throws PreconditionError for unknown kinds.
const ReportSchema& report_schema(std::string_view kind);

// Rows already rendered to text in schema column order.
struct ReportTable {
  std::string kind;
  std::vector<std::vector<std::string>> rows;
};

// Shortest text that reads back to the same double.
std::string format_number(double value);

std::vector<ReportTable> report_tables(const MetricsBundle& bundle);

std::string to_csv(const ReportTable& table);
std::string schema_json(const ReportSchema& schema);

// Writes <kind>.csv and <kind>.schema.json. Throws PreconditionError when a
// row does not match the schema width.
void emit_report(const ReportTable& table, const std::filesystem::path& dir);

// Serialized tables for handing metrics to the report stage.
std::string tables_to_json(const std::vector<ReportTable>& tables);
std::vector<ReportTable> tables_from_json(std::string_view text);

}  // namespace listchurn
