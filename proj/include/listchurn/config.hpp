#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "listchurn/blacklist.hpp"
#include "listchurn/domain.hpp"
#include "listchurn/store.hpp"

namespace listchurn {

// A blacklist is fetched from the archive by URL, or read from a local
// directory holding one YYYY-MM-DD[.ext] file per snapshot.
struct BlacklistSource {
  std::string list_id;
  std::optional<std::string> url;
  std::optional<std::filesystem::path> path;
  ListFormat format = ListFormat::kUnknown;
};

struct RunConfig {
  std::map<std::string, std::filesystem::path> site_lists;  // country code -> hostnames file
  std::vector<BlacklistSource> blacklists;                  // sorted by list id
  int from_year = 2009;
  int to_year = 2017;
  int interval_months = 3;
  std::optional<int> lists_from_year;  // list crawl start, defaults to from_year
  std::filesystem::path cache_dir = "cache";
  PslMode psl_mode = PslMode::kSuffixAware;
  std::optional<std::filesystem::path> psl_file;
  std::filesystem::path out = "out";
  std::string archive_url = "https://web.archive.org";
  bool offline = false;
  double rate_limit = 1.0;  // requests per second; 0 disables pacing
  int max_parallel = 4;
  int max_tries = 4;
  FirstSeenScope first_seen = FirstSeenScope::kYearLocal;

  int list_start_year() const { return lists_from_year.value_or(from_year); }
};

// Flat view of a TOML-style file: "table.key" -> raw scalar text.
struct ConfigValue {
  enum class Type { kString, kInteger, kFloat, kBoolean };
  Type type = Type::kString;
  std::string text;  // unquoted string, or the literal as written
  int line = 0;
};

// Accepts comments, [table] and [table.sub] headers, and key = value lines
// with basic strings, integers, floats and booleans. Throws ConfigError.
std::map<std::string, ConfigValue> parse_toml_subset(std::string_view text);

// Relative paths resolve against `base_dir`. Throws ConfigError.
RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& file);

// Throws ConfigError when the config cannot drive a run.
void validate(const RunConfig& config);

std::string config_to_toml(const RunConfig& config);

}  // namespace listchurn
