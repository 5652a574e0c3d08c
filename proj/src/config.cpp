#include "listchurn/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "listchurn/errors.hpp"
#include "listchurn/report.hpp"

namespace listchurn {

namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool bare_key(std::string_view k) {
  return !k.empty() && std::all_of(k.begin(), k.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  });
}

[[noreturn]] void fail(int line, const std::string& what) {
  throw ConfigError("line " + std::to_string(line) + ": " + what);
}

// Dotted key, each part bare or quoted.
std::string parse_key(std::string_view text, int line) {
  std::string out;
  std::size_t i = 0;
  while (true) {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
    std::string part;
    if (i < text.size() && text[i] == '"') {
      auto close = text.find('"', i + 1);
      if (close == std::string_view::npos) fail(line, "unterminated quoted key");
      part = std::string(text.substr(i + 1, close - i - 1));
      i = close + 1;
    } else {
      auto end = text.find('.', i);
      part = std::string(trim(text.substr(i, end == std::string_view::npos ? end : end - i)));
      if (!bare_key(part)) fail(line, "invalid key '" + std::string(text) + "'");
      i = end == std::string_view::npos ? text.size() : end;
    }
    if (part.empty()) fail(line, "empty key");
    out += out.empty() ? part : "." + part;
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
    if (i >= text.size()) return out;
    if (text[i] != '.') fail(line, "invalid key '" + std::string(text) + "'");
    ++i;
  }
}

// Value text after '=', with any trailing comment removed.
ConfigValue parse_value(std::string_view text, int line) {
  text = trim(text);
  ConfigValue v;
  v.line = line;
  if (text.empty()) fail(line, "missing value");
  if (text.front() == '"') {
    std::string out;
    std::size_t i = 1;
    for (; i < text.size() && text[i] != '"'; ++i) {
      if (text[i] != '\\') {
        out += text[i];
        continue;
      }
      if (++i >= text.size()) break;
      switch (text[i]) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        default: fail(line, "unsupported escape");
      }
    }
    if (i >= text.size()) fail(line, "unterminated string");
    auto rest = trim(text.substr(i + 1));
    if (!rest.empty() && rest.front() != '#') fail(line, "text after string");
    v.type = ConfigValue::Type::kString;
    v.text = std::move(out);
    return v;
  }
  if (auto hash = text.find('#'); hash != std::string_view::npos) text = trim(text.substr(0, hash));
  v.text = std::string(text);
  if (text == "true" || text == "false") {
    v.type = ConfigValue::Type::kBoolean;
    return v;
  }
  std::string digits;
  for (char c : text) {
    if (c != '_') digits += c;
  }
  long long i = 0;
  auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), i);
  if (ec == std::errc() && p == digits.data() + digits.size()) {
    v.type = ConfigValue::Type::kInteger;
    v.text = digits;
    return v;
  }
  double d = 0;
  auto [q, ec2] = std::from_chars(digits.data(), digits.data() + digits.size(), d);
  if (ec2 == std::errc() && q == digits.data() + digits.size()) {
    v.type = ConfigValue::Type::kFloat;
    v.text = digits;
    return v;
  }
  fail(line, "unsupported value '" + std::string(text) + "'");
}

class Reader {
 public:
  explicit Reader(std::map<std::string, ConfigValue> values) : values_(std::move(values)) {}

  const ConfigValue* find(const std::string& key) {
    auto it = values_.find(key);
    if (it == values_.end()) return nullptr;
    used_.insert(key);
    return &it->second;
  }

  std::optional<std::string> string(const std::string& key) {
    auto* v = find(key);
    if (!v) return std::nullopt;
    if (v->type != ConfigValue::Type::kString) fail(v->line, key + " must be a string");
    return v->text;
  }

  std::optional<long long> integer(const std::string& key) {
    auto* v = find(key);
    if (!v) return std::nullopt;
    if (v->type != ConfigValue::Type::kInteger) fail(v->line, key + " must be an integer");
    return std::stoll(v->text);
  }

  std::optional<double> number(const std::string& key) {
    auto* v = find(key);
    if (!v) return std::nullopt;
    if (v->type != ConfigValue::Type::kInteger && v->type != ConfigValue::Type::kFloat) {
      fail(v->line, key + " must be a number");
    }
    return std::stod(v->text);
  }

  std::optional<bool> boolean(const std::string& key) {
    auto* v = find(key);
    if (!v) return std::nullopt;
    if (v->type != ConfigValue::Type::kBoolean) fail(v->line, key + " must be true or false");
    return v->text == "true";
  }

  std::vector<std::string> keys_under(const std::string& prefix) const {
    std::vector<std::string> out;
    for (const auto& [k, _] : values_) {
      if (k.starts_with(prefix)) out.push_back(k);
    }
    return out;
  }

  void reject_unknown() const {
    for (const auto& [k, v] : values_) {
      if (!used_.count(k)) fail(v.line, "unknown key '" + k + "'");
    }
  }

 private:
  std::map<std::string, ConfigValue> values_;
  std::set<std::string> used_;
};

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::map<std::string, ConfigValue> parse_toml_subset(std::string_view text) {
  std::map<std::string, ConfigValue> out;
  std::string table;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view l = trim(raw);
    if (l.empty() || l.front() == '#') continue;
    if (l.front() == '[') {
      auto close = l.find(']');
      if (close == std::string_view::npos || l.starts_with("[[")) fail(line, "bad table header");
      auto rest = trim(l.substr(close + 1));
      if (!rest.empty() && rest.front() != '#') fail(line, "text after table header");
      table = parse_key(l.substr(1, close - 1), line);
      continue;
    }
    // The first '=' outside a quoted key separates key and value.
    std::size_t eq = std::string_view::npos;
    bool quote = false;
    for (std::size_t i = 0; i < l.size(); ++i) {
      if (l[i] == '"') quote = !quote;
      if (l[i] == '=' && !quote) {
        eq = i;
        break;
      }
    }
    if (eq == std::string_view::npos) fail(line, "expected key = value");
    std::string key = parse_key(l.substr(0, eq), line);
    if (!table.empty()) key = table + "." + key;
    if (out.count(key)) fail(line, "duplicate key '" + key + "'");
    out.emplace(key, parse_value(l.substr(eq + 1), line));
  }
  return out;
}

RunConfig parse_config(std::string_view text, const fs::path& base_dir) {
  Reader r(parse_toml_subset(text));
  RunConfig c;
  auto as_int = [](long long v, const char* key) {
    if (v < -1000000 || v > 1000000) throw ConfigError(std::string(key) + " out of range");
    return static_cast<int>(v);
  };
  if (auto v = r.integer("from_year")) c.from_year = as_int(*v, "from_year");
  if (auto v = r.integer("to_year")) c.to_year = as_int(*v, "to_year");
  if (auto v = r.integer("interval_months")) c.interval_months = as_int(*v, "interval_months");
  if (auto v = r.integer("lists_from_year")) c.lists_from_year = as_int(*v, "lists_from_year");
  if (auto v = r.string("cache_dir")) c.cache_dir = resolve(base_dir, *v);
  else c.cache_dir = base_dir / c.cache_dir;
  if (auto v = r.string("out")) c.out = resolve(base_dir, *v);
  else c.out = base_dir / c.out;
  if (auto v = r.string("psl_mode")) c.psl_mode = psl_mode_from_string(*v);
  if (auto v = r.string("psl_file")) c.psl_file = resolve(base_dir, *v);
  if (auto v = r.string("archive_url")) c.archive_url = *v;
  if (auto v = r.boolean("offline")) c.offline = *v;
  if (auto v = r.number("rate_limit")) c.rate_limit = *v;
  if (auto v = r.integer("max_parallel")) c.max_parallel = as_int(*v, "max_parallel");
  if (auto v = r.integer("max_tries")) c.max_tries = as_int(*v, "max_tries");
  if (auto v = r.string("first_seen")) {
    try {
      c.first_seen = first_seen_scope_from_string(*v);
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }

  for (const auto& key : r.keys_under("sites.")) {
    std::string cc = key.substr(6);
    if (cc.find('.') != std::string::npos) throw ConfigError("nested key under [sites]: " + key);
    c.site_lists[cc] = resolve(base_dir, *r.string(key));
  }

  std::set<std::string> ids;
  for (const auto& key : r.keys_under("blacklists.")) {
    auto dot = key.find('.', 11);
    if (dot == std::string::npos) throw ConfigError("blacklist entries need a table: " + key);
    ids.insert(key.substr(11, dot - 11));
  }
  for (const auto& id : ids) {
    const std::string p = "blacklists." + id + ".";
    BlacklistSource s;
    s.list_id = id;
    s.url = r.string(p + "url");
    if (auto v = r.string(p + "path")) s.path = resolve(base_dir, *v);
    if (auto v = r.string(p + "format")) {
      try {
        s.format = list_format_from_string(*v);
      } catch (const ParseError& e) {
        throw ConfigError(e.what());
      }
    }
    c.blacklists.push_back(std::move(s));
  }
  r.reject_unknown();
  return c;
}

RunConfig load_config(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), file.parent_path());
}

void validate(const RunConfig& c) {
  if (c.site_lists.empty()) throw ConfigError("no site lists configured");
  if (c.blacklists.empty()) throw ConfigError("no blacklists configured");
  if (c.from_year < 1996 || c.to_year > 2100 || c.from_year > c.to_year) {
    throw ConfigError("year range " + std::to_string(c.from_year) + ".." +
                      std::to_string(c.to_year) + " is not within 1996..2100");
  }
  if (c.list_start_year() < 1996 || c.list_start_year() > c.to_year) {
    throw ConfigError("lists_from_year must lie between 1996 and to_year");
  }
  if (c.interval_months < 1 || c.interval_months > 12 || 12 % c.interval_months != 0) {
    throw ConfigError("interval_months must divide 12");
  }
  if (c.rate_limit < 0) throw ConfigError("rate_limit must not be negative");
  if (c.max_parallel < 1) throw ConfigError("max_parallel must be at least 1");
  if (c.max_tries < 1) throw ConfigError("max_tries must be at least 1");
  for (const auto& [cc, _] : c.site_lists) {
    if (cc.empty()) throw ConfigError("empty country code");
  }
  for (const auto& b : c.blacklists) {
    if (b.url.has_value() == b.path.has_value()) {
      throw ConfigError("blacklist " + b.list_id + " needs exactly one of url and path");
    }
  }
}

std::string config_to_toml(const RunConfig& c) {
  std::ostringstream out;
  out << "from_year = " << c.from_year << "\n";
  out << "to_year = " << c.to_year << "\n";
  out << "interval_months = " << c.interval_months << "\n";
  if (c.lists_from_year) out << "lists_from_year = " << *c.lists_from_year << "\n";
  out << "cache_dir = " << quoted(c.cache_dir.generic_string()) << "\n";
  out << "out = " << quoted(c.out.generic_string()) << "\n";
  out << "psl_mode = " << quoted(std::string(to_string(c.psl_mode))) << "\n";
  if (c.psl_file) out << "psl_file = " << quoted(c.psl_file->generic_string()) << "\n";
  out << "archive_url = " << quoted(c.archive_url) << "\n";
  out << "offline = " << (c.offline ? "true" : "false") << "\n";
  out << "rate_limit = " << format_number(c.rate_limit) << "\n";
  out << "max_parallel = " << c.max_parallel << "\n";
  out << "max_tries = " << c.max_tries << "\n";
  out << "first_seen = " << quoted(std::string(to_string(c.first_seen))) << "\n";
  out << "\n[sites]\n";
  for (const auto& [cc, file] : c.site_lists) {
    out << cc << " = " << quoted(file.generic_string()) << "\n";
  }
  for (const auto& b : c.blacklists) {
    out << "\n[blacklists." << b.list_id << "]\n";
    if (b.url) out << "url = " << quoted(*b.url) << "\n";
    if (b.path) out << "path = " << quoted(b.path->generic_string()) << "\n";
    out << "format = " << quoted(std::string(to_string(b.format))) << "\n";
  }
  return out.str();
}

}  // namespace listchurn
