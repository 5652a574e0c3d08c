#include "listchurn/blacklist.hpp"

#include <algorithm>
#include <array>
#include <vector>

#include "listchurn/errors.hpp"

namespace listchurn {

namespace {

constexpr std::string_view kWhitespace = " \t\r\n\f\v";

std::string_view trim(std::string_view s) {
  auto first = s.find_first_not_of(kWhitespace);
  if (first == std::string_view::npos) return {};
  auto last = s.find_last_not_of(kWhitespace);
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_lines(std::string_view text) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      if (start < text.size()) lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

std::vector<std::string_view> split_tokens(std::string_view s) {
  std::vector<std::string_view> tokens;
  std::size_t pos = 0;
  while (true) {
    auto first = s.find_first_not_of(kWhitespace, pos);
    if (first == std::string_view::npos) break;
    auto last = s.find_first_of(kWhitespace, first);
    tokens.push_back(s.substr(first, last - first));
    if (last == std::string_view::npos) break;
    pos = last;
  }
  return tokens;
}

bool contains(std::string_view s, std::string_view needle) {
  return s.find(needle) != std::string_view::npos;
}

bool is_cosmetic(std::string_view rule) {
  static constexpr std::array<std::string_view, 5> kMarkers = {"##", "#@#", "#?#", "#$#", "#%#"};
  return std::any_of(kMarkers.begin(), kMarkers.end(),
                     [&](std::string_view m) { return contains(rule, m); });
}

bool is_hash_comment(std::string_view line) {
  return line.starts_with("#") && !is_cosmetic(line);
}

bool is_adblock_header(std::string_view line) {
  if (!line.starts_with("[")) return false;
  std::string lower;
  for (char c : line) lower.push_back(static_cast<char>(c >= 'A' && c <= 'Z' ? c + 32 : c));
  return contains(lower, "adblock");
}

bool is_reserved_host(std::string_view host) {
  static constexpr std::array<std::string_view, 12> kReserved = {
      "localhost",      "localhost.localdomain", "local",        "broadcasthost",
      "ip6-localhost",  "ip6-loopback",          "ip6-localnet", "ip6-mcastprefix",
      "ip6-allnodes",   "ip6-allrouters",        "ip6-allhosts", "0.0.0.0"};
  std::string lower;
  for (char c : host) lower.push_back(static_cast<char>(c >= 'A' && c <= 'Z' ? c + 32 : c));
  if (!lower.empty() && lower.back() == '.') lower.pop_back();
  return std::find(kReserved.begin(), kReserved.end(), lower) != kReserved.end();
}

bool looks_like_filter_rule(std::string_view line) {
  return line.starts_with("|") || line.starts_with("@@") || is_cosmetic(line) ||
         line.find_first_of("$^/*") != std::string_view::npos;
}

class Extractor {
 public:
  Extractor(const SuffixTable& table, PslMode mode) : table_(table), mode_(mode) {}

  // Reduces one hostname; returns false when it was rejected.
  bool add_host(std::string_view host) {
    ++result_.diagnostics.rules;
    if (is_reserved_host(host)) {
      ++result_.diagnostics.reserved;
      return false;
    }
    try {
      std::string normalized = normalize_host(host);
      if (is_ip_literal(normalized)) {
        ++result_.diagnostics.malformed;
        return false;
      }
      result_.domains.insert(registrable_domain(normalized, table_, mode_));
      return true;
    } catch (const UnderspecifiedHost&) {
      ++result_.diagnostics.reserved;
    } catch (const InvalidHost&) {
      ++result_.diagnostics.malformed;
    }
    return false;
  }

  void hosts_line(std::string_view line) {
    line = trim(line.substr(0, line.find('#')));
    auto tokens = split_tokens(line);
    if (tokens.size() < 2 || !is_ip_literal(tokens[0])) {
      ++result_.diagnostics.rules;
      ++result_.diagnostics.malformed;
      return;
    }
    for (std::size_t i = 1; i < tokens.size(); ++i) add_host(tokens[i]);
  }

  void domain_line(std::string_view line) {
    line = trim(line.substr(0, line.find('#')));
    auto tokens = split_tokens(line);
    if (tokens.size() != 1) {
      ++result_.diagnostics.rules;
      ++result_.diagnostics.malformed;
      return;
    }
    std::string_view host = tokens[0];
    if (host.starts_with("*.")) host.remove_prefix(2);
    if (host.starts_with(".")) host.remove_prefix(1);
    add_host(host);
  }

  void filter_line(std::string_view rule) {
    if (rule.starts_with("@@")) {
      ++result_.diagnostics.exceptions;
      return;
    }
    if (is_cosmetic(rule)) {
      ++result_.diagnostics.cosmetic;
      return;
    }

    std::string_view pattern = rule;
    std::string_view options;
    if (auto dollar = rule.rfind('$'); dollar != std::string_view::npos) {
      std::string_view tail = rule.substr(dollar + 1);
      bool option_like = !tail.empty() && std::all_of(tail.begin(), tail.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
               c == '~' || c == ',' || c == '=' || c == '|' || c == '.' || c == '-' ||
               c == '_' || c == '*';
      });
      if (option_like) {
        pattern = rule.substr(0, dollar);
        options = tail;
      }
    }

    if (auto host = anchor_host(pattern); !host.empty()) {
      if (host.find('.') == std::string_view::npos || host.find('*') != std::string_view::npos) {
        ++result_.diagnostics.rules;
        ++result_.diagnostics.no_domain;
        return;
      }
      add_host(host);
      return;
    }

    bool any_option_domain = false;
    for (auto value : option_domains(options)) {
      any_option_domain = true;
      add_host(value);
    }
    if (!any_option_domain) {
      ++result_.diagnostics.rules;
      ++result_.diagnostics.no_domain;
    }
  }

  ParseResult take() { return std::move(result_); }
  ParseDiagnostics& diagnostics() { return result_.diagnostics; }

 private:
  static std::string_view anchor_host(std::string_view pattern) {
    std::string_view rest;
    if (pattern.starts_with("||")) {
      rest = pattern.substr(2);
    } else if (pattern.starts_with("|")) {
      std::string_view p = pattern.substr(1);
      auto sep = p.find("://");
      if (sep == std::string_view::npos || sep == 0) return {};
      for (char c : p.substr(0, sep)) {
        if (!((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'))) return {};
      }
      rest = p.substr(sep + 3);
    } else {
      return {};
    }
    return rest.substr(0, rest.find_first_of("^/:?|$"));
  }

  static std::vector<std::string_view> option_domains(std::string_view options) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (start <= options.size() && !options.empty()) {
      auto comma = options.find(',', start);
      std::string_view opt = options.substr(start, comma - start);
      if (opt.starts_with("domain=")) {
        std::string_view values = opt.substr(7);
        std::size_t vstart = 0;
        while (true) {
          auto bar = values.find('|', vstart);
          std::string_view v = values.substr(vstart, bar - vstart);
          if (!v.empty() && !v.starts_with("~")) out.push_back(v);
          if (bar == std::string_view::npos) break;
          vstart = bar + 1;
        }
      }
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return out;
  }

  const SuffixTable& table_;
  PslMode mode_;
  ParseResult result_;
};

enum class LineKind { kBlank, kComment, kHosts, kFilter, kDomain };

LineKind classify(std::string_view line) {
  if (line.empty()) return LineKind::kBlank;
  if (line.starts_with("!") || is_hash_comment(line) || is_adblock_header(line)) {
    return LineKind::kComment;
  }
  auto tokens = split_tokens(line.substr(0, line.find('#')));
  if (!tokens.empty() && is_ip_literal(tokens[0]) && tokens.size() >= 2) return LineKind::kHosts;
  if (looks_like_filter_rule(line)) return LineKind::kFilter;
  return LineKind::kDomain;
}

}  // namespace

std::string_view to_string(ListFormat format) {
  switch (format) {
    case ListFormat::kHosts:
      return "hosts";
    case ListFormat::kFilterList:
      return "filter-list";
    case ListFormat::kDomainList:
      return "domain-list";
    case ListFormat::kUnknown:
      break;
  }
  return "unknown";
}

ListFormat list_format_from_string(std::string_view text) {
  if (text == "hosts") return ListFormat::kHosts;
  if (text == "filter-list") return ListFormat::kFilterList;
  if (text == "domain-list") return ListFormat::kDomainList;
  if (text == "unknown" || text.empty()) return ListFormat::kUnknown;
  throw ParseError("unknown list format: " + std::string(text));
}

ListFormat detect_format(std::string_view text) {
  std::size_t total = 0, ip = 0, filter = 0, bare = 0;
  for (auto raw : split_lines(text)) {
    std::string_view line = trim(raw);
    if (is_adblock_header(line)) return ListFormat::kFilterList;
    switch (classify(line)) {
      case LineKind::kBlank:
      case LineKind::kComment:
        continue;
      case LineKind::kHosts:
        ++ip;
        break;
      case LineKind::kFilter:
        ++filter;
        break;
      case LineKind::kDomain:
        if (split_tokens(line.substr(0, line.find('#'))).size() == 1) ++bare;
        break;
    }
    ++total;
  }
  if (total == 0) return ListFormat::kUnknown;
  if (2 * ip > total) return ListFormat::kHosts;
  if (2 * filter > total) return ListFormat::kFilterList;
  if (2 * bare > total) return ListFormat::kDomainList;
  if (filter > 0) return ListFormat::kFilterList;
  return ListFormat::kUnknown;
}

ParseResult parse_hosts(std::string_view text, const SuffixTable& table, PslMode mode) {
  Extractor ex(table, mode);
  for (auto raw : split_lines(text)) {
    std::string_view line = trim(raw);
    if (line.empty()) continue;
    if (line.starts_with("#")) {
      ++ex.diagnostics().comments;
      continue;
    }
    ex.hosts_line(line);
  }
  return ex.take();
}

ParseResult parse_filter_list(std::string_view text, const SuffixTable& table, PslMode mode) {
  Extractor ex(table, mode);
  for (auto raw : split_lines(text)) {
    std::string_view line = trim(raw);
    if (line.empty()) continue;
    if (line.starts_with("!") || is_adblock_header(line) || is_hash_comment(line)) {
      ++ex.diagnostics().comments;
      continue;
    }
    ex.filter_line(line);
  }
  return ex.take();
}

ParseResult parse_domain_list(std::string_view text, const SuffixTable& table, PslMode mode) {
  Extractor ex(table, mode);
  for (auto raw : split_lines(text)) {
    std::string_view line = trim(raw);
    if (line.empty()) continue;
    if (line.starts_with("#") || line.starts_with("!")) {
      ++ex.diagnostics().comments;
      continue;
    }
    ex.domain_line(line);
  }
  return ex.take();
}

ParseResult parse_mixed(std::string_view text, const SuffixTable& table, PslMode mode) {
  Extractor ex(table, mode);
  for (auto raw : split_lines(text)) {
    std::string_view line = trim(raw);
    switch (classify(line)) {
      case LineKind::kBlank:
        break;
      case LineKind::kComment:
        ++ex.diagnostics().comments;
        break;
      case LineKind::kHosts:
        ex.hosts_line(line);
        break;
      case LineKind::kFilter:
        ex.filter_line(line);
        break;
      case LineKind::kDomain:
        ex.domain_line(line);
        break;
    }
  }
  return ex.take();
}

ParseResult parse_blacklist(std::string_view text, ListFormat format, const SuffixTable& table,
                            PslMode mode) {
  switch (format) {
    case ListFormat::kHosts:
      return parse_hosts(text, table, mode);
    case ListFormat::kFilterList:
      return parse_filter_list(text, table, mode);
    case ListFormat::kDomainList:
      return parse_domain_list(text, table, mode);
    case ListFormat::kUnknown:
      break;
  }
  return parse_mixed(text, table, mode);
}

BlacklistSnapshot make_snapshot(std::string list_id, Date capture_date, std::string_view text,
                                ListFormat format_hint, const SuffixTable& table, PslMode mode) {
  ListFormat format = format_hint == ListFormat::kUnknown ? detect_format(text) : format_hint;
  ParseResult parsed = parse_blacklist(text, format, table, mode);
  BlacklistSnapshot snap;
  snap.list_id = std::move(list_id);
  snap.capture_date = capture_date;
  snap.domains = std::move(parsed.domains);
  snap.source_format = format;
  snap.rule_count = parsed.diagnostics.rules;
  snap.diagnostics = parsed.diagnostics;
  return snap;
}

}  // namespace listchurn
