#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "listchurn/calendar.hpp"
#include "listchurn/domain.hpp"

namespace listchurn {

enum class ListFormat { kHosts, kFilterList, kDomainList, kUnknown };

std::string_view to_string(ListFormat format);
ListFormat list_format_from_string(std::string_view text);

// Counters for everything a parser saw but did not turn into a domain.
struct ParseDiagnostics {
  std::size_t rules = 0;        // entries that could name a domain
  std::size_t comments = 0;     // comment and header lines
  std::size_t malformed = 0;    // unparseable lines or hostnames
  std::size_t reserved = 0;     // localhost, broadcasthost, single labels
  std::size_t exceptions = 0;   // @@ allow rules
  std::size_t cosmetic = 0;     // ##, #@# and friends
  std::size_t no_domain = 0;    // path or regex rules without a domain anchor
};

struct ParseResult {
  DomainSet domains;
  ParseDiagnostics diagnostics;
};

// Deterministic best guess of a list's grammar.
ListFormat detect_format(std::string_view text);

// `<ip> <hostname>... [# comment]` lines.
ParseResult parse_hosts(std::string_view text, const SuffixTable& table,
                        PslMode mode = PslMode::kSuffixAware);

// Adblock-style network rules reduced to the domains they block. Only
// anchored rules (||host, |scheme://host) contribute their host; rules
// without an anchor contribute their non-negated domain= option values.
ParseResult parse_filter_list(std::string_view text, const SuffixTable& table,
                              PslMode mode = PslMode::kSuffixAware);

// One hostname per line.
ParseResult parse_domain_list(std::string_view text, const SuffixTable& table,
                              PslMode mode = PslMode::kSuffixAware);

// Mixed files: every line is dispatched to the grammar it looks like.
ParseResult parse_mixed(std::string_view text, const SuffixTable& table,
                        PslMode mode = PslMode::kSuffixAware);

// Parses with the given grammar; kUnknown falls back to parse_mixed.
ParseResult parse_blacklist(std::string_view text, ListFormat format, const SuffixTable& table,
                            PslMode mode = PslMode::kSuffixAware);

struct BlacklistSnapshot {
  std::string list_id;
  Date capture_date;
  DomainSet domains;
  ListFormat source_format = ListFormat::kUnknown;
  std::size_t rule_count = 0;
  ParseDiagnostics diagnostics;
};

// Parses one archived list version. `format_hint` of kUnknown triggers
// detect_format.
BlacklistSnapshot make_snapshot(std::string list_id, Date capture_date, std::string_view text,
                                ListFormat format_hint, const SuffixTable& table,
                                PslMode mode = PslMode::kSuffixAware);

}  // namespace listchurn
