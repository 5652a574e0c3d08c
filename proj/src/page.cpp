#include "listchurn/page.hpp"

#include <algorithm>
#include <charconv>

#include "listchurn/errors.hpp"

namespace listchurn {

namespace {

constexpr std::string_view kToolbarBegin = "<!-- BEGIN WAYBACK TOOLBAR INSERT -->";
constexpr std::string_view kToolbarEnd = "<!-- END WAYBACK TOOLBAR INSERT -->";

char lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c + 32) : c; }

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; }

// Case-insensitive search for an ASCII lowercase needle.
std::size_t find_ci(std::string_view hay, std::string_view needle, std::size_t from) {
  if (needle.size() > hay.size()) return std::string_view::npos;
  for (std::size_t i = from; i + needle.size() <= hay.size(); ++i) {
    std::size_t k = 0;
    while (k < needle.size() && lower(hay[i + k]) == needle[k]) ++k;
    if (k == needle.size()) return i;
  }
  return std::string_view::npos;
}

bool starts_with_ci(std::string_view s, std::size_t at, std::string_view needle) {
  if (at + needle.size() > s.size()) return false;
  for (std::size_t k = 0; k < needle.size(); ++k) {
    if (lower(s[at + k]) != needle[k]) return false;
  }
  return true;
}

// `<name` followed by a tag-name terminator.
bool opens_tag(std::string_view html, std::size_t lt, std::string_view name) {
  if (!starts_with_ci(html, lt + 1, name)) return false;
  std::size_t after = lt + 1 + name.size();
  return after >= html.size() || is_space(html[after]) || html[after] == '>' ||
         html[after] == '/';
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x110000) {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string decode_entities(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '&') {
      out.push_back(s[i]);
      continue;
    }
    auto semi = s.find(';', i);
    if (semi == std::string_view::npos || semi - i > 10) {
      out.push_back('&');
      continue;
    }
    std::string_view name = s.substr(i + 1, semi - i - 1);
    if (name == "amp") {
      out.push_back('&');
    } else if (name == "lt") {
      out.push_back('<');
    } else if (name == "gt") {
      out.push_back('>');
    } else if (name == "quot") {
      out.push_back('"');
    } else if (name == "apos") {
      out.push_back('\'');
    } else if (name.size() > 1 && name[0] == '#') {
      bool hex = name[1] == 'x' || name[1] == 'X';
      std::string_view digits = name.substr(hex ? 2 : 1);
      std::uint32_t cp = 0;
      auto [ptr, ec] =
          std::from_chars(digits.data(), digits.data() + digits.size(), cp, hex ? 16 : 10);
      if (ec != std::errc{} || ptr != digits.data() + digits.size() || digits.empty()) {
        out.push_back('&');
        continue;
      }
      append_utf8(out, cp);
    } else {
      out.push_back('&');
      continue;
    }
    i = semi;
  }
  return out;
}

struct TagScan {
  std::size_t end = std::string_view::npos;  // index just past '>'
  std::optional<std::string> src;
};

// Scans the attributes of a tag whose name ends at `pos`.
TagScan scan_attributes(std::string_view html, std::size_t pos) {
  TagScan scan;
  const std::size_t n = html.size();
  while (pos < n) {
    while (pos < n && (is_space(html[pos]) || html[pos] == '/')) ++pos;
    if (pos >= n) break;
    if (html[pos] == '>') {
      scan.end = pos + 1;
      return scan;
    }
    std::size_t name_start = pos;
    while (pos < n && !is_space(html[pos]) && html[pos] != '=' && html[pos] != '>' &&
           html[pos] != '/') {
      ++pos;
    }
    std::string name;
    for (std::size_t k = name_start; k < pos; ++k) name.push_back(lower(html[k]));
    while (pos < n && is_space(html[pos])) ++pos;
    std::string_view value;
    bool has_value = false;
    if (pos < n && html[pos] == '=') {
      ++pos;
      while (pos < n && is_space(html[pos])) ++pos;
      if (pos < n && (html[pos] == '"' || html[pos] == '\'')) {
        char quote = html[pos++];
        auto close = html.find(quote, pos);
        if (close == std::string_view::npos) {
          // Unterminated quote: value runs to the next '>'.
          close = html.find('>', pos);
          if (close == std::string_view::npos) close = n;
          value = html.substr(pos, close - pos);
          pos = close;
        } else {
          value = html.substr(pos, close - pos);
          pos = close + 1;
        }
      } else {
        std::size_t v0 = pos;
        while (pos < n && !is_space(html[pos]) && html[pos] != '>') ++pos;
        value = html.substr(v0, pos - v0);
      }
      has_value = true;
    }
    if (name == "src" && has_value && !scan.src) {
      std::string decoded = decode_entities(value);
      auto first = decoded.find_first_not_of(" \t\r\n\f");
      auto last = decoded.find_last_not_of(" \t\r\n\f");
      scan.src = first == std::string::npos ? std::string{}
                                             : decoded.substr(first, last - first + 1);
    }
  }
  return scan;
}

std::string remove_toolbar(std::string_view html) {
  std::string out;
  std::size_t pos = 0;
  while (true) {
    auto begin = html.find(kToolbarBegin, pos);
    if (begin == std::string_view::npos) break;
    auto end = html.find(kToolbarEnd, begin);
    out.append(html.substr(pos, begin - pos));
    if (end == std::string_view::npos) return out;
    pos = end + kToolbarEnd.size();
  }
  out.append(html.substr(pos));
  return out;
}

bool is_archive_source(const std::string& url, const std::vector<std::string>& archive_hosts) {
  std::string host;
  try {
    host = parse_url(url).host;
  } catch (const MalformedUrl&) {
    return false;
  }
  return std::any_of(archive_hosts.begin(), archive_hosts.end(), [&](const std::string& a) {
    return host == a || (host.size() > a.size() && host.ends_with(a) &&
                         host[host.size() - a.size() - 1] == '.');
  });
}

}  // namespace

std::vector<std::string> extract_script_sources(std::string_view raw_html,
                                                const std::vector<std::string>& archive_hosts) {
  const std::string cleaned = remove_toolbar(raw_html);
  std::string_view html = cleaned;
  std::vector<std::string> sources;
  std::size_t i = 0;
  while (i < html.size()) {
    auto lt = html.find('<', i);
    if (lt == std::string_view::npos) break;
    if (html.compare(lt, 4, "<!--") == 0) {
      auto close = html.find("-->", lt + 4);
      i = close == std::string_view::npos ? html.size() : close + 3;
      continue;
    }
    bool handled = false;
    for (std::string_view raw_text : {"script", "style", "textarea", "noscript"}) {
      if (!opens_tag(html, lt, raw_text)) continue;
      TagScan tag = scan_attributes(html, lt + 1 + raw_text.size());
      if (tag.end == std::string_view::npos) {
        i = html.size();
      } else {
        if (raw_text == "script" && tag.src && !tag.src->empty()) {
          std::string url = strip_archive_rewrite(*tag.src);
          if (!is_archive_source(url, archive_hosts)) sources.push_back(std::move(url));
        }
        const std::string closing = "</" + std::string(raw_text);
        auto close = find_ci(html, closing, tag.end);
        i = close == std::string_view::npos ? html.size() : close + closing.size();
      }
      handled = true;
      break;
    }
    if (!handled) i = lt + 1;
  }
  return sources;
}

PageObservation observe_page(const PageCapture& capture, const SuffixTable& table, PslMode mode,
                             const std::vector<std::string>& archive_hosts) {
  PageObservation obs{capture.site, capture.target.year, capture.target.quarter,
                      capture.memento.memento_timestamp, {}};
  for (const auto& src : extract_script_sources(capture.body, archive_hosts)) {
    try {
      UrlParts url = parse_url(src);
      if (url.host_is_ip) continue;
      RegistrableDomain source = registrable_domain(url.host, table, mode);
      if (is_third_party(source, capture.site)) obs.third_party_domains.insert(std::move(source));
    } catch (const MalformedUrl&) {
    } catch (const InvalidHost&) {
    } catch (const UnderspecifiedHost&) {
    }
  }
  return obs;
}

std::string_view to_string(Scope scope) {
  switch (scope) {
    case Scope::kSite:
      return "site";
    case Scope::kCountry:
      return "country";
    case Scope::kGlobal:
      return "global";
    case Scope::kBlacklistDetections:
      return "blacklist-detections";
  }
  return "unknown";
}

YearlyDomainSet yearly_union(std::span<const PageObservation> observations, Scope scope,
                             std::string scope_id, int year) {
  if (observations.empty()) {
    throw EmptyYear("no observations for " + scope_id + " in " + std::to_string(year));
  }
  YearlyDomainSet out{scope, std::move(scope_id), year, {}};
  for (const auto& obs : observations) {
    if (obs.year != year) throw PreconditionError("observation from another year");
    out.domains.insert(obs.third_party_domains.begin(), obs.third_party_domains.end());
  }
  return out;
}

}  // namespace listchurn
