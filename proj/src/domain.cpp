#include "listchurn/domain.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include "listchurn/errors.hpp"

namespace listchurn {

// Defined in the generated bundled_suffixes.cpp.
extern const char* const kBundledSuffixList;

namespace {

constexpr std::string_view kWhitespace = " \t\r\n\f\v";

std::string_view trim(std::string_view s) {
  auto first = s.find_first_not_of(kWhitespace);
  if (first == std::string_view::npos) return {};
  auto last = s.find_last_not_of(kWhitespace);
  return s.substr(first, last - first + 1);
}

char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c + 32) : c; }

bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::u32string decode_utf8(std::string_view s) {
  std::u32string out;
  for (std::size_t i = 0; i < s.size();) {
    auto b = static_cast<unsigned char>(s[i]);
    char32_t cp = 0;
    int extra = 0;
    if (b < 0x80) {
      cp = b;
    } else if ((b & 0xE0) == 0xC0) {
      cp = b & 0x1F;
      extra = 1;
    } else if ((b & 0xF0) == 0xE0) {
      cp = b & 0x0F;
      extra = 2;
    } else if ((b & 0xF8) == 0xF0) {
      cp = b & 0x07;
      extra = 3;
    } else {
      throw InvalidHost("invalid UTF-8 in host");
    }
    if (i + extra >= s.size()) throw InvalidHost("truncated UTF-8 in host");
    for (int k = 1; k <= extra; ++k) {
      auto c = static_cast<unsigned char>(s[i + k]);
      if ((c & 0xC0) != 0x80) throw InvalidHost("invalid UTF-8 in host");
      cp = (cp << 6) | (c & 0x3F);
    }
    i += 1 + extra;
    out.push_back(cp);
  }
  return out;
}

// Simple case folding for ASCII and the Latin-1 supplement.
char32_t fold_case(char32_t c) {
  if (c >= U'A' && c <= U'Z') return c + 32;
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 32;
  return c;
}

bool valid_ascii_label(std::string_view label) {
  if (label.empty() || label.size() > 63) return false;
  if (label.front() == '-' || label.back() == '-') return false;
  return std::all_of(label.begin(), label.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || is_digit(c) || c == '-' || c == '_';
  });
}

std::vector<std::string_view> split_labels(std::string_view host) {
  std::vector<std::string_view> labels;
  std::size_t start = 0;
  while (true) {
    auto dot = host.find('.', start);
    labels.push_back(host.substr(start, dot - start));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return labels;
}

std::size_t count_labels(std::string_view host) {
  return static_cast<std::size_t>(std::count(host.begin(), host.end(), '.')) + 1;
}

// Offset of the suffix made of the last `n` labels.
std::size_t suffix_offset(std::string_view host, std::size_t n) {
  std::size_t pos = host.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (pos == 0) return 0;
    auto dot = host.rfind('.', pos - 1);
    if (dot == std::string_view::npos) return 0;
    pos = dot;
  }
  return pos + 1;
}

bool is_ipv4(std::string_view host) {
  auto labels = split_labels(host);
  if (labels.size() != 4) return false;
  for (auto part : labels) {
    if (part.empty() || part.size() > 3) return false;
    int v = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc{} || ptr != part.data() + part.size() || v > 255) return false;
  }
  return true;
}

}  // namespace

std::string_view to_string(PslMode mode) {
  return mode == PslMode::kNaiveSld ? "naive" : "suffix-aware";
}

PslMode psl_mode_from_string(std::string_view text) {
  if (text == "naive" || text == "naive-sld") return PslMode::kNaiveSld;
  if (text == "suffix-aware") return PslMode::kSuffixAware;
  throw ConfigError("unknown psl mode: " + std::string(text));
}

std::string punycode_encode(const std::u32string& input) {
  constexpr std::uint32_t kBase = 36, kTmin = 1, kTmax = 26, kSkew = 38, kDamp = 700;
  auto digit = [](std::uint32_t d) -> char {
    return static_cast<char>(d < 26 ? 'a' + d : '0' + (d - 26));
  };
  auto adapt = [&](std::uint32_t delta, std::uint32_t points, bool first) {
    delta = first ? delta / kDamp : delta / 2;
    delta += delta / points;
    std::uint32_t k = 0;
    while (delta > ((kBase - kTmin) * kTmax) / 2) {
      delta /= kBase - kTmin;
      k += kBase;
    }
    return k + (kBase - kTmin + 1) * delta / (delta + kSkew);
  };

  std::string out;
  for (char32_t c : input) {
    if (c < 0x80) out.push_back(static_cast<char>(c));
  }
  const auto basic = static_cast<std::uint32_t>(out.size());
  std::uint32_t handled = basic;
  if (basic > 0) out.push_back('-');

  std::uint32_t n = 0x80, delta = 0, bias = 72;
  const auto total = static_cast<std::uint32_t>(input.size());
  while (handled < total) {
    std::uint32_t m = UINT32_MAX;
    for (char32_t c : input) {
      if (c >= n && c < m) m = c;
    }
    delta += (m - n) * (handled + 1);
    n = m;
    for (char32_t c : input) {
      if (c < n) ++delta;
      if (c == n) {
        std::uint32_t q = delta;
        for (std::uint32_t k = kBase;; k += kBase) {
          std::uint32_t t = k <= bias ? kTmin : (k >= bias + kTmax ? kTmax : k - bias);
          if (q < t) break;
          out.push_back(digit(t + (q - t) % (kBase - t)));
          q = (q - t) / (kBase - t);
        }
        out.push_back(digit(q));
        bias = adapt(delta, handled + 1, handled == basic);
        delta = 0;
        ++handled;
      }
    }
    ++delta;
    ++n;
  }
  return out;
}

std::string normalize_host(std::string_view raw) {
  std::string_view host = trim(raw);
  if (!host.empty() && host.back() == '.') host.remove_suffix(1);
  if (host.empty()) throw InvalidHost("empty host");
  if (host.size() > 253 * 4) throw InvalidHost("host too long");

  std::string out;
  out.reserve(host.size());
  for (auto label : split_labels(host)) {
    if (!out.empty()) out.push_back('.');
    bool ascii = std::all_of(label.begin(), label.end(),
                             [](char c) { return static_cast<unsigned char>(c) < 0x80; });
    std::string encoded;
    if (ascii) {
      encoded.reserve(label.size());
      for (char c : label) encoded.push_back(ascii_lower(c));
    } else {
      std::u32string cps = decode_utf8(label);
      for (auto& c : cps) c = fold_case(c);
      encoded = "xn--" + punycode_encode(cps);
    }
    if (!valid_ascii_label(encoded)) {
      throw InvalidHost("invalid host label in: " + std::string(host));
    }
    out += encoded;
  }
  if (out.size() > 253) throw InvalidHost("host exceeds 253 characters");
  return out;
}

bool is_ip_literal(std::string_view host) {
  if (host.empty()) return false;
  if (host.front() == '[' || host.find(':') != std::string_view::npos) return true;
  return is_ipv4(host);
}

UrlParts parse_url(std::string_view raw) {
  std::string_view s = trim(raw);
  if (s.empty()) throw MalformedUrl("empty URL");

  UrlParts parts;
  std::string_view rest;
  if (s.starts_with("//")) {
    rest = s.substr(2);
  } else {
    auto colon = s.find(':');
    bool has_scheme = colon != std::string_view::npos && colon > 0 && is_alpha(s[0]) &&
                      std::all_of(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(colon),
                                  [](char c) {
                                    return is_alpha(c) || is_digit(c) || c == '+' ||
                                           c == '-' || c == '.';
                                  });
    if (!has_scheme) throw MalformedUrl("URL has no host: " + std::string(s));
    for (char c : s.substr(0, colon)) parts.scheme.push_back(ascii_lower(c));
    std::string_view after = s.substr(colon + 1);
    if (!after.starts_with("//")) throw MalformedUrl("URL has no host: " + std::string(s));
    rest = after.substr(2);
  }

  auto auth_end = rest.find_first_of("/?#\\");
  std::string_view authority = rest.substr(0, auth_end);
  std::string_view tail = auth_end == std::string_view::npos ? std::string_view{}
                                                             : rest.substr(auth_end);

  if (auto at = authority.rfind('@'); at != std::string_view::npos) {
    authority = authority.substr(at + 1);
  }

  std::string_view host_text = authority;
  std::string_view port_text;
  if (authority.starts_with("[")) {
    auto close = authority.find(']');
    if (close == std::string_view::npos) throw MalformedUrl("unterminated IPv6 literal");
    host_text = authority.substr(0, close + 1);
    std::string_view after = authority.substr(close + 1);
    if (!after.empty()) {
      if (after.front() != ':') throw MalformedUrl("junk after IPv6 literal");
      port_text = after.substr(1);
    }
    parts.host_is_ip = true;
  } else if (auto colon = authority.rfind(':'); colon != std::string_view::npos) {
    host_text = authority.substr(0, colon);
    port_text = authority.substr(colon + 1);
  }

  if (!port_text.empty()) {
    unsigned value = 0;
    auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), value);
    if (ec != std::errc{} || ptr != port_text.data() + port_text.size() || value > 65535) {
      throw MalformedUrl("invalid port in: " + std::string(s));
    }
    parts.port = static_cast<std::uint16_t>(value);
  }

  if (host_text.empty()) throw MalformedUrl("URL has empty host: " + std::string(s));
  if (parts.host_is_ip) {
    for (char c : host_text) parts.host.push_back(ascii_lower(c));
  } else {
    try {
      parts.host = normalize_host(host_text);
    } catch (const InvalidHost& e) {
      throw MalformedUrl(e.what());
    }
    parts.host_is_ip = is_ipv4(parts.host);
  }

  auto fragment = tail.find('#');
  if (fragment != std::string_view::npos) tail = tail.substr(0, fragment);
  auto question = tail.find('?');
  if (question != std::string_view::npos) {
    parts.query = std::string(tail.substr(question + 1));
    tail = tail.substr(0, question);
  }
  parts.path = std::string(tail);
  return parts;
}

SuffixTable SuffixTable::parse(std::string_view text, std::string version) {
  SuffixTable table;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    std::string_view view = trim(line);
    if (view.starts_with("//")) {
      constexpr std::string_view kTag = "// VERSION:";
      if (version.empty() && view.starts_with(kTag)) {
        version = std::string(trim(view.substr(kTag.size())));
      }
      continue;
    }
    if (view.empty()) continue;
    view = view.substr(0, view.find_first_of(kWhitespace));

    bool exception = false;
    bool wildcard = false;
    if (view.starts_with("!")) {
      exception = true;
      view.remove_prefix(1);
    } else if (view.starts_with("*.")) {
      wildcard = true;
      view.remove_prefix(2);
    }
    std::string rule;
    try {
      rule = normalize_host(view);
    } catch (const InvalidHost&) {
      continue;  // rules we cannot represent (e.g. inner wildcards)
    }
    if (exception) {
      table.exception_.insert(std::move(rule));
    } else if (wildcard) {
      table.wildcard_.insert(std::move(rule));
    } else {
      table.plain_.insert(std::move(rule));
    }
  }
  table.version_ = version.empty() ? "unversioned" : std::move(version);
  return table;
}

SuffixTable SuffixTable::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open suffix list: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), {});
}

const SuffixTable& SuffixTable::bundled() {
  static const SuffixTable table = parse(kBundledSuffixList, {});
  return table;
}

std::size_t SuffixTable::suffix_label_count(std::string_view host) const {
  const std::size_t n = count_labels(host);
  std::size_t offset = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::string candidate(host.substr(offset));
    auto next_dot = host.find('.', offset);
    if (exception_.count(candidate)) return n - i - 1;
    if (plain_.count(candidate)) return n - i;
    if (next_dot != std::string_view::npos &&
        wildcard_.count(std::string(host.substr(next_dot + 1)))) {
      return n - i;
    }
    if (next_dot == std::string_view::npos) break;
    offset = next_dot + 1;
  }
  return 1;
}

std::string SuffixTable::public_suffix(std::string_view host) const {
  return std::string(host.substr(suffix_offset(host, suffix_label_count(host))));
}

RegistrableDomain registrable_domain(std::string_view host, const SuffixTable& table,
                                     PslMode mode) {
  std::string normalized = normalize_host(host);
  if (is_ip_literal(normalized)) {
    throw InvalidHost("IP literal has no registrable domain: " + normalized);
  }
  const std::size_t labels = count_labels(normalized);
  if (labels < 2) throw UnderspecifiedHost("single-label host: " + normalized);

  std::size_t keep = 2;
  if (mode == PslMode::kSuffixAware) {
    const std::size_t suffix = table.suffix_label_count(normalized);
    if (labels <= suffix) throw UnderspecifiedHost("host is a public suffix: " + normalized);
    keep = suffix + 1;
  }
  return RegistrableDomain(normalized.substr(suffix_offset(normalized, keep)), mode);
}

RegistrableDomain RegistrableDomain::from_canonical(std::string_view value, PslMode mode) {
  std::string normalized = normalize_host(value);
  if (is_ip_literal(normalized) || count_labels(normalized) < 2) {
    throw InvalidHost("not a registrable domain: " + normalized);
  }
  return RegistrableDomain(std::move(normalized), mode);
}

}  // namespace listchurn
