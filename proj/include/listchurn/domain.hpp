#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>

namespace listchurn {

enum class PslMode { kNaiveSld, kSuffixAware };

std::string_view to_string(PslMode mode);
PslMode psl_mode_from_string(std::string_view text);

// Decomposed URL as found in a script source attribute.
struct UrlParts {
  std::string scheme;  // empty when the URL is scheme-relative
  std::string host;    // lowercase, ASCII-compatible encoding
  std::optional<std::uint16_t> port;
  std::string path;
  std::optional<std::string> query;
  bool host_is_ip = false;

  bool scheme_known() const { return !scheme.empty(); }
};

// Throws MalformedUrl when no host can be recovered (data:, javascript:,
// relative paths, invalid authority).
UrlParts parse_url(std::string_view raw);

// Lowercases, strips one trailing dot, converts non-ASCII labels to
// punycode and validates label syntax. Throws InvalidHost.
std::string normalize_host(std::string_view host);

bool is_ip_literal(std::string_view host);

// Public-suffix rules in the standard list format.
class SuffixTable {
 public:
  SuffixTable() = default;

  static SuffixTable parse(std::string_view text, std::string version);
  static SuffixTable load_file(const std::string& path);
  // Compiled-in subset covering generic TLDs and the common country
  // second-level registries.
  static const SuffixTable& bundled();

  const std::string& version() const { return version_; }
  std::size_t rule_count() const {
    return plain_.size() + wildcard_.size() + exception_.size();
  }

  // Number of trailing labels of `host` forming its public suffix. Hosts
  // matching no rule fall back to their last label.
  std::size_t suffix_label_count(std::string_view host) const;
  std::string public_suffix(std::string_view host) const;

 private:
  std::string version_;
  std::unordered_set<std::string> plain_;
  std::unordered_set<std::string> wildcard_;   // stored without the "*."
  std::unordered_set<std::string> exception_;  // stored without the "!"
};

class RegistrableDomain {
 public:
  // For values already known to be registrable domains (store records,
  // generated corpora). Validates syntax and the two-label minimum only.
  static RegistrableDomain from_canonical(std::string_view value,
                                          PslMode mode = PslMode::kSuffixAware);

  const std::string& value() const { return value_; }
  PslMode mode() const { return mode_; }

  friend bool operator==(const RegistrableDomain& a, const RegistrableDomain& b) {
    return a.value_ == b.value_;
  }
  friend std::strong_ordering operator<=>(const RegistrableDomain& a,
                                          const RegistrableDomain& b) {
    return a.value_ <=> b.value_;
  }

 private:
  friend RegistrableDomain registrable_domain(std::string_view, const SuffixTable&, PslMode);
  RegistrableDomain(std::string value, PslMode mode) : value_(std::move(value)), mode_(mode) {}

  std::string value_;
  PslMode mode_ = PslMode::kSuffixAware;
};

using DomainSet = std::set<RegistrableDomain>;

// naive-sld: last two labels. suffix-aware: public suffix plus one label.
// Throws InvalidHost for IP literals or bad syntax, UnderspecifiedHost for
// single-label hosts and bare public suffixes.
RegistrableDomain registrable_domain(std::string_view host, const SuffixTable& table,
                                     PslMode mode);

inline bool is_third_party(const RegistrableDomain& source, const RegistrableDomain& site) {
  return source.value() != site.value();
}

// RFC 3492 encoding of one label's code points (no "xn--" prefix).
std::string punycode_encode(const std::u32string& label);

}  // namespace listchurn
