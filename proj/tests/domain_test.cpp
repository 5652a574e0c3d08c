#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "listchurn/domain.hpp"
#include "listchurn/errors.hpp"

using namespace listchurn;

namespace {

const SuffixTable& psl() { return SuffixTable::bundled(); }

std::string reg(std::string_view host, PslMode mode = PslMode::kSuffixAware) {
  return registrable_domain(host, psl(), mode).value();
}

// Random hostnames over a small alphabet and a mix of suffixes.
std::string random_host(std::mt19937_64& rng) {
  static const std::vector<std::string> kSuffixes = {"com", "net", "org", "co.uk", "com.au",
                                                     "de", "example", "io", "ac.il"};
  std::string host;
  const int labels = 1 + static_cast<int>(rng() % 3);
  for (int i = 0; i < labels; ++i) {
    const int len = 1 + static_cast<int>(rng() % 8);
    for (int k = 0; k < len; ++k) {
      host.push_back("abcdefghij0123-"[rng() % 14]);  // never a trailing '-'
    }
    host.push_back('.');
  }
  host += kSuffixes[rng() % kSuffixes.size()];
  return host;
}

std::string random_case(std::string s, std::mt19937_64& rng) {
  for (auto& c : s) {
    if (c >= 'a' && c <= 'z' && rng() % 2) c = static_cast<char>(c - 32);
  }
  return s;
}

}  // namespace

TEST_CASE("parse_url decomposes absolute URLs") {
  auto u = parse_url("http://ad.doubleclick.net/dot.gif");
  CHECK(u.scheme == "http");
  CHECK(u.host == "ad.doubleclick.net");
  CHECK(u.path == "/dot.gif");
  CHECK_FALSE(u.query.has_value());
  CHECK_FALSE(u.port.has_value());
}

TEST_CASE("parse_url accepts scheme-relative URLs") {
  auto u = parse_url("//cdn.example.com/a.js");
  CHECK_FALSE(u.scheme_known());
  CHECK(u.host == "cdn.example.com");
  CHECK(u.path == "/a.js");
}

TEST_CASE("parse_url rejects host-less URLs") {
  CHECK_THROWS_AS(parse_url("javascript:void(0)"), MalformedUrl);
  CHECK_THROWS_AS(parse_url("data:text/javascript;base64,AAAA"), MalformedUrl);
  CHECK_THROWS_AS(parse_url("/js/site.js"), MalformedUrl);
  CHECK_THROWS_AS(parse_url("site.js"), MalformedUrl);
  CHECK_THROWS_AS(parse_url(""), MalformedUrl);
  CHECK_THROWS_AS(parse_url("http:///path"), MalformedUrl);
  CHECK_THROWS_AS(parse_url("http://bad host.com/x"), MalformedUrl);
}

TEST_CASE("parse_url handles ports, queries, userinfo and fragments") {
  auto u = parse_url("HTTPS://user:pw@Stats.Example.COM:8443/p/q.js?v=1&x=2#frag");
  CHECK(u.scheme == "https");
  CHECK(u.host == "stats.example.com");
  CHECK(u.port == 8443);
  CHECK(u.path == "/p/q.js");
  CHECK(u.query == "v=1&x=2");

  auto bare = parse_url("http://example.com");
  CHECK(bare.path.empty());
  auto qonly = parse_url("http://example.com?a=b");
  CHECK(qonly.path.empty());
  CHECK(qonly.query == "a=b");
  CHECK_THROWS_AS(parse_url("http://example.com:99999/"), MalformedUrl);
}

TEST_CASE("parse_url flags IP literals") {
  CHECK(parse_url("http://192.168.0.1/a.js").host_is_ip);
  CHECK(parse_url("http://[2001:db8::1]:80/a.js").host_is_ip);
  CHECK_FALSE(parse_url("http://1.2.3.example/a.js").host_is_ip);
}

TEST_CASE("normalize_host strips trailing dot and encodes IDN") {
  CHECK(normalize_host("Example.COM.") == "example.com");
  CHECK(normalize_host("bücher.example") == "xn--bcher-kva.example");
  CHECK(normalize_host("BÜCHER.example") == "xn--bcher-kva.example");
  CHECK(normalize_host("münchen.de") == "xn--mnchen-3ya.de");
  CHECK_THROWS_AS(normalize_host("a..b"), InvalidHost);
  CHECK_THROWS_AS(normalize_host(""), InvalidHost);
  CHECK_THROWS_AS(normalize_host("-lead.example"), InvalidHost);
  CHECK_THROWS_AS(normalize_host("trail-.example"), InvalidHost);
  CHECK(normalize_host("mid-dle.example") == "mid-dle.example");
}

TEST_CASE("punycode matches RFC 3492 samples") {
  // (A) Arabic (Egyptian) sample from the RFC.
  std::u32string arabic = {0x0644, 0x064A, 0x0647, 0x0645, 0x0627, 0x0628, 0x062A, 0x0643,
                           0x0644, 0x0645, 0x0648, 0x0634, 0x0639, 0x0631, 0x0628, 0x064A,
                           0x061F};
  CHECK(punycode_encode(arabic) == "egbpdaj6bu4bxfgehfvwxn");
  // (L) Japanese sample: 3<nen>B<gumi><kinpachi><sensei>
  std::u32string mixed = {U'3', 0x5E74, U'B', 0x7D44, 0x91D1, 0x516B, 0x5148, 0x751F};
  CHECK(punycode_encode(mixed) == "3B-ww4c5e180e575a65lsy2b");
}

TEST_CASE("registrable_domain reduces to the second-level domain") {
  CHECK(reg("ad.doubleclick.net") == "doubleclick.net");
  CHECK(reg("doubleclick.net") == "doubleclick.net");
  CHECK(reg("ad.doubleclick.net", PslMode::kNaiveSld) == "doubleclick.net");
}

TEST_CASE("registrable_domain honours public suffix rules") {
  CHECK(reg("tracker.example.co.uk") == "example.co.uk");
  CHECK(reg("tracker.example.co.uk", PslMode::kNaiveSld) == "co.uk");
  CHECK(reg("a.b.foo.kawasaki.jp") == "b.foo.kawasaki.jp");
  CHECK(reg("www.city.kawasaki.jp") == "city.kawasaki.jp");
  CHECK(reg("www.ck") == "www.ck");
  CHECK(reg("shop.store.ck") == "shop.store.ck");
  // Unknown TLDs fall back to the last label.
  CHECK(reg("a.tracker.example") == "tracker.example");
  CHECK(reg("Trailing.Example.COM.") == "example.com");
}

TEST_CASE("registrable_domain rejects underspecified and IP hosts") {
  CHECK_THROWS_AS(reg("localhost"), UnderspecifiedHost);
  CHECK_THROWS_AS(reg("co.uk"), UnderspecifiedHost);
  CHECK_THROWS_AS(reg("com"), UnderspecifiedHost);
  CHECK_THROWS_AS(reg("localhost", PslMode::kNaiveSld), UnderspecifiedHost);
  CHECK_THROWS_AS(reg("10.0.0.1"), InvalidHost);
}

TEST_CASE("is_third_party compares registrable domains") {
  auto dc = registrable_domain("doubleclick.net", psl(), PslMode::kSuffixAware);
  auto sb = registrable_domain("sportsbet.com", psl(), PslMode::kSuffixAware);
  auto wikia = registrable_domain("wikia.com", psl(), PslMode::kSuffixAware);
  auto static_wikia = registrable_domain("static.wikia.com", psl(), PslMode::kSuffixAware);
  CHECK(is_third_party(dc, sb));
  CHECK_FALSE(is_third_party(wikia, wikia));
  CHECK_FALSE(is_third_party(static_wikia, wikia));
}

TEST_CASE("suffix table parsing") {
  auto table = SuffixTable::parse("// VERSION: t1\n// comment\ncom\n*.wild\n!keep.wild\n\n", {});
  CHECK(table.version() == "t1");
  CHECK(table.rule_count() == 3);
  CHECK(table.public_suffix("a.b.com") == "com");
  CHECK(table.public_suffix("x.y.wild") == "y.wild");
  CHECK(table.public_suffix("a.keep.wild") == "wild");
  CHECK(table.public_suffix("a.unknown") == "unknown");
  CHECK(SuffixTable::bundled().version() == "listchurn-bundled-2026.10");
}

TEST_CASE("property: registrable_domain is idempotent") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 2000; ++i) {
    const std::string host = random_host(rng);
    for (auto mode : {PslMode::kSuffixAware, PslMode::kNaiveSld}) {
      RegistrableDomain once = [&] {
        try {
          return registrable_domain(host, psl(), mode);
        } catch (const UnderspecifiedHost&) {
          return RegistrableDomain::from_canonical("skip.invalid");
        }
      }();
      if (once.value() == "skip.invalid") continue;
      CHECK(registrable_domain(once.value(), psl(), mode) == once);
      // The result is a suffix of the source host.
      CHECK(host.ends_with(once.value()));
    }
  }
}

TEST_CASE("property: modes agree on single-label public suffixes") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    std::string host = random_host(rng);
    if (psl().suffix_label_count(host) != 1) continue;
    if (host.find('.') == std::string::npos) continue;
    CHECK(reg(host, PslMode::kNaiveSld) == reg(host, PslMode::kSuffixAware));
  }
}

TEST_CASE("property: case variants give identical results") {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 1000; ++i) {
    const std::string host = random_host(rng);
    const std::string url = "http://" + host + "/x.js";
    const std::string variant = random_case(url, rng);
    CHECK(parse_url(url).host == parse_url(variant).host);
    std::string a, b;
    try {
      a = reg(host);
    } catch (const UnderspecifiedHost&) {
      a = "!";
    }
    try {
      b = reg(random_case(host, rng));
    } catch (const UnderspecifiedHost&) {
      b = "!";
    }
    CHECK(a == b);
  }
}
