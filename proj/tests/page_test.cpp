#include <doctest.h>

#include "listchurn/errors.hpp"
#include "listchurn/page.hpp"
#include "support/fake_archive.hpp"

using namespace listchurn;

namespace {

RegistrableDomain dom(const char* v) { return RegistrableDomain::from_canonical(v); }

PageCapture capture_of(const char* site, std::string body, int year = 2015) {
  TargetDate target = TargetDate::make(year, 2);
  MementoRef ref{std::string("http://") + site + "/", "", testing::at(year, 4, 2), 1, false};
  return PageCapture{dom(site), target, ref, std::move(body), 200};
}

DomainSet set_of(std::initializer_list<const char*> values) {
  DomainSet out;
  for (auto v : values) out.insert(dom(v));
  return out;
}

}  // namespace

TEST_CASE("script sources in document order") {
  auto srcs = extract_script_sources(
      "<html><head><script src=\"http://a.example/x.js\"></script>"
      "<script>var inline = 1;</script></head>"
      "<body><SCRIPT SRC='//b.example/y.js'></SCRIPT>"
      "<script type=text/javascript src=https://c.example/z.js></script></body></html>");
  REQUIRE(srcs.size() == 3);
  CHECK(srcs[0] == "http://a.example/x.js");
  CHECK(srcs[1] == "//b.example/y.js");
  CHECK(srcs[2] == "https://c.example/z.js");
}

TEST_CASE("comments, noscript and script bodies hide markup") {
  auto srcs = extract_script_sources(
      "<!-- <script src=\"http://commented.example/a.js\"></script> -->"
      "<script>document.write('<script src=\"http://written.example/b.js\"></scr'+'ipt>');"
      "</script>"
      "<noscript><script src=\"http://noscript.example/c.js\"></script></noscript>"
      "<style>.a{background:url('<script src=x>')}</style>"
      "<script src=\"http://kept.example/d.js\"></script>");
  REQUIRE(srcs.size() == 1);
  CHECK(srcs[0] == "http://kept.example/d.js");
}

TEST_CASE("entities in attribute values are decoded") {
  auto srcs = extract_script_sources(
      "<script src=\"http://a.example/x.js?a=1&amp;b=2&#38;c=&#x33;\"></script>");
  REQUIRE(srcs.size() == 1);
  CHECK(srcs[0] == "http://a.example/x.js?a=1&b=2&c=3");
}

TEST_CASE("archive rewrites are undone and archive scripts dropped") {
  auto srcs = extract_script_sources(
      "<script src=\"https://web-static.archive.org/_static/js/bundle-playback.js\"></script>"
      "<script src=\"/_static/js/wombat.js\"></script>"
      "<!-- End Wayback Rewrite JS Include -->"
      "<!-- BEGIN WAYBACK TOOLBAR INSERT -->"
      "<script src=\"http://toolbar.example/tb.js\"></script>"
      "<!-- END WAYBACK TOOLBAR INSERT -->"
      "<script src=\"https://web.archive.org/web/20150102030405js_/http://ad.doubleclick.net/"
      "x.js\"></script>"
      "<script src=\"/web/20150102030405js_/http://tracker.example/t.js\"></script>");
  REQUIRE(srcs.size() == 3);
  CHECK(srcs[0] == "/_static/js/wombat.js");
  CHECK(srcs[1] == "http://ad.doubleclick.net/x.js");
  CHECK(srcs[2] == "http://tracker.example/t.js");
}

TEST_CASE("unterminated markup does not loop or throw") {
  CHECK(extract_script_sources("<script src=\"http://a.example/x.js").empty());
  CHECK(extract_script_sources("<!-- never closed <script src=x>").empty());
  auto srcs = extract_script_sources("<script src='http://a.example/x.js'>");
  REQUIRE(srcs.size() == 1);
  CHECK(srcs[0] == "http://a.example/x.js");
  CHECK(extract_script_sources("<<<>>><scriptx src=http://a.example/>").empty());
}

TEST_CASE("observe_page: worked example") {
  auto obs = observe_page(
      capture_of("sportsbet.com.au",
                 "<script src=\"http://ad.doubleclick.net/ddm/x.js\"></script>"
                 "<script src=\"https://static.sportsbet.com.au/app.js\"></script>"),
      SuffixTable::bundled());
  CHECK(obs.third_party_domains == set_of({"doubleclick.net"}));
  CHECK(obs.year == 2015);
  CHECK(obs.quarter == 2);
}

TEST_CASE("observe_page: same-site only yields nothing") {
  auto obs = observe_page(capture_of("example.com",
                                     "<script src=\"http://cdn.example.com/a.js\"></script>"
                                     "<script src=\"/local.js\"></script>"),
                          SuffixTable::bundled());
  CHECK(obs.third_party_domains.empty());
}

TEST_CASE("observe_page: subdomains collapse, junk is skipped") {
  auto obs = observe_page(
      capture_of("site.example",
                 "<script src=\"http://a.x.example/1.js\"></script>"
                 "<script src=\"http://b.x.example/2.js\"></script>"
                 "<SCRIPT SRC='//a.example/x.js'></SCRIPT>"
                 "<script src=\"http://192.168.0.1/ip.js\"></script>"
                 "<script src=\"http://[::1]/ip6.js\"></script>"
                 "<script src=\"javascript:void(0)\"></script>"
                 "<script src=\"data:text/javascript,1\"></script>"
                 "<script src=\"http://localhost/x.js\"></script>"
                 "<script src=\"http://co.uk/x.js\"></script>"),
      SuffixTable::bundled());
  CHECK(obs.third_party_domains == set_of({"a.example", "x.example"}));
}

TEST_CASE("observe_page: naive mode splits on the last two labels") {
  auto page = capture_of("bbc.co.uk", "<script src=\"http://ads.tracker.co.uk/a.js\"></script>");
  page.site = RegistrableDomain::from_canonical("co.uk", PslMode::kNaiveSld);
  auto naive = observe_page(page, SuffixTable::bundled(), PslMode::kNaiveSld);
  CHECK(naive.third_party_domains.empty());
  page.site = dom("bbc.co.uk");
  auto aware = observe_page(page, SuffixTable::bundled(), PslMode::kSuffixAware);
  CHECK(aware.third_party_domains == set_of({"tracker.co.uk"}));
}

TEST_CASE("yearly_union") {
  auto a = observe_page(capture_of("s.example", "<script src=\"http://a.example/1.js\"></script>"),
                        SuffixTable::bundled());
  auto b = observe_page(capture_of("s.example", "<script src=\"http://b.example/1.js\"></script>"
                                                "<script src=\"http://a.example/2.js\"></script>"),
                        SuffixTable::bundled());
  std::vector<PageObservation> obs{a, b};
  auto u = yearly_union(obs, Scope::kSite, "s.example", 2015);
  CHECK(u.domains == set_of({"a.example", "b.example"}));
  CHECK(u.scope == Scope::kSite);

  CHECK_THROWS_AS(yearly_union(std::span<const PageObservation>{}, Scope::kSite, "s", 2015),
                  EmptyYear);
  obs.push_back(observe_page(capture_of("s.example", "", 2016), SuffixTable::bundled()));
  CHECK_THROWS_AS(yearly_union(obs, Scope::kSite, "s.example", 2015), PreconditionError);
}

TEST_CASE("property: union is order-insensitive and idempotent") {
  std::vector<PageObservation> obs;
  const char* hosts[] = {"a.example", "b.example", "c.example", "d.example"};
  for (int i = 0; i < 6; ++i) {
    std::string body;
    for (int k = 0; k <= i % 4; ++k) {
      body += std::string("<script src=\"http://") + hosts[(i + k) % 4] + "/x.js\"></script>";
    }
    obs.push_back(observe_page(capture_of("s.example", body), SuffixTable::bundled()));
  }
  auto forward = yearly_union(obs, Scope::kSite, "s.example", 2015);
  std::reverse(obs.begin(), obs.end());
  CHECK(yearly_union(obs, Scope::kSite, "s.example", 2015).domains == forward.domains);
  auto doubled = obs;
  doubled.insert(doubled.end(), obs.begin(), obs.end());
  CHECK(yearly_union(doubled, Scope::kSite, "s.example", 2015).domains == forward.domains);
}
