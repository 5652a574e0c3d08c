#include <doctest.h>

#include <filesystem>
#include <random>

#include "listchurn/errors.hpp"
#include "listchurn/store.hpp"

using namespace listchurn;
namespace fs = std::filesystem;

namespace {

RegistrableDomain dom(const char* v) { return RegistrableDomain::from_canonical(v); }

DomainSet set_of(std::initializer_list<const char*> values) {
  DomainSet out;
  for (auto v : values) out.insert(dom(v));
  return out;
}

Date day(int y, unsigned m, unsigned d) { return make_date(y, m, d); }

ObservationRecord obs(const char* site, int year, int quarter, Date when,
                      std::initializer_list<const char*> domains,
                      std::vector<std::string> countries = {"au"}) {
  return ObservationRecord{dom(site), std::move(countries), year, quarter, Timestamp{when},
                           set_of(domains)};
}

ListRecord snap(const char* id, Date when, std::initializer_list<const char*> domains) {
  return ListRecord{id, when, set_of(domains), ListFormat::kHosts, domains.size()};
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("listchurn_store_" + std::to_string(std::random_device{}()));
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("put is an idempotent upsert") {
  TimelineStore store;
  CHECK(store.put_observation(obs("s.example", 2012, 1, day(2012, 1, 5), {"a.example"})));
  CHECK_FALSE(store.put_observation(obs("s.example", 2012, 1, day(2012, 1, 5), {"a.example"})));
  CHECK(store.observations().size() == 1);
  CHECK(store.put_observation(obs("s.example", 2012, 2, day(2012, 4, 5), {"a.example"})));
  CHECK(store.observations().size() == 2);
  CHECK_THROWS_AS(store.put_observation(obs("s.example", 2012, 1, day(2012, 1, 5), {"b.example"})),
                  ConflictingRecord);

  CHECK(store.put_list_snapshot(snap("easylist", day(2012, 4, 1), {"a.example"})));
  CHECK_FALSE(store.put_list_snapshot(snap("easylist", day(2012, 4, 1), {"a.example"})));
  CHECK_THROWS_AS(store.put_list_snapshot(snap("easylist", day(2012, 4, 1), {"b.example"})),
                  ConflictingRecord);
  CHECK_THROWS_AS(store.put_observation(obs("s.example", 2013, 1, day(2013, 1, 5), {}, {})),
                  PreconditionError);
}

TEST_CASE("list_first_seen") {
  TimelineStore store;
  store.put_list_snapshot(snap("l", day(2014, 1, 1), {"a.example", "b.example"}));
  store.put_list_snapshot(snap("l", day(2012, 4, 1), {"a.example"}));
  store.put_list_snapshot(snap("l", day(2013, 1, 1), {"c.example"}));

  auto a = store.list_first_seen(dom("a.example"), "l");
  REQUIRE(a);
  CHECK(a->date == day(2012, 4, 1));
  CHECK(a->first_snapshot);
  auto b = store.list_first_seen(dom("b.example"), "l");
  REQUIRE(b);
  CHECK(b->date == day(2014, 1, 1));
  CHECK_FALSE(b->first_snapshot);
  CHECK_FALSE(store.list_first_seen(dom("never.example"), "l"));
  CHECK_THROWS_AS(store.list_first_seen(dom("a.example"), "other"), UnknownList);
  CHECK(store.list_universe("l") == set_of({"a.example", "b.example", "c.example"}));
}

TEST_CASE("property: first-seen is monotone under added snapshots") {
  TimelineStore store;
  store.put_list_snapshot(snap("l", day(2015, 1, 1), {"a.example", "b.example"}));
  auto before = store.list_first_seen(dom("b.example"), "l")->date;
  for (int y = 2016; y >= 2010; --y) {
    store.put_list_snapshot(snap("l", day(y, 6, 1), {y % 2 ? "b.example" : "c.example"}));
    auto now = store.list_first_seen(dom("b.example"), "l")->date;
    CHECK(now <= before);
    before = now;
  }
}

TEST_CASE("time difference sign") {
  const Date first = day(2010, 1, 1);
  SUBCASE("seen on the web a year before listing is reactive") {
    auto r = make_detection(dom("a.example"), dom("s.example"), 2012, day(2012, 5, 10), "l",
                            day(2013, 5, 10), first);
    CHECK(r.time_difference_days == 365);
    CHECK(r.reactive());
  }
  SUBCASE("listed a year before appearing is proactive") {
    auto r = make_detection(dom("a.example"), dom("s.example"), 2013, day(2013, 5, 10), "l",
                            day(2012, 5, 10), first);
    CHECK(r.time_difference_days == -365);
    CHECK_FALSE(r.reactive());
  }
  SUBCASE("listed 100 days after first seen") {
    auto r = make_detection(dom("a.example"), dom("s.example"), 2012, day(2012, 1, 1), "l",
                            day(2012, 4, 10), first);
    CHECK(r.time_difference_days == 100);
  }
}

TEST_CASE("first-snapshot rule") {
  const Date first = day(2012, 3, 1);
  SUBCASE("same day observation records 1, never 0") {
    auto r = make_detection(dom("a.example"), dom("s.example"), 2012, first, "l", first, first);
    CHECK(r.time_difference_days == 1);
    CHECK(r.first_snapshot);
    CHECK_FALSE(r.censored);
  }
  SUBCASE("web sighting before the first snapshot is censored") {
    auto r = make_detection(dom("a.example"), dom("s.example"), 2011, day(2011, 6, 1), "l",
                            first, first);
    CHECK(r.time_difference_days == 1);
    CHECK(r.censored);
  }
  SUBCASE("web sighting after the first snapshot stays proactive") {
    auto r = make_detection(dom("a.example"), dom("s.example"), 2013, day(2013, 3, 1), "l",
                            first, first);
    CHECK(r.time_difference_days == -365);
  }
  SUBCASE("zero outside the first snapshot stays zero") {
    auto r = make_detection(dom("a.example"), dom("s.example"), 2013, day(2013, 3, 1), "l",
                            day(2013, 3, 1), first);
    CHECK(r.time_difference_days == 0);
    CHECK_FALSE(r.reactive());
  }
}

TEST_CASE("build_detections: year-local and global first occurrence") {
  TimelineStore store;
  store.put_observation(obs("s.example", 2012, 1, day(2012, 2, 1), {"a.example", "x.example"}));
  store.put_observation(obs("s.example", 2013, 1, day(2013, 2, 1), {"b.example"}));
  store.put_observation(obs("s.example", 2013, 3, day(2013, 8, 1), {"a.example", "b.example"}));
  store.put_observation(obs("t.example", 2013, 2, day(2013, 5, 1), {"a.example"}));
  store.put_list_snapshot(snap("l", day(2011, 1, 1), {"b.example"}));
  store.put_list_snapshot(snap("l", day(2014, 1, 1), {"a.example", "b.example"}));

  auto local = store.build_detections(2013, "l");
  REQUIRE(local.size() == 3);
  // Sorted by (site, domain).
  CHECK(local[0].site == dom("s.example"));
  CHECK(local[0].domain == dom("a.example"));
  CHECK(local[0].web_first_seen == day(2013, 8, 1));
  CHECK(local[0].time_difference_days == days_between(day(2013, 8, 1), day(2014, 1, 1)));
  CHECK(local[1].domain == dom("b.example"));
  CHECK(local[1].web_first_seen == day(2013, 2, 1));
  CHECK(local[1].time_difference_days == days_between(day(2013, 2, 1), day(2011, 1, 1)));
  CHECK(local[2].site == dom("t.example"));

  auto global = store.build_detections(2013, "l", FirstSeenScope::kGlobal);
  REQUIRE(global.size() == 3);
  CHECK(global[0].web_first_seen == day(2012, 2, 1));
  CHECK(global[0].year == 2013);

  std::set<RegistrableDomain> only_t{dom("t.example")};
  CHECK(store.build_detections(2013, "l", FirstSeenScope::kYearLocal, &only_t).size() == 1);
  CHECK(store.build_detections(2012, "l").size() == 1);
  CHECK_THROWS_AS(store.build_detections(2012, "missing"), UnknownList);
}

TEST_CASE("complete_sites drops sites with an empty year") {
  TimelineStore store;
  store.put_observation(obs("full.example", 2012, 1, day(2012, 1, 1), {}));
  store.put_observation(obs("full.example", 2013, 4, day(2013, 10, 1), {}));
  store.put_observation(obs("full.example", 2014, 2, day(2014, 4, 1), {}));
  store.put_observation(obs("gap.example", 2012, 1, day(2012, 1, 1), {}));
  store.put_observation(obs("gap.example", 2014, 1, day(2014, 1, 1), {}));
  auto kept = store.complete_sites(2012, 2014);
  CHECK(kept == std::set<RegistrableDomain>{dom("full.example")});
}

TEST_CASE("union_detections keeps the earliest listing") {
  const Date first = day(2010, 1, 1);
  std::vector<DetectionRecord> rs{
      make_detection(dom("a.example"), dom("s.example"), 2012, day(2012, 1, 1), "zeta",
                     day(2012, 6, 1), first),
      make_detection(dom("a.example"), dom("s.example"), 2012, day(2012, 1, 1), "alpha",
                     day(2012, 6, 1), first),
      make_detection(dom("a.example"), dom("s.example"), 2012, day(2012, 1, 1), "beta",
                     day(2012, 3, 1), first),
      make_detection(dom("b.example"), dom("s.example"), 2012, day(2012, 1, 1), "zeta",
                     day(2012, 6, 1), first)};
  auto u = union_detections(rs);
  REQUIRE(u.size() == 2);
  CHECK(u[0].list_id == "beta");
  CHECK(u[1].list_id == "zeta");
  rs.erase(rs.begin() + 2);
  CHECK(union_detections(rs)[0].list_id == "alpha");
}

TEST_CASE("round trip through the record files") {
  TempDir tmp;
  std::vector<DetectionRecord> detections;
  {
    TimelineStore store(tmp.path);
    store.put_observation(
        obs("s.example", 2012, 1, day(2012, 2, 1), {"a.example"}, {"us", "au"}));
    store.put_observation(obs("s.example", 2012, 2, day(2012, 5, 1), {"b.example"}));
    store.put_list_snapshot(snap("l", day(2011, 1, 1), {"a.example", "b.example"}));
    detections = store.build_detections(2012, "l");
  }
  TimelineStore reloaded(tmp.path);
  REQUIRE(reloaded.observations().size() == 2);
  auto first = reloaded.observations().begin()->second;
  CHECK(first.country_tags == std::vector<std::string>{"au", "us"});
  CHECK(first.memento_timestamp == Timestamp{day(2012, 2, 1)});
  CHECK(reloaded.snapshots("l").size() == 1);
  CHECK(reloaded.snapshots("l")[0] == snap("l", day(2011, 1, 1), {"a.example", "b.example"}));
  CHECK(reloaded.build_detections(2012, "l") == detections);
  // Re-putting loaded records neither conflicts nor duplicates lines.
  CHECK_FALSE(reloaded.put_observation(first));

  write_detections(tmp.path / "detections.jsonl", detections);
  CHECK(read_detections(tmp.path / "detections.jsonl") == detections);
  CHECK_THROWS_AS(read_detections(tmp.path / "nope.jsonl"), MissingStage);
}

TEST_CASE("malformed record lines raise ParseError") {
  CHECK_THROWS_AS(observation_from_json("{\"site\": 3}"), ParseError);
  CHECK_THROWS_AS(list_record_from_json("not json"), ParseError);
  CHECK_THROWS_AS(detection_from_json("{\"domain\": \"com\"}"), ParseError);
}
