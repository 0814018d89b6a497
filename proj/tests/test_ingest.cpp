#include <fstream>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "rpclust/error.hpp"
#include "rpclust/ingest.hpp"
#include "sample_data.hpp"

using namespace rpclust;

namespace {

const char* kCheckin =
    R"j({"timestamp": "Tue, 22 Dec 2012", "user_id": "twitter_User_ID", )j"
    R"j("text": "I bought the clothes by **department store. (@ **Department store w/7 others)", )j"
    R"j("coordinates": [35.628227, 139.738712]})j";

Gazetteer tokyo() {
  return Gazetteer({{"Shinagawa-ku, Tokyo, Japan", 35.6092, 139.7302}, {"Shinjuku-ku, Tokyo, Japan", 35.6938, 139.7034}});
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an rpclust::Error");
  return ErrorCode::Io;
}

std::vector<RawRecord> read_jsonl(const std::string& path) {
  std::ifstream in(path);
  std::vector<RawRecord> out;
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) out.push_back(parse_record(line));
  return out;
}

}  // namespace

TEST_SUITE("ingest") {
  TEST_CASE("JSON record") {
    const auto r = parse_record(kCheckin);
    CHECK(r.timestamp == "Tue, 22 Dec 2012");
    CHECK(r.user_id == "twitter_User_ID");
    CHECK(r.text == "I bought the clothes by **department store. (@ **Department store w/7 others)");
    CHECK(r.latitude == 35.628227);
    CHECK(r.longitude == 139.738712);
  }

  TEST_CASE("CSV record forms") {
    const auto a = parse_record(R"j("Tue, 22 Dec 2012",u1,"I bought a cake (@ Supermarket)",35.5,139.5)j");
    CHECK(a.timestamp == "Tue, 22 Dec 2012");
    CHECK(a.latitude == 35.5);
    const auto b = parse_record(R"j("Tue, 22 Dec 2012",u1,"text","[35.5, 139.5]")j");
    CHECK(b.longitude == 139.5);
  }

  TEST_CASE("malformed records") {
    CHECK(code_of([] { parse_record(R"j({"timestamp": "t", "user_id": "u", "text": "x"})j"); }) ==
          ErrorCode::MalformedRecord);
    CHECK(code_of([] {
            parse_record(R"j({"timestamp": "t", "user_id": "u", "text": "x", "coordinates": [95.0, 10.0]})j");
          }) == ErrorCode::MalformedRecord);
    CHECK(code_of([] {
            parse_record(R"j({"timestamp": "t", "user_id": "u", "text": "x", "coordinates": [10.0, 181.0]})j");
          }) == ErrorCode::MalformedRecord);
    CHECK(code_of([] { parse_record("{not json"); }) == ErrorCode::MalformedRecord);
    CHECK(code_of([] { parse_record("a,b"); }) == ErrorCode::MalformedRecord);
  }

  TEST_CASE("place extraction") {
    CHECK(extract_place("I bought the clothes by **department store. (@ **Department store w/7 others)") ==
          "Department store");
    CHECK(extract_place("(@ Supermarket)") == "Supermarket");
    CHECK_FALSE(extract_place("no venue here").has_value());
    CHECK_FALSE(extract_place("thanks @friend").has_value());
    CHECK_FALSE(extract_place("(@ )").has_value());
  }

  TEST_CASE("item extraction") {
    const auto rules = RuleSet::defaults();
    CHECK(extract_item("I bought the clothes by **department store. (@ **Department store w/7 others)", rules) ==
          "clothes");
    CHECK(extract_item("I bought a hair dryer at the shop", rules) == "hair dryer");
    CHECK(extract_item("Just PURCHASED a Refrigerator.", rules) == "Refrigerator");
    CHECK_FALSE(extract_item("I walked home", rules).has_value());
    CHECK_FALSE(extract_item("I bought at the shop", rules).has_value());
  }

  TEST_CASE("ruleset text") {
    const auto rules = RuleSet::parse("# comment\n\nacquired -> at|from\n");
    REQUIRE(rules.rules().size() == 1);
    CHECK(extract_item("acquired new shoes from a shop", rules) == "new shoes");
    CHECK_FALSE(extract_item("I bought shoes", rules).has_value());
    CHECK_THROWS_AS(RuleSet::parse("# nothing\n"), Error);
    CHECK_THROWS_AS(RuleSet::parse("no arrow here\n"), Error);
  }

  TEST_CASE("haversine against the law of cosines") {
    const double lat = 35.628227, lon = 139.738712;
    CHECK(haversine_km(lat, lon, 35.6092, 139.7302) == doctest::Approx(2.251271032969351).epsilon(1e-9));
    CHECK(haversine_km(lat, lon, 35.6938, 139.7034) == doctest::Approx(7.958765530586536).epsilon(1e-9));
    CHECK(haversine_km(lat, lon, 35.6938, 139.7034) ==
          doctest::Approx(oracle::law_of_cosines_km(lat, lon, 35.6938, 139.7034)).epsilon(1e-6));
    CHECK(haversine_km(1, 2, 1, 2) == 0.0);
  }

  TEST_CASE("reverse geocoding") {
    const auto gz = tokyo();
    const auto hit = reverse_geocode(35.628227, 139.738712, gz);
    CHECK(hit.city == "Shinagawa-ku, Tokyo, Japan");
    CHECK(hit.distance_km == doctest::Approx(2.251271032969351).epsilon(1e-9));

    const auto at = reverse_geocode(35.6938, 139.7034, gz);
    CHECK(at.city == "Shinjuku-ku, Tokyo, Japan");
    CHECK(at.distance_km == 0.0);

    const Gazetteer tie({{"B", 0.0, 1.0}, {"A", 0.0, -1.0}});
    CHECK(reverse_geocode(0.0, 0.0, tie).city == "A");

    CHECK(code_of([] { reverse_geocode(0, 0, Gazetteer({})); }) == ErrorCode::EmptyGazetteer);
    CHECK(code_of([] { Gazetteer({{"A", 0, 0}, {"A", 1, 1}}); }) == ErrorCode::DuplicateCity);
  }

  TEST_CASE("gazetteer CSV") {
    std::ifstream in(RPCLUST_FIXTURES "/purchase_gazetteer.csv");
    const auto gz = Gazetteer::read_csv(in);
    CHECK(gz.entries().size() == 7);
    REQUIRE(gz.find("Adachi-ku, Tokyo, Japan") != nullptr);
    CHECK(gz.find("Adachi-ku, Tokyo, Japan")->latitude == 35.7750);
    CHECK(gz.find("Nowhere") == nullptr);

    std::istringstream bad("name,lat,lon\nA,x,1\n");
    CHECK_THROWS_AS(Gazetteer::read_csv(bad), Error);
  }

  TEST_CASE("records to pairs") {
    const auto result = to_pairs({parse_record(kCheckin)}, tokyo(), RuleSet::defaults());
    REQUIRE(result.records.size() == 1);
    CHECK(result.review.empty());
    CHECK(result.records[0].pair() == LabelPair{"clothes _ Department store", "Shinagawa-ku, Tokyo, Japan"});

    RawRecord placeless{"t", "u", "I bought a cake", 35.6, 139.7};
    RawRecord itemless{"t", "u", "Lunch (@ Cafe)", 35.6, 139.7};
    RawRecord neither{"t", "u", "hello", 35.6, 139.7};
    const auto mixed = to_pairs({placeless, itemless, neither}, tokyo(), RuleSet::defaults());
    CHECK(mixed.records.empty());
    REQUIRE(mixed.review.size() == 3);
    CHECK(mixed.review[0].reason == ReviewReason::NoPlace);
    CHECK(mixed.review[1].reason == ReviewReason::NoItem);
    CHECK(mixed.review[2].reason == ReviewReason::NoItemNoPlace);
    CHECK(mixed.review[2].source == 2);

    std::ostringstream out;
    write_review_csv(out, mixed.review);
    CHECK(out.str() == "source,reason,text\n0,NO_PLACE,I bought a cake\n1,NO_ITEM,Lunch (@ Cafe)\n2,NO_ITEM_NO_PLACE,hello\n");
  }

  TEST_CASE("seven fixture records give the seven purchase pairs") {
    std::ifstream gin(RPCLUST_FIXTURES "/purchase_gazetteer.csv");
    const auto gz = Gazetteer::read_csv(gin);
    const auto raw = read_jsonl(RPCLUST_FIXTURES "/purchase_records.jsonl");
    const auto result = to_pairs(raw, gz, RuleSet::defaults());
    CHECK(result.review.empty());
    CHECK(result.pairs() == sample::purchases());
    // Every record is either a pair or a review entry.
    CHECK(result.records.size() + result.review.size() == raw.size());
  }

  TEST_CASE("extraction is deterministic and splits back into item and place") {
    const auto rules = RuleSet::defaults();
    const std::string text = "I got a Desk from the shop (@ Supermarket)";
    CHECK(extract_item(text, rules) == extract_item(text, rules));
    const auto p = purchase_from_pair({"Desk _ Supermarket", "Akita"});
    CHECK(p.item == "Desk");
    CHECK(p.place == "Supermarket");
    CHECK(p.city == "Akita");
  }
}
