#include <algorithm>
#include <sstream>

#include "doctest.h"
#include "rpclust/crosstab.hpp"
#include "rpclust/error.hpp"
#include "sample_data.hpp"

using namespace rpclust;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an rpclust::Error");
  return ErrorCode::Io;
}

}  // namespace

TEST_SUITE("crosstab") {
  TEST_CASE("purchase pairs give a 0/1 table with the repeated category summed") {
    const auto ct = build_crosstab(sample::purchases());
    CHECK(ct.rows() == 6);
    CHECK(ct.cols() == 7);
    CHECK(ct.grand_total() == 7);
    CHECK(ct.row_labels().front() == "Hair dryer _ Home electronics retailer");
    CHECK(ct.col_labels().back() == "Akita-city, Akita, Japan");
    for (Eigen::Index i = 0; i < ct.rows(); ++i)
      for (Eigen::Index j = 0; j < ct.cols(); ++j) CHECK((ct.count(i, j) == 0 || ct.count(i, j) == 1));
    for (Eigen::Index j = 0; j < ct.cols(); ++j) CHECK(ct.col_sum(j) == 1);
    const auto& rows = ct.row_labels();
    const auto cake = std::find(rows.begin(), rows.end(), "Cake _ Department store") - rows.begin();
    CHECK(ct.row_sum(cake) == 2);
  }

  TEST_CASE("duplicates accumulate") {
    const auto ct = build_crosstab({{"a", "x"}, {"a", "x"}});
    CHECK(ct.rows() == 1);
    CHECK(ct.cols() == 1);
    CHECK(ct.count(0, 0) == 2);
    CHECK(ct.grand_total() == 2);
  }

  TEST_CASE("input errors") {
    CHECK(code_of([] { build_crosstab({}); }) == ErrorCode::EmptyInput);
    CHECK(code_of([] { build_crosstab({{"", "x"}}); }) == ErrorCode::BadFormat);
    CountMatrix zero(2, 2);
    zero << 1, 0, 0, 0;
    CHECK(code_of([&] { CrossTab({"a", "b"}, {"x", "y"}, zero); }) == ErrorCode::ZeroMarginal);
    CountMatrix neg(1, 1);
    neg << -1;
    CHECK_THROWS_AS(CrossTab({"a"}, {"x"}, neg), Error);
    CountMatrix ok(1, 2);
    ok << 1, 1;
    CHECK(code_of([&] { CrossTab({"a", "b"}, {"x", "y"}, ok); }) == ErrorCode::BadShape);
    CHECK_THROWS_AS(CrossTab({"a"}, {"x", "x"}, ok), Error);
  }

  TEST_CASE("profiles") {
    CountMatrix ones = CountMatrix::Ones(2, 2);
    const auto p = profiles(CrossTab({"a", "b"}, {"x", "y"}, ones));
    CHECK((p.row_profiles.array() == 0.5).all());
    CHECK((p.col_profiles.array() == 0.5).all());

    CountMatrix one(1, 1);
    one << 3;
    const auto q = profiles(CrossTab({"a"}, {"x"}, one));
    CHECK(q.row_profiles(0, 0) == 1.0);
    CHECK(q.col_profiles(0, 0) == 1.0);

    const auto ct = build_crosstab(sample::purchases());
    const auto pr = profiles(ct);
    const auto& rows = ct.row_labels();
    const auto cake = std::find(rows.begin(), rows.end(), "Cake _ Department store") - rows.begin();
    int halves = 0;
    for (Eigen::Index j = 0; j < ct.cols(); ++j) {
      if (pr.row_profiles(cake, j) == doctest::Approx(0.5)) ++halves;
      else CHECK(pr.row_profiles(cake, j) == 0.0);
    }
    CHECK(halves == 2);
    for (Eigen::Index i = 0; i < ct.rows(); ++i) CHECK(pr.row_profiles.row(i).sum() == doctest::Approx(1.0));
    for (Eigen::Index j = 0; j < ct.cols(); ++j) CHECK(pr.col_profiles.col(j).sum() == doctest::Approx(1.0));
  }

  TEST_CASE("link restriction") {
    const auto cited = check_link_restriction(sample::citations());
    CHECK(cited.violation);
    CHECK(std::find(cited.offenders.begin(), cited.offenders.end(), "Akira, O.2000") != cited.offenders.end());

    const auto items = check_link_restriction(sample::item_places());
    CHECK_FALSE(items.violation);
    CHECK(items.offenders.empty());

    CHECK_FALSE(check_link_restriction({}).violation);
  }

  TEST_CASE("pairs CSV round trip, header optional") {
    std::ostringstream out;
    write_pairs_csv(out, sample::purchases());
    CHECK(out.str().rfind("category,city\n", 0) == 0);
    std::istringstream in(out.str());
    CHECK(read_pairs_csv(in) == sample::purchases());

    std::istringstream bare("a,x\nb,y\n");
    const auto pairs = read_pairs_csv(bare);
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[0] == LabelPair{"a", "x"});

    std::istringstream bad("a,x,extra\n");
    CHECK_THROWS_AS(read_pairs_csv(bad), Error);
  }

  TEST_CASE("JSON round trip") {
    const auto ct = build_crosstab(sample::purchases());
    const auto back = crosstab_from_json(to_json(ct));
    CHECK(back.row_labels() == ct.row_labels());
    CHECK(back.col_labels() == ct.col_labels());
    CHECK(back.counts() == ct.counts());
  }
}
