#include <filesystem>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "doctest.h"
#include "scratch_dir.hpp"

using namespace rpclust;
using testutil::fixture;
using testutil::ScratchDir;
using testutil::slurp;
using testutil::spit;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::size_t line_count(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage errors exit 1") {
    CHECK(run({}).code == cli::kExitUsage);
    CHECK(run({"frobnicate"}).code == cli::kExitUsage);
    CHECK(run({"cluster"}).code == cli::kExitUsage);  // --pairs missing
    const auto bad = run({"cluster", "--pairs", fixture("purchase_pairs.csv"), "--linkage", "median"});
    CHECK(bad.code == cli::kExitUsage);
    CHECK(bad.err.find("ward") != std::string::npos);
    CHECK(run({"cluster", "--pairs", fixture("purchase_pairs.csv"), "--cut", "k=abc"}).code == cli::kExitUsage);
    CHECK(run({"evaluate"}).code == cli::kExitUsage);
    CHECK(run({"--help"}).code == cli::kExitOk);
  }

  TEST_CASE("ingest the single example record") {
    ScratchDir dir;
    spit(dir / "gz.csv", "name,lat,lon\n\"Shinagawa-ku, Tokyo, Japan\",35.6092,139.7302\n");
    const auto r = run({"ingest", "--records", fixture("checkin_record.jsonl"), "--gazetteer", dir / "gz.csv",
                        "--out-dir", dir / "out"});
    CHECK(r.code == cli::kExitOk);
    CHECK(slurp(dir / "out/pairs.csv") ==
          "category,city\nclothes _ Department store,\"Shinagawa-ku, Tokyo, Japan\"\n");
    CHECK(slurp(dir / "out/review.csv") == "source,reason,text\n");
  }

  TEST_CASE("ingest: empty file, placeless record and malformed lines") {
    ScratchDir dir;
    spit(dir / "empty.jsonl", "");
    CHECK(run({"ingest", "--records", dir / "empty.jsonl", "--gazetteer", fixture("tokyo_gazetteer.csv"),
               "--out-dir", dir.path().string()})
              .code == cli::kExitData);

    spit(dir / "two.jsonl",
         slurp(fixture("checkin_record.jsonl")) +
             R"j({"timestamp": "t", "user_id": "u", "text": "I bought a cake", "coordinates": [35.6, 139.7]})j" "\n");
    const auto r = run({"ingest", "--records", dir / "two.jsonl", "--gazetteer", fixture("tokyo_gazetteer.csv"),
                        "--out-dir", dir / "o"});
    CHECK(r.code == cli::kExitOk);
    CHECK(line_count(slurp(dir / "o/pairs.csv")) == 2);
    CHECK(slurp(dir / "o/review.csv") == "source,reason,text\n2,NO_PLACE,I bought a cake\n");

    spit(dir / "bad.jsonl", slurp(fixture("checkin_record.jsonl")) + "{broken\n");
    CHECK(run({"ingest", "--records", dir / "bad.jsonl", "--gazetteer", fixture("tokyo_gazetteer.csv"),
               "--out-dir", dir / "b"})
              .code == cli::kExitData);
    CHECK(run({"ingest", "--records", dir / "bad.jsonl", "--gazetteer", fixture("tokyo_gazetteer.csv"),
               "--out-dir", dir / "b", "--max-malformed", "1"})
              .code == cli::kExitOk);
    CHECK(slurp(dir / "b/review.csv").find("2,MALFORMED,{broken") != std::string::npos);
  }

  TEST_CASE("cluster writes every artifact") {
    ScratchDir dir;
    const auto r = run({"cluster", "--pairs", fixture("purchase_pairs.csv"), "--out-dir", dir.path().string()});
    REQUIRE(r.code == cli::kExitOk);
    for (const char* f : {"partition.csv", "dendrogram.dot", "dendrogram.json", "embedding.json", "crosstab.json",
                          "run.json"})
      CHECK(std::filesystem::exists(dir / f));
    CHECK(line_count(slurp(dir / "partition.csv")) == 14);  // header + 13 nodes
    const auto emb = nlohmann::json::parse(slurp(dir / "embedding.json"));
    CHECK(emb["singular_values"].size() == 5);

    ScratchDir one;
    REQUIRE(run({"cluster", "--pairs", fixture("purchase_pairs.csv"), "--cut", "k=1", "--out-dir",
                 one.path().string()})
                .code == cli::kExitOk);
    const auto csv = slurp(one / "partition.csv");
    CHECK(csv.find(",1\n") == std::string::npos);
  }

  TEST_CASE("cluster is byte-identical across runs") {
    ScratchDir a, b;
    for (auto* d : {&a, &b})
      REQUIRE(run({"cluster", "--pairs", fixture("purchase_pairs.csv"), "--linkage", "average", "--out-dir",
                   d->path().string()})
                  .code == cli::kExitOk);
    for (const char* f : {"partition.csv", "dendrogram.dot", "dendrogram.json", "embedding.json", "run.json"})
      CHECK(slurp(a / f) == slurp(b / f));
  }

  TEST_CASE("config file supplies options and flags override it") {
    ScratchDir dir;
    spit(dir / "run.ini", "[cluster]\npairs=" + fixture("purchase_pairs.csv") + "\ncut=k=2\nout-dir=" +
                              (dir / "from-config") + "\n");
    REQUIRE(run({"--config", dir / "run.ini", "cluster"}).code == cli::kExitOk);
    const auto run_json = nlohmann::json::parse(slurp(dir / "from-config/run.json"));
    CHECK(run_json["cut"] == "k=2");
    REQUIRE(run({"--config", dir / "run.ini", "cluster", "--cut", "k=3"}).code == cli::kExitOk);
    CHECK(nlohmann::json::parse(slurp(dir / "from-config/run.json"))["cut"] == "k=3");
  }

  TEST_CASE("modularity baselines") {
    for (const char* m : {"qb", "qm", "qh", "wp"}) {
      CAPTURE(m);
      ScratchDir dir;
      const auto r = run({"modularity", "--pairs", fixture("purchase_pairs.csv"), "--measure", m, "--out-dir",
                          dir.path().string()});
      CHECK(r.code == cli::kExitOk);
      CHECK(nlohmann::json::parse(slurp(dir / "modularity.json"))["measure"] == m);
      CHECK(line_count(slurp(dir / "communities.csv")) > 1);
    }
    ScratchDir dir;
    spit(dir / "cite.csv", "row,col\nA,B\nB,C\n");
    CHECK(run({"modularity", "--pairs", dir / "cite.csv", "--out-dir", dir.path().string()}).code ==
          cli::kExitData);
  }

  TEST_CASE("evaluate") {
    ScratchDir dir;
    const auto r = run({"evaluate", "--synthetic", "700", "--seed", "2", "--out-dir", dir.path().string()});
    REQUIRE(r.code == cli::kExitOk);
    const auto report = nlohmann::json::parse(slurp(dir / "report.json"));
    CHECK(report["node_counts"].size() == 7);
    CHECK(report["series"].size() == 3);
    CHECK(line_count(slurp(dir / "report.csv")) == 1 + 7 * 3);

    CHECK(run({"evaluate", "--synthetic", "50", "--out-dir", dir.path().string()}).code == cli::kExitData);
    CHECK(run({"evaluate", "--pairs", fixture("purchase_pairs.csv"), "--out-dir", dir.path().string()}).code ==
          cli::kExitData);
    const auto small = run({"evaluate", "--pairs", fixture("purchase_pairs.csv"), "--step", "3", "--out-dir",
                            dir.path().string()});
    CHECK(small.code == cli::kExitOk);
  }

  TEST_CASE("geojson export") {
    ScratchDir dir;
    spit(dir / "part.csv", "label,part_tag,community\nitem,ROW,0\nA,COL,0\nB,COL,1\n");
    spit(dir / "gz.csv", "name,lat,lon\nA,10,20\nB,-5,30\n");
    REQUIRE(run({"export-geojson", "--partition", dir / "part.csv", "--gazetteer", dir / "gz.csv", "--out",
                 dir / "map.geojson"})
                .code == cli::kExitOk);
    const auto fc = nlohmann::json::parse(slurp(dir / "map.geojson"));
    CHECK(fc["type"] == "FeatureCollection");
    REQUIRE(fc["features"].size() == 2);
    CHECK(fc["features"][0]["geometry"]["coordinates"] == nlohmann::json::array({20.0, 10.0}));
    CHECK(fc["features"][0]["properties"]["color"] != fc["features"][1]["properties"]["color"]);

    spit(dir / "gz1.csv", "name,lat,lon\nA,10,20\n");
    const auto missing = run({"export-geojson", "--partition", dir / "part.csv", "--gazetteer", dir / "gz1.csv",
                              "--out", dir / "x.geojson"});
    CHECK(missing.code == cli::kExitData);
    CHECK(missing.err.find("UnknownCity") != std::string::npos);
  }

  TEST_CASE("dot export from dendrogram JSON") {
    ScratchDir dir;
    REQUIRE(run({"cluster", "--pairs", fixture("purchase_pairs.csv"), "--out-dir", dir.path().string()}).code ==
            cli::kExitOk);
    REQUIRE(run({"export-dot", "--dendrogram", dir / "dendrogram.json", "--out", dir / "again.dot"}).code ==
            cli::kExitOk);
    CHECK(slurp(dir / "again.dot") == slurp(dir / "dendrogram.dot"));
    spit(dir / "junk.json", "{");
    CHECK(run({"export-dot", "--dendrogram", dir / "junk.json", "--out", dir / "j.dot"}).code == cli::kExitData);
  }
}
