#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rpclust/cluster.hpp"
#include "rpclust/correspondence.hpp"
#include "rpclust/crosstab.hpp"
#include "rpclust/error.hpp"
#include "rpclust/eval.hpp"
#include "rpclust/export.hpp"
#include "rpclust/ingest.hpp"
#include "rpclust/modularity.hpp"

namespace rpclust::cli {

namespace fs = std::filesystem;

namespace {

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  return in;
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw Error(ErrorCode::Io, "short write to '" + path.string() + "'");
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

template <typename Fn>
std::string render(Fn&& fn) {
  std::ostringstream s;
  fn(s);
  return s.str();
}

std::vector<LabelPair> load_pairs(const std::string& path) {
  auto in = open_input(path);
  auto pairs = read_pairs_csv(in);
  if (pairs.empty()) throw Error(ErrorCode::EmptyInput, "'" + path + "' holds no pairs");
  return pairs;
}

Gazetteer load_gazetteer(const std::string& path) {
  auto in = open_input(path);
  return Gazetteer::read_csv(in);
}

CutCriterion cut_from(const std::string& text) {
  auto c = parse_cut(text);
  if (!c) throw CLI::ValidationError("--cut", "expected largest-gap, k=<n> or height=<h>, got '" + text + "'");
  return *c;
}

const std::vector<std::string> kLinkages = {"nearest", "furthest", "average", "ward"};

// --- ingest ---------------------------------------------------------------

struct IngestOptions {
  std::string records;
  std::string gazetteer;
  std::string rules;
  std::string out_dir = ".";
  std::size_t max_malformed = 0;
};

void cmd_ingest(const IngestOptions& o, std::ostream& err) {
  auto in = open_input(o.records);
  std::vector<RawRecord> records;
  std::vector<std::size_t> line_of;
  std::vector<ReviewEntry> malformed;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (line_no == 1 && line.rfind("timestamp", 0) == 0) continue;
    try {
      records.push_back(parse_record(line));
      line_of.push_back(line_no);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::MalformedRecord) throw;
      err << "line " << line_no << ": " << e.what() << "\n";
      malformed.push_back({line_no, ReviewReason::Malformed, line});
    }
  }
  if (records.empty() && malformed.empty())
    throw Error(ErrorCode::EmptyInput, "'" + o.records + "' holds no records");
  if (malformed.size() > o.max_malformed)
    throw Error(ErrorCode::MalformedRecord,
                std::to_string(malformed.size()) + " malformed records exceed the tolerance of " +
                    std::to_string(o.max_malformed));

  RuleSet rules = RuleSet::defaults();
  if (!o.rules.empty()) {
    auto rin = open_input(o.rules);
    rules = RuleSet::read(rin);
  }
  auto result = to_pairs(records, load_gazetteer(o.gazetteer), rules);

  std::vector<ReviewEntry> review = malformed;
  for (auto entry : result.review) {
    entry.source = line_of[entry.source];
    review.push_back(std::move(entry));
  }
  std::stable_sort(review.begin(), review.end(),
                   [](const ReviewEntry& a, const ReviewEntry& b) { return a.source < b.source; });

  const fs::path dir(o.out_dir);
  write_file(dir / "pairs.csv", render([&](std::ostream& s) { write_pairs_csv(s, result.pairs()); }));
  write_file(dir / "review.csv", render([&](std::ostream& s) { write_review_csv(s, review); }));
  err << result.records.size() << " pairs, " << review.size() << " records queued for review\n";
}

// --- cluster --------------------------------------------------------------

struct ClusterOptions {
  std::string pairs;
  std::string linkage = "ward";
  std::string cut = "largest-gap";
  std::optional<long> dims;
  std::string out_dir = ".";
};

void cmd_cluster(const ClusterOptions& o, std::ostream& err) {
  PipelineConfig config;
  config.method = *parse_linkage(o.linkage);
  config.criterion = cut_from(o.cut);
  if (o.dims) config.dims = static_cast<Eigen::Index>(*o.dims);

  auto result = responsiveness_pair_cluster(load_pairs(o.pairs), config);

  const fs::path dir(o.out_dir);
  write_file(dir / "partition.csv", render([&](std::ostream& s) {
               write_partition_csv(s, partition_rows(result.cloud, result.partition));
             }));
  write_file(dir / "dendrogram.dot", to_dot(result.dendrogram));
  write_file(dir / "dendrogram.json", dump(to_json(result.dendrogram)));
  write_file(dir / "embedding.json", dump(to_json(result.embedding)));
  write_file(dir / "crosstab.json", dump(to_json(result.crosstab)));
  write_file(dir / "run.json",
             dump({{"command", "cluster"},
                   {"pairs", o.pairs},
                   {"linkage", o.linkage},
                   {"cut", describe(config.criterion)},
                   {"dims", result.embedding.dims()}}));
  err << result.cloud.size() << " nodes in " << result.partition.communities << " communities\n";
}

// --- modularity -----------------------------------------------------------

struct ModularityOptions {
  std::string pairs;
  std::string measure = "qh";
  std::string out_dir = ".";
};

void cmd_modularity(const ModularityOptions& o, std::ostream& err) {
  auto g = graph_from_pairs(load_pairs(o.pairs));
  const fs::path dir(o.out_dir);

  if (o.measure == "wp") {
    auto wp = weakest_pair(co_reference_ratios(g));
    std::vector<PartitionRow> rows;
    for (std::size_t u = 0; u < g.u_count(); ++u)
      rows.push_back({g.u_labels()[u], PartTag::Row, wp.partition.assignment[u]});
    write_file(dir / "communities.csv", render([&](std::ostream& s) { write_partition_csv(s, rows); }));
    write_file(dir / "modularity.json", dump({{"measure", "wp"},
                                              {"communities", wp.partition.communities},
                                              {"ibrp", wp.ibrp}}));
    err << "weakest pair: " << wp.partition.communities << " communities\n";
    return;
  }

  const Measure measure = *parse_measure(o.measure);
  auto cs = greedy_optimize(g, measure);
  write_file(dir / "communities.csv",
             render([&](std::ostream& s) { write_partition_csv(s, partition_rows(g, cs)); }));
  nlohmann::json meta = {{"measure", o.measure},
                         {"score", cs.score},
                         {"communities", cs.communities()},
                         {"optimizer", "greedy agglomerative"}};
  if (measure == Measure::QH) meta["weight_convention"] = "e_ij / max_k e_ik";
  if (measure != Measure::QB) {
    meta["row_communities"] = cs.u_communities;
    meta["col_communities"] = cs.v_communities;
  }
  write_file(dir / "modularity.json", dump(meta));
  err << o.measure << " = " << cs.score << " with " << cs.communities() << " communities\n";
}

// --- evaluate -------------------------------------------------------------

struct EvaluateOptions {
  std::string pairs;
  std::size_t synthetic = 0;
  std::uint64_t seed = 1;
  std::size_t step = 100;
  std::string linkage = "ward";
  std::string cut = "height=1";
  std::string variant = "welch";
  std::string out_dir = ".";
};

void cmd_evaluate(const EvaluateOptions& o, std::ostream& err) {
  std::vector<PurchaseRecord> records;
  if (!o.pairs.empty()) {
    for (const auto& p : load_pairs(o.pairs)) records.push_back(purchase_from_pair(p));
  } else {
    SyntheticConfig sc;
    sc.records = o.synthetic;
    records = synthetic_records(sc, o.seed);
  }
  SweepConfig config;
  config.step = o.step;
  config.pipeline.method = *parse_linkage(o.linkage);
  config.pipeline.criterion = cut_from(o.cut);
  config.variant = o.variant == "student" ? TTestVariant::Student : TTestVariant::Welch;

  auto report = node_sweep(records, config);
  const fs::path dir(o.out_dir);
  write_file(dir / "report.json", dump(to_json(report)));
  write_file(dir / "report.csv", render([&](std::ostream& s) { write_report_csv(s, report); }));
  err << report.node_counts.size() << " sweep points, t = " << report.test.t
      << ", p = " << report.test.p << "\n";
}

// --- exports --------------------------------------------------------------

struct GeojsonOptions {
  std::string partition;
  std::string gazetteer;
  std::string out = "clusters.geojson";
};

void cmd_export_geojson(const GeojsonOptions& o, std::ostream& err) {
  auto in = open_input(o.partition);
  auto rows = read_partition_csv(in);
  auto fc = partition_geojson(rows, load_gazetteer(o.gazetteer));
  write_file(o.out, dump(fc));
  err << fc["features"].size() << " features written to " << o.out << "\n";
}

struct DotOptions {
  std::string dendrogram;
  std::string out = "dendrogram.dot";
};

void cmd_export_dot(const DotOptions& o, std::ostream& err) {
  auto in = open_input(o.dendrogram);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadFormat, std::string("dendrogram JSON: ") + e.what());
  }
  write_file(o.out, to_dot(dendrogram_from_json(j)));
  err << "dendrogram written to " << o.out << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Responsiveness pair clustering of two-mode purchase data", "rpclust"};
  app.set_config("--config", "", "key=value configuration file; flags override it");
  app.require_subcommand(1);

  IngestOptions ingest;
  auto* sub_ingest = app.add_subcommand("ingest", "Extract (item _ place, city) pairs from records");
  sub_ingest->add_option("--records", ingest.records, "Records file (CSV or JSON lines)")->required()->check(CLI::ExistingFile);
  sub_ingest->add_option("--gazetteer", ingest.gazetteer, "Gazetteer CSV: name,lat,lon")->required()->check(CLI::ExistingFile);
  sub_ingest->add_option("--rules", ingest.rules, "Extraction rules file")->check(CLI::ExistingFile);
  sub_ingest->add_option("--out-dir", ingest.out_dir, "Output directory")->capture_default_str();
  sub_ingest->add_option("--max-malformed", ingest.max_malformed, "Malformed records tolerated")->capture_default_str();

  ClusterOptions cluster;
  auto* sub_cluster = app.add_subcommand("cluster", "Cluster both sides of a pair table");
  sub_cluster->add_option("--pairs", cluster.pairs, "Pair CSV")->required()->check(CLI::ExistingFile);
  sub_cluster->add_option("--linkage", cluster.linkage, "Linkage rule")
      ->check(CLI::IsMember(kLinkages))
      ->capture_default_str();
  sub_cluster->add_option("--cut", cluster.cut, "largest-gap | k=<n> | height=<h>")->capture_default_str();
  sub_cluster->add_option("--dims", cluster.dims, "Embedding axes (default: all)")->check(CLI::PositiveNumber);
  sub_cluster->add_option("--out-dir", cluster.out_dir, "Output directory")->capture_default_str();

  ModularityOptions modularity;
  auto* sub_mod = app.add_subcommand("modularity", "Baseline bipartite community detection");
  sub_mod->add_option("--pairs", modularity.pairs, "Pair CSV")->required()->check(CLI::ExistingFile);
  sub_mod->add_option("--measure", modularity.measure, "qb | qm | qh | wp")
      ->check(CLI::IsMember({"qb", "qm", "qh", "wp"}))
      ->capture_default_str();
  sub_mod->add_option("--out-dir", modularity.out_dir, "Output directory")->capture_default_str();

  EvaluateOptions evaluate;
  auto* sub_eval = app.add_subcommand("evaluate", "Node-count sweep against the R_n reference");
  auto* eval_pairs = sub_eval->add_option("--pairs", evaluate.pairs, "Pair CSV of purchase records")->check(CLI::ExistingFile);
  auto* eval_syn = sub_eval->add_option("--synthetic", evaluate.synthetic, "Generate this many synthetic records");
  eval_pairs->excludes(eval_syn);
  sub_eval->add_option("--seed", evaluate.seed, "Synthetic data seed")->capture_default_str();
  sub_eval->add_option("--step", evaluate.step, "Sweep step in records")->capture_default_str();
  sub_eval->add_option("--linkage", evaluate.linkage, "Linkage rule")
      ->check(CLI::IsMember(kLinkages))
      ->capture_default_str();
  sub_eval->add_option("--cut", evaluate.cut, "largest-gap | k=<n> | height=<h>")->capture_default_str();
  sub_eval->add_option("--variant", evaluate.variant, "welch | student")
      ->check(CLI::IsMember({"welch", "student"}))
      ->capture_default_str();
  sub_eval->add_option("--out-dir", evaluate.out_dir, "Output directory")->capture_default_str();

  GeojsonOptions geojson;
  auto* sub_geo = app.add_subcommand("export-geojson", "Map overlay of city communities");
  sub_geo->add_option("--partition", geojson.partition, "Partition CSV")->required()->check(CLI::ExistingFile);
  sub_geo->add_option("--gazetteer", geojson.gazetteer, "Gazetteer CSV")->required()->check(CLI::ExistingFile);
  sub_geo->add_option("--out", geojson.out, "Output GeoJSON file")->capture_default_str();

  DotOptions dot;
  auto* sub_dot = app.add_subcommand("export-dot", "Render a dendrogram JSON as DOT");
  sub_dot->add_option("--dendrogram", dot.dendrogram, "Dendrogram JSON")->required()->check(CLI::ExistingFile);
  sub_dot->add_option("--out", dot.out, "Output DOT file")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    if (sub_eval->parsed() && evaluate.pairs.empty() && evaluate.synthetic == 0)
      throw CLI::RequiredError("evaluate needs --pairs or --synthetic");
    if (sub_cluster->parsed()) cut_from(cluster.cut);
    if (sub_eval->parsed()) cut_from(evaluate.cut);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (sub_ingest->parsed()) cmd_ingest(ingest, err);
    else if (sub_cluster->parsed()) cmd_cluster(cluster, err);
    else if (sub_mod->parsed()) cmd_modularity(modularity, err);
    else if (sub_eval->parsed()) cmd_evaluate(evaluate, err);
    else if (sub_geo->parsed()) cmd_export_geojson(geojson, err);
    else if (sub_dot->parsed()) cmd_export_dot(dot, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

}  // namespace rpclust::cli
