#include "rpclust/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <unordered_map>

#include <boost/math/distributions/students_t.hpp>

#include "rpclust/csv.hpp"
#include "rpclust/error.hpp"

namespace rpclust {

Partition rn_partition(const std::vector<PurchaseRecord>& records) {
  const std::size_t n = records.size();
  std::vector<std::string> key(n);

  auto cascade = [&](char rule, auto&& attribute) {
    std::unordered_map<std::string, std::size_t> freq;
    for (std::size_t i = 0; i < n; ++i)
      if (key[i].empty()) ++freq[attribute(records[i])];
    for (std::size_t i = 0; i < n; ++i) {
      if (!key[i].empty()) continue;
      const std::string a = attribute(records[i]);
      if (freq[a] >= 2) key[i] = std::string(1, rule) + '|' + a;
    }
  };
  cascade('1', [](const PurchaseRecord& r) { return r.category(); });
  cascade('2', [](const PurchaseRecord& r) { return r.item; });
  cascade('3', [](const PurchaseRecord& r) { return r.place; });

  std::unordered_map<std::string, std::size_t> ids;
  std::vector<std::size_t> raw(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string k = key[i].empty() ? "4|" + std::to_string(i) : key[i];
    raw[i] = ids.try_emplace(k, ids.size()).first->second;
  }
  return make_partition(raw);
}

std::string_view to_string(TTestVariant variant) noexcept {
  return variant == TTestVariant::Welch ? "welch" : "student";
}

TTestResult mean_difference_test(std::span<const double> a, std::span<const double> b,
                                 TTestVariant variant) {
  if (a.size() < 2 || b.size() < 2)
    throw Error(ErrorCode::EmptyInput, "each series needs at least two values");

  auto moments = [](std::span<const double> x) {
    const double n = static_cast<double>(x.size());
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return std::pair{mean, ss / (n - 1.0)};
  };
  const auto [mean_a, var_a] = moments(a);
  const auto [mean_b, var_b] = moments(b);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());

  TTestResult r;
  double se2 = 0.0;
  if (variant == TTestVariant::Welch) {
    const double qa = var_a / na, qb = var_b / nb;
    se2 = qa + qb;
    const double denom = qa * qa / (na - 1.0) + qb * qb / (nb - 1.0);
    r.df = denom > 0.0 ? se2 * se2 / denom : na + nb - 2.0;
  } else {
    r.df = na + nb - 2.0;
    const double pooled = ((na - 1.0) * var_a + (nb - 1.0) * var_b) / r.df;
    se2 = pooled * (1.0 / na + 1.0 / nb);
  }

  const double diff = mean_a - mean_b;
  if (se2 == 0.0) {
    if (diff == 0.0)
      throw Error(ErrorCode::DegenerateVariance, "both series are constant and equal");
    r.t = diff > 0 ? std::numeric_limits<double>::infinity()
                   : -std::numeric_limits<double>::infinity();
    r.p = 0.0;
    return r;
  }
  r.t = diff / std::sqrt(se2);
  const boost::math::students_t dist(r.df);
  r.p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t))));
  return r;
}

std::string_view to_string(Method method) noexcept {
  switch (method) {
    case Method::Rn: return "R_n";
    case Method::Responsiveness: return "responsiveness";
    case Method::GreedyQB: return "greedy_QB";
    case Method::GreedyQM: return "greedy_QM";
    case Method::GreedyQH: return "greedy_QH";
  }
  return "unknown";
}

const MethodSeries* EvalReport::find(Method method) const {
  for (const auto& s : series)
    if (s.method == method) return &s;
  return nullptr;
}

namespace {

std::size_t community_count(Method method, const std::vector<PurchaseRecord>& records,
                            const SweepConfig& config) {
  if (method == Method::Rn) return rn_partition(records).communities;
  std::vector<LabelPair> pairs;
  pairs.reserve(records.size());
  for (const auto& r : records) pairs.push_back(r.pair());
  switch (method) {
    case Method::Responsiveness:
      return responsiveness_pair_cluster(pairs, config.pipeline).partition.communities;
    case Method::GreedyQB:
      return greedy_optimize(graph_from_pairs(pairs), Measure::QB).communities();
    case Method::GreedyQM:
      return greedy_optimize(graph_from_pairs(pairs), Measure::QM).communities();
    case Method::GreedyQH:
      return greedy_optimize(graph_from_pairs(pairs), Measure::QH).communities();
    case Method::Rn: break;
  }
  return 0;
}

}  // namespace

EvalReport node_sweep(const std::vector<PurchaseRecord>& records, const SweepConfig& config) {
  if (config.step == 0 || records.size() < config.step)
    throw Error(ErrorCode::TooFewRecords, std::to_string(records.size()) +
                                              " records cannot fill one sweep step of " +
                                              std::to_string(config.step));
  EvalReport report;
  for (std::size_t n = config.step; n <= records.size(); n += config.step)
    report.node_counts.push_back(n);

  for (Method method : config.methods) {
    MethodSeries series{method, {}};
    for (std::size_t n : report.node_counts) {
      std::vector<PurchaseRecord> prefix(records.begin(), records.begin() + static_cast<std::ptrdiff_t>(n));
      series.counts.push_back(community_count(method, prefix, config));
    }
    report.series.push_back(std::move(series));
  }

  report.metadata = {{"step", config.step},
                     {"linkage", std::string(to_string(config.pipeline.method))},
                     {"cut", describe(config.pipeline.criterion)},
                     {"dims", config.pipeline.dims ? nlohmann::json(*config.pipeline.dims)
                                                   : nlohmann::json("all")},
                     {"qh_weight", "e_ij / max_k e_ik"},
                     {"optimizer", "greedy agglomerative, strict improvement"},
                     {"t_test", std::string(to_string(config.variant))},
                     {"t_test_series",
                      {std::string(to_string(config.test_a)), std::string(to_string(config.test_b))}}};

  const auto* a = report.find(config.test_a);
  const auto* b = report.find(config.test_b);
  if (a && b && report.node_counts.size() >= 2) {
    std::vector<double> xa(a->counts.begin(), a->counts.end());
    std::vector<double> xb(b->counts.begin(), b->counts.end());
    try {
      report.test = mean_difference_test(xa, xb, config.variant);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateVariance) throw;
      report.test = {0.0, 1.0, 0.0};
      report.metadata["t_test_note"] = "identical constant series";
    }
  } else {
    report.metadata["t_test_note"] = "not computed";
  }
  return report;
}

double mean_abs_gap(const EvalReport& report, Method method) {
  const auto* rn = report.find(Method::Rn);
  const auto* other = report.find(method);
  if (!rn || !other || rn->counts.empty())
    throw Error(ErrorCode::EmptyInput, "report lacks the requested series");
  double sum = 0.0;
  for (std::size_t s = 0; s < rn->counts.size(); ++s)
    sum += std::abs(static_cast<double>(other->counts[s]) - static_cast<double>(rn->counts[s]));
  return sum / static_cast<double>(rn->counts.size());
}

nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json series = nlohmann::json::object();
  for (const auto& s : report.series) series[std::string(to_string(s.method))] = s.counts;
  auto finite_or_string = [](double v) {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(v > 0 ? "inf" : "-inf");
  };
  return {{"node_counts", report.node_counts},
          {"series", series},
          {"t_statistic", finite_or_string(report.test.t)},
          {"p_value", report.test.p},
          {"degrees_of_freedom", report.test.df},
          {"metadata", report.metadata}};
}

void write_report_csv(std::ostream& out, const EvalReport& report) {
  csv::write_row(out, {"node_count", "method", "community_count"});
  for (std::size_t s = 0; s < report.node_counts.size(); ++s)
    for (const auto& series : report.series)
      csv::write_row(out, {std::to_string(report.node_counts[s]),
                           std::string(to_string(series.method)),
                           std::to_string(series.counts[s])});
}

std::vector<PurchaseRecord> synthetic_records(const SyntheticConfig& config, std::uint64_t seed) {
  if (config.groups == 0 || config.items < config.groups || config.places < config.groups ||
      config.cities < config.groups)
    throw Error(ErrorCode::BadShape, "every group needs at least one item, place and city");

  std::mt19937_64 rng(seed);
  auto below = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
  auto unit = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  auto pick = [&](std::size_t group, std::size_t total) {
    if (unit() < config.affinity) {
      const std::size_t lo = group * total / config.groups;
      const std::size_t hi = (group + 1) * total / config.groups;
      return lo + below(hi - lo);
    }
    return below(total);
  };
  auto name = [](const char* kind, std::size_t i) {
    std::string digits = std::to_string(i);
    return std::string(kind) + "-" + std::string(digits.size() < 3 ? 3 - digits.size() : 0, '0') + digits;
  };

  std::vector<PurchaseRecord> out;
  out.reserve(config.records);
  for (std::size_t r = 0; r < config.records; ++r) {
    const std::size_t g = below(config.groups);
    PurchaseRecord rec;
    rec.item = name("item", pick(g, config.items));
    rec.place = name("place", pick(g, config.places));
    rec.city = name("city", pick(g, config.cities));
    rec.source = r;
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace rpclust
