#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rpclust/cluster.hpp"
#include "rpclust/ingest.hpp"
#include "rpclust/modularity.hpp"

namespace rpclust {

/// Reference community division over purchase records, applied as a strict
/// cascade: (1) records sharing "item _ place", then among the rest (2) records
/// sharing the item, then among the rest (3) records sharing the place, and
/// (4) singletons for whatever is left. A rule only groups two or more records.
Partition rn_partition(const std::vector<PurchaseRecord>& records);

enum class TTestVariant { Welch, Student };

std::string_view to_string(TTestVariant variant) noexcept;

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
  double df = 0.0;
};

/// Two-sample test on the difference of means with a two-sided p-value.
/// Throws EmptyInput when a series has fewer than two values and
/// DegenerateVariance when both series are constant with equal means.
TTestResult mean_difference_test(std::span<const double> a, std::span<const double> b,
                                 TTestVariant variant = TTestVariant::Welch);

enum class Method { Rn, Responsiveness, GreedyQB, GreedyQM, GreedyQH };

std::string_view to_string(Method method) noexcept;

struct SweepConfig {
  std::size_t step = 100;
  std::vector<Method> methods{Method::Rn, Method::Responsiveness, Method::GreedyQH};
  /// Ward with a fixed height cut; LARGEST_GAP collapses to a few communities
  /// and cannot follow the growth of the reference counts.
  PipelineConfig pipeline{Linkage::Ward, HeightCut{1.0}, std::nullopt};
  /// The two series compared by the t-test.
  Method test_a = Method::Responsiveness;
  Method test_b = Method::GreedyQH;
  TTestVariant variant = TTestVariant::Welch;
};

struct MethodSeries {
  Method method;
  std::vector<std::size_t> counts;
};

struct EvalReport {
  std::vector<std::size_t> node_counts;
  std::vector<MethodSeries> series;
  TTestResult test;
  nlohmann::json metadata;

  const MethodSeries* find(Method method) const;
};

/// Community counts per method on the prefixes step, 2 step, ... of
/// `records` (input order). Throws TooFewRecords when fewer than one step.
EvalReport node_sweep(const std::vector<PurchaseRecord>& records, const SweepConfig& config = {});

/// Mean absolute gap between a method's counts and the R_n counts.
double mean_abs_gap(const EvalReport& report, Method method);

nlohmann::json to_json(const EvalReport& report);
/// Rows of node_count, method, community_count.
void write_report_csv(std::ostream& out, const EvalReport& report);

/// Purchase data with planted regional taste groups. Each group owns a block
/// of cities, items and places; a record draws its group, then with
/// probability `affinity` each attribute from the group's own block and
/// otherwise uniformly. Deterministic for a given seed on every platform.
struct SyntheticConfig {
  std::size_t records = 700;
  std::size_t groups = 6;
  std::size_t items = 48;
  std::size_t places = 12;
  std::size_t cities = 30;
  double affinity = 0.9;
};

std::vector<PurchaseRecord> synthetic_records(const SyntheticConfig& config, std::uint64_t seed);

}  // namespace rpclust
