#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "rpclust/correspondence.hpp"
#include "rpclust/crosstab.hpp"

namespace rpclust {

enum class PartTag { Row, Col };

std::string_view to_string(PartTag tag) noexcept;

/// Row categories followed by column categories, one point per category.
struct PointCloud {
  Eigen::MatrixXd points;  // (m + n) x K
  std::vector<PartTag> tags;
  std::vector<std::string> labels;

  std::size_t size() const noexcept { return tags.size(); }
};

PointCloud joint_cloud(const CaEmbedding& emb);

/// Dense symmetric matrix of Euclidean distances with a zero diagonal.
class DistanceMatrix {
 public:
  /// Validates symmetry, non-negativity and the zero diagonal.
  explicit DistanceMatrix(Eigen::MatrixXd d);

  std::size_t size() const noexcept { return static_cast<std::size_t>(d_.rows()); }
  double operator()(std::size_t i, std::size_t j) const {
    return d_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  const Eigen::MatrixXd& matrix() const noexcept { return d_; }

 private:
  Eigen::MatrixXd d_;
};

DistanceMatrix pairwise_distances(const PointCloud& cloud);
DistanceMatrix pairwise_distances(const Eigen::MatrixXd& points);

enum class Linkage { Nearest, Furthest, GroupAverage, Ward };

std::string_view to_string(Linkage method) noexcept;
/// Accepts nearest|single, furthest|complete, average|group-average, ward.
std::optional<Linkage> parse_linkage(std::string_view name);

/// One agglomeration step. Leaves are clusters 0..n-1; merge s creates
/// cluster n + s. `left` is always the smaller id.
struct Merge {
  std::size_t left;
  std::size_t right;
  double height;
  std::size_t size;
};

struct Dendrogram {
  std::size_t leaves = 0;
  std::vector<Merge> merges;
  std::vector<std::string> labels;  // optional leaf metadata
  std::vector<PartTag> tags;
};

/// Agglomerative clustering with Lance-Williams updates.
///
/// Each step merges the pair of active clusters at minimum linkage distance;
/// exact ties go to the pair whose smaller id is lowest, then whose larger id
/// is lowest. For Ward the height is the increase in within-cluster sum of
/// squared deviations caused by the merge, which assumes `dist` is Euclidean.
Dendrogram linkage(const DistanceMatrix& dist, Linkage method);

struct Partition {
  std::vector<std::size_t> assignment;  // point -> community, dense ids
  std::size_t communities = 0;
};

/// Relabels arbitrary community keys to dense ids in order of first appearance.
Partition make_partition(const std::vector<std::size_t>& keys);

struct KClusters {
  std::size_t k;
};
struct HeightCut {
  double height;
};
struct LargestGap {};
using CutCriterion = std::variant<KClusters, HeightCut, LargestGap>;

std::string describe(const CutCriterion& criterion);
/// Accepts "largest-gap", "k=<n>" and "height=<h>".
std::optional<CutCriterion> parse_cut(std::string_view text);

/// Flat partition from a dendrogram. K_CLUSTERS(k) undoes the last k - 1
/// merges; HEIGHT(h) keeps the leading merges with height <= h; LARGEST_GAP
/// cuts inside the widest jump between consecutive merge heights and yields a
/// single community when the dendrogram has no positive gap.
Partition cut(const Dendrogram& dendro, const CutCriterion& criterion);

struct PipelineConfig {
  Linkage method = Linkage::Ward;
  CutCriterion criterion = LargestGap{};
  std::optional<Eigen::Index> dims;
};

struct PipelineResult {
  CrossTab crosstab;
  CaEmbedding embedding;
  PointCloud cloud;
  Dendrogram dendrogram;
  Partition partition;
};

/// crosstab -> CA embedding -> joint cloud -> distances -> linkage -> cut.
PipelineResult responsiveness_pair_cluster(const std::vector<LabelPair>& pairs,
                                           const PipelineConfig& config = {});

std::string to_dot(const Dendrogram& dendro);
nlohmann::json to_json(const Dendrogram& dendro);
Dendrogram dendrogram_from_json(const nlohmann::json& j);

/// Partition CSV rows: label, part_tag (ROW|COL), community.
struct PartitionRow {
  std::string label;
  PartTag tag;
  std::size_t community;
};

void write_partition_csv(std::ostream& out, const std::vector<PartitionRow>& rows);
std::vector<PartitionRow> read_partition_csv(std::istream& in);
std::vector<PartitionRow> partition_rows(const PointCloud& cloud, const Partition& partition);

}  // namespace rpclust
