#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rpclust/cluster.hpp"
#include "rpclust/crosstab.hpp"

namespace rpclust {

/// Strict two-mode multigraph. Nodes of part U are indexed 0..|U|-1 and nodes
/// of part V follow them, so the full vertex set is 0..|U|+|V|-1.
class BipartiteGraph {
 public:
  struct Edge {
    std::size_t u;
    std::size_t v;
    std::int64_t multiplicity;
  };

  BipartiteGraph(std::vector<std::string> u_labels, std::vector<std::string> v_labels,
                 std::vector<Edge> edges);

  std::size_t u_count() const noexcept { return u_labels_.size(); }
  std::size_t v_count() const noexcept { return v_labels_.size(); }
  std::size_t node_count() const noexcept { return u_count() + v_count(); }
  /// Total edge multiplicity m.
  std::int64_t edge_count() const noexcept { return m_; }

  const std::vector<std::string>& u_labels() const noexcept { return u_labels_; }
  const std::vector<std::string>& v_labels() const noexcept { return v_labels_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  std::int64_t u_degree(std::size_t u) const { return u_degree_[u]; }
  std::int64_t v_degree(std::size_t v) const { return v_degree_[v]; }
  /// Degree over the full vertex set.
  std::int64_t degree(std::size_t node) const;
  /// A_ij over the full vertex set: edge multiplicity across parts, 0 within a part.
  std::int64_t adjacency(std::size_t i, std::size_t j) const;

 private:
  std::vector<std::string> u_labels_;
  std::vector<std::string> v_labels_;
  std::vector<Edge> edges_;
  std::vector<std::int64_t> u_degree_;
  std::vector<std::int64_t> v_degree_;
  std::int64_t m_ = 0;
};

/// Throws NotBipartite naming the first label found on both sides and
/// EmptyInput for an empty list. Repeated pairs become edge multiplicity.
BipartiteGraph graph_from_pairs(const std::vector<LabelPair>& pairs);

/// Barber's modularity over an assignment of every node (U then V).
/// Throws UncoveredNode when the assignment does not cover the vertex set.
double modularity_qb(const BipartiteGraph& g, const std::vector<std::size_t>& community);

/// Edge fractions between row-side communities (over U) and column-side
/// communities (over V).
struct CommunityFractions {
  Eigen::MatrixXd e;       // |C_A| x |C_B|, sums to 1
  Eigen::VectorXd a_row;   // a_i = sum_j e_ij
  Eigen::VectorXd a_col;   // a_j = sum_i e_ij
};

/// Community ids on each side must be dense 0..c-1; throws EmptyCommunity
/// otherwise and UncoveredNode on a size mismatch.
CommunityFractions community_fractions(const BipartiteGraph& g,
                                       const std::vector<std::size_t>& c_a,
                                       const std::vector<std::size_t>& c_b);

/// Column matched to row-community i: largest e_ik; ties go to the column with
/// the larger term e_ik - a_i a_k, then to the lowest index.
std::size_t corresponding_column(const CommunityFractions& f, Eigen::Index i);

double modularity_qm(const CommunityFractions& f);
double modularity_qm(const BipartiteGraph& g, const std::vector<std::size_t>& c_a,
                     const std::vector<std::size_t>& c_b);

/// Correspondence weight used by Q^H: e_ij divided by the largest entry of
/// row i (1 on the matched column, proportional elsewhere, 0 for empty rows).
Eigen::MatrixXd correspondence_weights(const Eigen::MatrixXd& e);

double modularity_qh(const CommunityFractions& f);
double modularity_qh(const BipartiteGraph& g, const std::vector<std::size_t>& c_a,
                     const std::vector<std::size_t>& c_b);

enum class Measure { QB, QM, QH };

std::string_view to_string(Measure measure) noexcept;
std::optional<Measure> parse_measure(std::string_view name);

/// Result of a greedy optimization.
///
/// For QB one community may hold nodes of both parts and ids are shared. For
/// QM and QH each part has its own communities; `node_assignment()` numbers
/// the V-side communities after the U-side ones.
struct CommunityStructure {
  Measure measure = Measure::QB;
  std::vector<std::size_t> u_community;
  std::vector<std::size_t> v_community;
  std::size_t u_communities = 0;
  std::size_t v_communities = 0;
  double score = 0.0;

  std::vector<std::size_t> node_assignment() const;
  std::size_t communities() const;
};

/// Agglomerative greedy ascent from singletons. Every step takes the merge
/// with the largest strict improvement among communities that share an edge
/// (QB) or a neighbouring community (QM, QH); ties go to the lowest ids.
CommunityStructure greedy_optimize(const BipartiteGraph& g, Measure measure);

/// Partition CSV rows (same schema as the clustering output).
std::vector<PartitionRow> partition_rows(const BipartiteGraph& g, const CommunityStructure& cs);

/// r_ik = |N(i) & N(k)| / |N(k)| for U-side nodes: the share of k's
/// neighbours that i also references.
Eigen::MatrixXd co_reference_ratios(const BipartiteGraph& g);

struct WeakestPairResult {
  Eigen::MatrixXd dissimilarity;  // D^Hf, L1 distance between rows of r
  std::vector<double> ibrp;       // value before any split, then after each split
  Partition partition;
};

/// Divisive weakest-pair partitioning. A fragment is split around its most
/// dissimilar pair (members go to the nearer seed, the first seed on ties)
/// when that pair is more dissimilar than the average off-diagonal pair of
/// the whole input; every accepted split lowers the within-fragment IBRP.
WeakestPairResult weakest_pair(const Eigen::MatrixXd& r);

}  // namespace rpclust
