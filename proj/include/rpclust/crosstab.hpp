#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace rpclust {

/// One observation of the two-mode data: a purchase category and the region
/// it was observed in.
struct LabelPair {
  std::string row;
  std::string col;

  friend bool operator==(const LabelPair&, const LabelPair&) = default;
};

using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// m x n contingency table of non-negative counts with cached marginals.
///
/// Construction rejects empty tables and any row or column whose marginal is
/// zero, so every profile and standardization downstream is well defined.
class CrossTab {
 public:
  CrossTab(std::vector<std::string> row_labels, std::vector<std::string> col_labels,
           CountMatrix counts);

  Eigen::Index rows() const noexcept { return counts_.rows(); }
  Eigen::Index cols() const noexcept { return counts_.cols(); }

  const std::vector<std::string>& row_labels() const noexcept { return row_labels_; }
  const std::vector<std::string>& col_labels() const noexcept { return col_labels_; }
  const CountMatrix& counts() const noexcept { return counts_; }

  std::int64_t count(Eigen::Index i, Eigen::Index j) const { return counts_(i, j); }
  std::int64_t row_sum(Eigen::Index i) const { return row_sums_(i); }
  std::int64_t col_sum(Eigen::Index j) const { return col_sums_(j); }
  std::int64_t grand_total() const noexcept { return total_; }

  /// p_ij = f_ij / f_++
  Eigen::MatrixXd probabilities() const;
  /// p_i+
  Eigen::VectorXd row_masses() const;
  /// p_+j
  Eigen::VectorXd col_masses() const;

 private:
  std::vector<std::string> row_labels_;
  std::vector<std::string> col_labels_;
  CountMatrix counts_;
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1> row_sums_;
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1> col_sums_;
  std::int64_t total_ = 0;
};

/// Row profiles q_ij = p_ij / p_i+ and column profiles q*_ij = p_ij / p_+j,
/// both stored m x n.
struct ProfileSet {
  Eigen::MatrixXd row_profiles;
  Eigen::MatrixXd col_profiles;
};

struct RestrictionReport {
  bool violation = false;
  /// Labels seen on both sides, in order of first appearance on the row side.
  std::vector<std::string> offenders;
};

/// Accumulates pair occurrences; labels are ordered by first appearance.
/// Throws EmptyInput for an empty list and BadFormat for an empty label.
CrossTab build_crosstab(const std::vector<LabelPair>& pairs);

ProfileSet profiles(const CrossTab& ct);

/// Detects data that is not strictly two-mode: any label occurring in both
/// the row column and the column column of the pair list.
RestrictionReport check_link_restriction(const std::vector<LabelPair>& pairs);

/// Reads two-column pair CSV. A first row of "category,city", "row,col" or
/// "item,place" (case-insensitive) is treated as a header and skipped.
std::vector<LabelPair> read_pairs_csv(std::istream& in);
void write_pairs_csv(std::ostream& out, const std::vector<LabelPair>& pairs);

nlohmann::json to_json(const CrossTab& ct);
CrossTab crosstab_from_json(const nlohmann::json& j);

}  // namespace rpclust
