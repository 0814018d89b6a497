#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "rpclust/crosstab.hpp"

namespace rpclust {

/// Correspondence-analysis embedding of both sides of a contingency table.
///
/// Scores are principal coordinates on the K leading axes: rows get
/// z_ik = u_ik * sigma_k / sqrt(p_i+), columns get z_jk = v_jk * sigma_k / sqrt(p_+j),
/// so row-to-row, column-to-column and row-to-column distances all live in one
/// space (symmetric map).
struct CaEmbedding {
  Eigen::VectorXd singular_values;  // K, non-increasing
  Eigen::MatrixXd row_scores;       // m x K
  Eigen::MatrixXd col_scores;       // n x K
  Eigen::VectorXd row_masses;       // p_i+
  Eigen::VectorXd col_masses;       // p_+j
  /// Sum of squared singular values over every non-trivial axis, retained or not.
  double total_inertia = 0.0;
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;

  Eigen::Index dims() const noexcept { return singular_values.size(); }
};

/// x_ij = p_ij / (p_i+ sqrt(p_+j)) - sqrt(p_+j), the row-standardized matrix.
Eigen::MatrixXd standardized_matrix(const CrossTab& ct);
/// x*_ij = p_ij / (p_+j sqrt(p_i+)) - sqrt(p_i+), the column-side analogue (m x n).
Eigen::MatrixXd standardized_matrix_columns(const CrossTab& ct);
/// S_ij = (p_ij - p_i+ p_+j) / sqrt(p_i+ p_+j); its SVD drives the embedding.
Eigen::MatrixXd standardized_residuals(const CrossTab& ct);

/// Largest number of non-trivial axes the table supports: min(m, n) - 1.
Eigen::Index max_dims(const CrossTab& ct) noexcept;

/// Embeds the table on `dims` axes (all non-trivial axes when empty).
/// Throws DimensionTooLarge when dims exceeds max_dims(ct) and BadShape when
/// dims is zero.
CaEmbedding ca_embed(const CrossTab& ct, std::optional<Eigen::Index> dims = std::nullopt);

/// Chi-square statistic divided by the grand total, by direct summation.
double total_inertia(const CrossTab& ct);

nlohmann::json to_json(const CaEmbedding& emb);

}  // namespace rpclust
