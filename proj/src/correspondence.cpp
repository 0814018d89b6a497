#include "rpclust/correspondence.hpp"

#include <algorithm>
#include <cmath>

#include "rpclust/error.hpp"

namespace rpclust {

namespace {

// Axes whose singular value falls under either bound are reported as zero.
constexpr double kRelativeAxisTolerance = 1e-10;
constexpr double kAbsoluteAxisTolerance = 1e-12;

// Flip so the entry of largest magnitude (first one on ties) is positive.
bool needs_flip(const Eigen::VectorXd& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (std::abs(v(i)) > std::abs(v(best))) best = i;
  return v.size() > 0 && v(best) < 0.0;
}

}  // namespace

Eigen::MatrixXd standardized_matrix(const CrossTab& ct) {
  const Eigen::MatrixXd p = ct.probabilities();
  const Eigen::VectorXd r = ct.row_masses();
  const Eigen::VectorXd c = ct.col_masses();
  Eigen::MatrixXd x(ct.rows(), ct.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double sc = std::sqrt(c(j));
      x(i, j) = p(i, j) / (r(i) * sc) - sc;
    }
  return x;
}

Eigen::MatrixXd standardized_matrix_columns(const CrossTab& ct) {
  const Eigen::MatrixXd p = ct.probabilities();
  const Eigen::VectorXd r = ct.row_masses();
  const Eigen::VectorXd c = ct.col_masses();
  Eigen::MatrixXd x(ct.rows(), ct.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double sr = std::sqrt(r(i));
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = p(i, j) / (c(j) * sr) - sr;
  }
  return x;
}

Eigen::MatrixXd standardized_residuals(const CrossTab& ct) {
  const Eigen::MatrixXd p = ct.probabilities();
  const Eigen::VectorXd r = ct.row_masses();
  const Eigen::VectorXd c = ct.col_masses();
  Eigen::MatrixXd s(ct.rows(), ct.cols());
  for (Eigen::Index i = 0; i < s.rows(); ++i)
    for (Eigen::Index j = 0; j < s.cols(); ++j) {
      const double e = r(i) * c(j);
      s(i, j) = (p(i, j) - e) / std::sqrt(e);
    }
  return s;
}

Eigen::Index max_dims(const CrossTab& ct) noexcept {
  return std::min(ct.rows(), ct.cols()) - 1;
}

CaEmbedding ca_embed(const CrossTab& ct, std::optional<Eigen::Index> dims) {
  const Eigen::Index limit = max_dims(ct);
  Eigen::Index k = dims.value_or(limit);
  if (dims) {
    if (*dims <= 0) throw Error(ErrorCode::BadShape, "embedding dimension must be positive");
    if (*dims > limit)
      throw Error(ErrorCode::DimensionTooLarge,
                  "requested " + std::to_string(*dims) + " axes but the table supports at most " +
                      std::to_string(limit));
  }

  CaEmbedding emb;
  emb.row_labels = ct.row_labels();
  emb.col_labels = ct.col_labels();
  emb.row_masses = ct.row_masses();
  emb.col_masses = ct.col_masses();
  emb.singular_values = Eigen::VectorXd::Zero(k);
  emb.row_scores = Eigen::MatrixXd::Zero(ct.rows(), k);
  emb.col_scores = Eigen::MatrixXd::Zero(ct.cols(), k);

  const Eigen::MatrixXd s = standardized_residuals(ct);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(s, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sigma = svd.singularValues();

  // The trivial axis of CA is already projected out of S, so every singular
  // value past min(m, n) - 1 is numerically zero; only those up to the limit
  // count toward the inertia.
  emb.total_inertia = sigma.head(limit).squaredNorm();

  const double cutoff =
      std::max(kAbsoluteAxisTolerance, kRelativeAxisTolerance * (sigma.size() ? sigma(0) : 0.0));
  const Eigen::VectorXd inv_sqrt_r = emb.row_masses.cwiseSqrt().cwiseInverse();
  const Eigen::VectorXd inv_sqrt_c = emb.col_masses.cwiseSqrt().cwiseInverse();

  for (Eigen::Index a = 0; a < k; ++a) {
    if (sigma(a) < cutoff) break;
    Eigen::VectorXd u = svd.matrixU().col(a);
    Eigen::VectorXd v = svd.matrixV().col(a);
    if (needs_flip(u)) {
      u = -u;
      v = -v;
    }
    emb.singular_values(a) = sigma(a);
    emb.row_scores.col(a) = inv_sqrt_r.cwiseProduct(u) * sigma(a);
    emb.col_scores.col(a) = inv_sqrt_c.cwiseProduct(v) * sigma(a);
  }
  return emb;
}

double total_inertia(const CrossTab& ct) {
  const double n = static_cast<double>(ct.grand_total());
  double chi2 = 0.0;
  for (Eigen::Index i = 0; i < ct.rows(); ++i)
    for (Eigen::Index j = 0; j < ct.cols(); ++j) {
      const double expected =
          static_cast<double>(ct.row_sum(i)) * static_cast<double>(ct.col_sum(j)) / n;
      const double diff = static_cast<double>(ct.count(i, j)) - expected;
      chi2 += diff * diff / expected;
    }
  return chi2 / n;
}

nlohmann::json to_json(const CaEmbedding& emb) {
  auto matrix_json = [](const Eigen::MatrixXd& m) {
    nlohmann::json out = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
      out.push_back(std::move(row));
    }
    return out;
  };
  std::vector<double> sv(emb.singular_values.data(),
                         emb.singular_values.data() + emb.singular_values.size());
  return {{"singular_values", sv},
          {"total_inertia", emb.total_inertia},
          {"row_scores", matrix_json(emb.row_scores)},
          {"col_scores", matrix_json(emb.col_scores)},
          {"labels", {{"rows", emb.row_labels}, {"cols", emb.col_labels}}}};
}

}  // namespace rpclust
