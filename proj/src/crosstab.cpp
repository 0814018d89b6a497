#include "rpclust/crosstab.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "rpclust/csv.hpp"
#include "rpclust/error.hpp"

namespace rpclust {

namespace {

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool is_pair_header(const csv::Row& row) {
  if (row.size() != 2) return false;
  std::string a = lowercase(row[0]), b = lowercase(row[1]);
  return (a == "category" && b == "city") || (a == "row" && b == "col") ||
         (a == "item" && b == "place");
}

void check_unique(const std::vector<std::string>& labels, const char* side) {
  std::unordered_set<std::string> seen;
  for (const auto& l : labels) {
    if (!seen.insert(l).second)
      throw Error(ErrorCode::BadShape, std::string("duplicate ") + side + " label '" + l + "'");
  }
}

}  // namespace

CrossTab::CrossTab(std::vector<std::string> row_labels, std::vector<std::string> col_labels,
                   CountMatrix counts)
    : row_labels_(std::move(row_labels)), col_labels_(std::move(col_labels)),
      counts_(std::move(counts)) {
  if (counts_.rows() == 0 || counts_.cols() == 0)
    throw Error(ErrorCode::EmptyInput, "contingency table has no cells");
  if (static_cast<Eigen::Index>(row_labels_.size()) != counts_.rows() ||
      static_cast<Eigen::Index>(col_labels_.size()) != counts_.cols())
    throw Error(ErrorCode::BadShape, "label count does not match table shape");
  check_unique(row_labels_, "row");
  check_unique(col_labels_, "column");
  if ((counts_.array() < 0).any())
    throw Error(ErrorCode::BadShape, "negative count in contingency table");

  row_sums_ = counts_.rowwise().sum();
  col_sums_ = counts_.colwise().sum().transpose();
  total_ = row_sums_.sum();

  std::string orphans;
  for (Eigen::Index i = 0; i < rows(); ++i)
    if (row_sums_(i) == 0) orphans += " row '" + row_labels_[i] + "'";
  for (Eigen::Index j = 0; j < cols(); ++j)
    if (col_sums_(j) == 0) orphans += " column '" + col_labels_[j] + "'";
  if (!orphans.empty())
    throw Error(ErrorCode::ZeroMarginal, "zero marginal for" + orphans);
}

Eigen::MatrixXd CrossTab::probabilities() const {
  return counts_.cast<double>() / static_cast<double>(total_);
}

Eigen::VectorXd CrossTab::row_masses() const {
  return row_sums_.cast<double>() / static_cast<double>(total_);
}

Eigen::VectorXd CrossTab::col_masses() const {
  return col_sums_.cast<double>() / static_cast<double>(total_);
}

CrossTab build_crosstab(const std::vector<LabelPair>& pairs) {
  if (pairs.empty()) throw Error(ErrorCode::EmptyInput, "no label pairs");

  std::vector<std::string> row_labels, col_labels;
  std::unordered_map<std::string, Eigen::Index> row_index, col_index;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> cells;
  cells.reserve(pairs.size());

  auto intern = [](const std::string& label, std::vector<std::string>& labels,
                   std::unordered_map<std::string, Eigen::Index>& index) {
    auto [it, inserted] = index.try_emplace(label, static_cast<Eigen::Index>(labels.size()));
    if (inserted) labels.push_back(label);
    return it->second;
  };

  for (const auto& p : pairs) {
    if (p.row.empty() || p.col.empty())
      throw Error(ErrorCode::BadFormat, "empty label in pair list");
    cells.emplace_back(intern(p.row, row_labels, row_index), intern(p.col, col_labels, col_index));
  }

  CountMatrix counts = CountMatrix::Zero(static_cast<Eigen::Index>(row_labels.size()),
                                         static_cast<Eigen::Index>(col_labels.size()));
  for (auto [i, j] : cells) ++counts(i, j);
  return CrossTab(std::move(row_labels), std::move(col_labels), std::move(counts));
}

ProfileSet profiles(const CrossTab& ct) {
  const Eigen::MatrixXd p = ct.probabilities();
  const Eigen::VectorXd r = ct.row_masses();
  const Eigen::VectorXd c = ct.col_masses();
  ProfileSet out;
  out.row_profiles = r.cwiseInverse().asDiagonal() * p;
  out.col_profiles = p * c.cwiseInverse().asDiagonal();
  return out;
}

RestrictionReport check_link_restriction(const std::vector<LabelPair>& pairs) {
  std::unordered_set<std::string> cols;
  for (const auto& p : pairs) cols.insert(p.col);

  RestrictionReport report;
  std::unordered_set<std::string> reported;
  for (const auto& p : pairs) {
    if (cols.count(p.row) && reported.insert(p.row).second) report.offenders.push_back(p.row);
  }
  report.violation = !report.offenders.empty();
  return report;
}

std::vector<LabelPair> read_pairs_csv(std::istream& in) {
  auto rows = csv::read(in);
  std::vector<LabelPair> pairs;
  pairs.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (r == 0 && is_pair_header(rows[r])) continue;
    if (rows[r].size() != 2)
      throw Error(ErrorCode::BadFormat, "pair CSV row " + std::to_string(r + 1) + " has " +
                                            std::to_string(rows[r].size()) + " fields, expected 2");
    pairs.push_back({rows[r][0], rows[r][1]});
  }
  return pairs;
}

void write_pairs_csv(std::ostream& out, const std::vector<LabelPair>& pairs) {
  csv::write_row(out, {"category", "city"});
  for (const auto& p : pairs) csv::write_row(out, {p.row, p.col});
}

nlohmann::json to_json(const CrossTab& ct) {
  nlohmann::json counts = nlohmann::json::array();
  for (Eigen::Index i = 0; i < ct.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < ct.cols(); ++j) row.push_back(ct.count(i, j));
    counts.push_back(std::move(row));
  }
  return {{"row_labels", ct.row_labels()}, {"col_labels", ct.col_labels()}, {"counts", counts}};
}

CrossTab crosstab_from_json(const nlohmann::json& j) {
  try {
    auto rows = j.at("row_labels").get<std::vector<std::string>>();
    auto cols = j.at("col_labels").get<std::vector<std::string>>();
    const auto& counts_json = j.at("counts");
    if (counts_json.size() != rows.size())
      throw Error(ErrorCode::BadShape, "counts has wrong number of rows");
    CountMatrix counts(static_cast<Eigen::Index>(rows.size()),
                       static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& row = counts_json.at(i);
      if (row.size() != cols.size())
        throw Error(ErrorCode::BadShape, "counts row " + std::to_string(i) + " has wrong length");
      for (std::size_t c = 0; c < cols.size(); ++c)
        counts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
            row.at(c).get<std::int64_t>();
    }
    return CrossTab(std::move(rows), std::move(cols), std::move(counts));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadFormat, std::string("crosstab JSON: ") + e.what());
  }
}

}  // namespace rpclust
