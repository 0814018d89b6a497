#include "rpclust/cluster.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "rpclust/csv.hpp"
#include "rpclust/error.hpp"

namespace rpclust {

std::string_view to_string(PartTag tag) noexcept { return tag == PartTag::Row ? "ROW" : "COL"; }

std::string_view to_string(Linkage method) noexcept {
  switch (method) {
    case Linkage::Nearest: return "nearest";
    case Linkage::Furthest: return "furthest";
    case Linkage::GroupAverage: return "average";
    case Linkage::Ward: return "ward";
  }
  return "unknown";
}

std::optional<Linkage> parse_linkage(std::string_view name) {
  if (name == "nearest" || name == "single") return Linkage::Nearest;
  if (name == "furthest" || name == "complete") return Linkage::Furthest;
  if (name == "average" || name == "group-average") return Linkage::GroupAverage;
  if (name == "ward") return Linkage::Ward;
  return std::nullopt;
}

PointCloud joint_cloud(const CaEmbedding& emb) {
  const Eigen::Index m = emb.row_scores.rows();
  const Eigen::Index n = emb.col_scores.rows();
  PointCloud cloud;
  cloud.points.resize(m + n, emb.dims());
  cloud.points.topRows(m) = emb.row_scores;
  cloud.points.bottomRows(n) = emb.col_scores;
  cloud.tags.assign(static_cast<std::size_t>(m), PartTag::Row);
  cloud.tags.insert(cloud.tags.end(), static_cast<std::size_t>(n), PartTag::Col);
  cloud.labels = emb.row_labels;
  cloud.labels.insert(cloud.labels.end(), emb.col_labels.begin(), emb.col_labels.end());
  return cloud;
}

DistanceMatrix::DistanceMatrix(Eigen::MatrixXd d) : d_(std::move(d)) {
  if (d_.rows() != d_.cols()) throw Error(ErrorCode::BadShape, "distance matrix is not square");
  for (Eigen::Index i = 0; i < d_.rows(); ++i) {
    if (d_(i, i) != 0.0) throw Error(ErrorCode::BadShape, "distance matrix has non-zero diagonal");
    for (Eigen::Index j = i + 1; j < d_.cols(); ++j) {
      if (!(d_(i, j) >= 0.0) || d_(i, j) != d_(j, i))
        throw Error(ErrorCode::BadShape, "distance matrix is not symmetric and non-negative");
    }
  }
}

DistanceMatrix pairwise_distances(const Eigen::MatrixXd& points) {
  const Eigen::Index n = points.rows();
  if (n == 0) throw Error(ErrorCode::EmptyInput, "point cloud is empty");
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double sq = 0.0;
      for (Eigen::Index s = 0; s < points.cols(); ++s) {
        const double diff = points(i, s) - points(j, s);
        sq += diff * diff;
      }
      d(i, j) = d(j, i) = std::sqrt(sq);
    }
  return DistanceMatrix(std::move(d));
}

DistanceMatrix pairwise_distances(const PointCloud& cloud) {
  return pairwise_distances(cloud.points);
}

namespace {

// Working state for the agglomeration. Clusters live in slots 0..n-1; a merge
// writes the new cluster into the slot of one parent and retires the other.
class Agglomerator {
 public:
  Agglomerator(const DistanceMatrix& dist, Linkage method)
      : method_(method), n_(dist.size()), d_(dist.matrix()), id_(n_), size_(n_, 1),
        active_(n_, true), nn_(n_), nn_dist_(n_) {
    if (method_ == Linkage::Ward) d_ = d_.cwiseAbs2() * 0.5;
    std::iota(id_.begin(), id_.end(), std::size_t{0});
    for (std::size_t s = 0; s < n_; ++s) refresh(s);
  }

  std::vector<Merge> run() {
    std::vector<Merge> merges;
    merges.reserve(n_ ? n_ - 1 : 0);
    for (std::size_t step = 0; step + 1 < n_; ++step) {
      std::size_t a = best_slot();
      std::size_t b = nn_[a];
      const double height = nn_dist_[a];
      if (id_[b] < id_[a]) std::swap(a, b);
      merges.push_back({id_[a], id_[b], height, size_[a] + size_[b]});
      join(a, b, n_ + step);
    }
    return merges;
  }

 private:
  bool better(double dist, std::size_t s, std::size_t t, double best_dist, std::size_t bs,
              std::size_t bt) const {
    if (dist != best_dist) return dist < best_dist;
    const auto lo = std::min(id_[s], id_[t]), hi = std::max(id_[s], id_[t]);
    const auto blo = std::min(id_[bs], id_[bt]), bhi = std::max(id_[bs], id_[bt]);
    return lo != blo ? lo < blo : hi < bhi;
  }

  void refresh(std::size_t s) {
    nn_[s] = s;
    nn_dist_[s] = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n_; ++t) {
      if (t == s || !active_[t]) continue;
      const double v = at(s, t);
      if (nn_[s] == s || better(v, s, t, nn_dist_[s], s, nn_[s])) {
        nn_[s] = t;
        nn_dist_[s] = v;
      }
    }
  }

  std::size_t best_slot() const {
    std::size_t best = n_;
    for (std::size_t s = 0; s < n_; ++s) {
      if (!active_[s] || nn_[s] == s) continue;
      if (best == n_ || better(nn_dist_[s], s, nn_[s], nn_dist_[best], best, nn_[best])) best = s;
    }
    return best;
  }

  double at(std::size_t s, std::size_t t) const {
    return d_(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t));
  }
  void set(std::size_t s, std::size_t t, double v) {
    d_(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)) = v;
    d_(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(s)) = v;
  }

  double lance_williams(std::size_t a, std::size_t b, std::size_t k) const {
    const double dka = at(k, a), dkb = at(k, b);
    const double na = static_cast<double>(size_[a]), nb = static_cast<double>(size_[b]);
    switch (method_) {
      case Linkage::Nearest: return std::min(dka, dkb);
      case Linkage::Furthest: return std::max(dka, dkb);
      case Linkage::GroupAverage: return (na * dka + nb * dkb) / (na + nb);
      case Linkage::Ward: {
        const double nk = static_cast<double>(size_[k]);
        return ((na + nk) * dka + (nb + nk) * dkb - nk * at(a, b)) / (na + nb + nk);
      }
    }
    return 0.0;
  }

  void join(std::size_t a, std::size_t b, std::size_t new_id) {
    for (std::size_t k = 0; k < n_; ++k) {
      if (!active_[k] || k == a || k == b) continue;
      set(a, k, lance_williams(a, b, k));
    }
    active_[b] = false;
    size_[a] += size_[b];
    id_[a] = new_id;

    refresh(a);
    for (std::size_t k = 0; k < n_; ++k) {
      if (!active_[k] || k == a) continue;
      if (nn_[k] == a || nn_[k] == b) {
        refresh(k);
      } else if (better(at(k, a), k, a, nn_dist_[k], k, nn_[k])) {
        nn_[k] = a;
        nn_dist_[k] = at(k, a);
      }
    }
  }

  Linkage method_;
  std::size_t n_;
  Eigen::MatrixXd d_;
  std::vector<std::size_t> id_;
  std::vector<std::size_t> size_;
  std::vector<bool> active_;
  std::vector<std::size_t> nn_;
  std::vector<double> nn_dist_;
};

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void attach(std::size_t child, std::size_t parent) { parent_[find(child)] = parent; }

 private:
  std::vector<std::size_t> parent_;
};

Partition apply_merges(const Dendrogram& dendro, std::size_t keep) {
  const std::size_t n = dendro.leaves;
  UnionFind uf(n + dendro.merges.size());
  for (std::size_t s = 0; s < keep; ++s) {
    uf.attach(dendro.merges[s].left, n + s);
    uf.attach(dendro.merges[s].right, n + s);
  }
  std::vector<std::size_t> roots(n);
  for (std::size_t i = 0; i < n; ++i) roots[i] = uf.find(i);
  return make_partition(roots);
}

std::string format_height(double h) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", h);
  return buf;
}

std::string dot_quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

Dendrogram linkage(const DistanceMatrix& dist, Linkage method) {
  Dendrogram dendro;
  dendro.leaves = dist.size();
  dendro.merges = Agglomerator(dist, method).run();
  return dendro;
}

Partition make_partition(const std::vector<std::size_t>& keys) {
  Partition p;
  p.assignment.resize(keys.size());
  std::unordered_map<std::size_t, std::size_t> dense;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    auto [it, inserted] = dense.try_emplace(keys[i], dense.size());
    p.assignment[i] = it->second;
  }
  p.communities = dense.size();
  return p;
}

std::string describe(const CutCriterion& criterion) {
  return std::visit(
      [](const auto& c) -> std::string {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, KClusters>) return "k=" + std::to_string(c.k);
        else if constexpr (std::is_same_v<T, HeightCut>) return "height=" + format_height(c.height);
        else return "largest-gap";
      },
      criterion);
}

std::optional<CutCriterion> parse_cut(std::string_view text) {
  if (text == "largest-gap") return LargestGap{};
  auto value_after = [&](std::string_view prefix) -> std::optional<std::string_view> {
    if (text.substr(0, prefix.size()) != prefix) return std::nullopt;
    return text.substr(prefix.size());
  };
  if (auto v = value_after("k=")) {
    std::size_t k = 0;
    auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), k);
    if (ec == std::errc() && ptr == v->data() + v->size()) return KClusters{k};
    return std::nullopt;
  }
  if (auto v = value_after("height=")) {
    try {
      std::size_t used = 0;
      double h = std::stod(std::string(*v), &used);
      if (used == v->size() && std::isfinite(h) && h >= 0.0) return HeightCut{h};
    } catch (const std::exception&) {
    }
  }
  return std::nullopt;
}

Partition cut(const Dendrogram& dendro, const CutCriterion& criterion) {
  const std::size_t n = dendro.leaves;
  const std::size_t total = dendro.merges.size();
  if (const auto* kc = std::get_if<KClusters>(&criterion)) {
    if (kc->k < 1 || kc->k > n)
      throw Error(ErrorCode::BadK, "k=" + std::to_string(kc->k) + " outside [1, " +
                                       std::to_string(n) + "]");
    return apply_merges(dendro, n - kc->k);
  }
  if (const auto* hc = std::get_if<HeightCut>(&criterion)) {
    std::size_t keep = 0;
    while (keep < total && dendro.merges[keep].height <= hc->height) ++keep;
    return apply_merges(dendro, keep);
  }
  if (total < 2) return apply_merges(dendro, total);
  std::size_t widest = 0;
  double widest_gap = 0.0;
  for (std::size_t s = 0; s + 1 < total; ++s) {
    const double gap = dendro.merges[s + 1].height - dendro.merges[s].height;
    if (gap > widest_gap) {
      widest_gap = gap;
      widest = s;
    }
  }
  if (widest_gap <= 0.0) return apply_merges(dendro, total);
  return apply_merges(dendro, widest + 1);
}

PipelineResult responsiveness_pair_cluster(const std::vector<LabelPair>& pairs,
                                           const PipelineConfig& config) {
  CrossTab ct = build_crosstab(pairs);
  CaEmbedding emb = ca_embed(ct, config.dims);
  PointCloud cloud = joint_cloud(emb);
  Dendrogram dendro = linkage(pairwise_distances(cloud), config.method);
  dendro.labels = cloud.labels;
  dendro.tags = cloud.tags;
  Partition partition = cut(dendro, config.criterion);
  return {std::move(ct), std::move(emb), std::move(cloud), std::move(dendro),
          std::move(partition)};
}

std::string to_dot(const Dendrogram& dendro) {
  std::ostringstream out;
  out << "digraph dendrogram {\n";
  out << "  node [shape=box];\n";
  for (std::size_t i = 0; i < dendro.leaves; ++i) {
    std::string label = i < dendro.labels.size() ? dendro.labels[i] : std::to_string(i);
    out << "  n" << i << " [label=" << dot_quote(label);
    if (i < dendro.tags.size()) out << ", group=" << to_string(dendro.tags[i]);
    out << "];\n";
  }
  for (std::size_t s = 0; s < dendro.merges.size(); ++s) {
    const auto& m = dendro.merges[s];
    const std::size_t id = dendro.leaves + s;
    out << "  n" << id << " [shape=point, xlabel=" << dot_quote(format_height(m.height))
        << "];\n";
    out << "  n" << id << " -> n" << m.left << ";\n";
    out << "  n" << id << " -> n" << m.right << ";\n";
  }
  out << "}\n";
  return out.str();
}

nlohmann::json to_json(const Dendrogram& dendro) {
  nlohmann::json merges = nlohmann::json::array();
  for (const auto& m : dendro.merges)
    merges.push_back({{"left", m.left}, {"right", m.right}, {"height", m.height}, {"size", m.size}});
  nlohmann::json tags = nlohmann::json::array();
  for (auto t : dendro.tags) tags.push_back(std::string(to_string(t)));
  return {{"leaves", dendro.leaves}, {"labels", dendro.labels}, {"tags", tags}, {"merges", merges}};
}

Dendrogram dendrogram_from_json(const nlohmann::json& j) {
  try {
    Dendrogram d;
    d.leaves = j.at("leaves").get<std::size_t>();
    if (j.contains("labels")) d.labels = j.at("labels").get<std::vector<std::string>>();
    if (j.contains("tags"))
      for (const auto& t : j.at("tags")) d.tags.push_back(t.get<std::string>() == "ROW" ? PartTag::Row : PartTag::Col);
    for (const auto& m : j.at("merges"))
      d.merges.push_back({m.at("left").get<std::size_t>(), m.at("right").get<std::size_t>(),
                          m.at("height").get<double>(), m.at("size").get<std::size_t>()});
    if (d.leaves > 0 && d.merges.size() != d.leaves - 1)
      throw Error(ErrorCode::BadShape, "dendrogram must have leaves - 1 merges");
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadFormat, std::string("dendrogram JSON: ") + e.what());
  }
}

void write_partition_csv(std::ostream& out, const std::vector<PartitionRow>& rows) {
  csv::write_row(out, {"label", "part_tag", "community"});
  for (const auto& r : rows)
    csv::write_row(out, {r.label, std::string(to_string(r.tag)), std::to_string(r.community)});
}

std::vector<PartitionRow> read_partition_csv(std::istream& in) {
  auto rows = csv::read(in);
  std::vector<PartitionRow> out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (r == 0 && !row.empty() && row[0] == "label") continue;
    if (row.size() != 3 || (row[1] != "ROW" && row[1] != "COL"))
      throw Error(ErrorCode::BadFormat, "partition CSV row " + std::to_string(r + 1) +
                                            " must be label,ROW|COL,community");
    std::size_t community = 0;
    auto [ptr, ec] = std::from_chars(row[2].data(), row[2].data() + row[2].size(), community);
    if (ec != std::errc() || ptr != row[2].data() + row[2].size())
      throw Error(ErrorCode::BadFormat, "partition CSV row " + std::to_string(r + 1) +
                                            " has a non-integer community");
    out.push_back({row[0], row[1] == "ROW" ? PartTag::Row : PartTag::Col, community});
  }
  return out;
}

std::vector<PartitionRow> partition_rows(const PointCloud& cloud, const Partition& partition) {
  std::vector<PartitionRow> rows;
  rows.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i)
    rows.push_back({cloud.labels[i], cloud.tags[i], partition.assignment[i]});
  return rows;
}

}  // namespace rpclust
