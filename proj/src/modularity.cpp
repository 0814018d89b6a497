#include "rpclust/modularity.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "rpclust/error.hpp"

namespace rpclust {

BipartiteGraph::BipartiteGraph(std::vector<std::string> u_labels,
                               std::vector<std::string> v_labels, std::vector<Edge> edges)
    : u_labels_(std::move(u_labels)), v_labels_(std::move(v_labels)), edges_(std::move(edges)),
      u_degree_(u_labels_.size(), 0), v_degree_(v_labels_.size(), 0) {
  if (edges_.empty()) throw Error(ErrorCode::EmptyInput, "bipartite graph has no edges");
  for (const auto& e : edges_) {
    if (e.u >= u_labels_.size() || e.v >= v_labels_.size() || e.multiplicity <= 0)
      throw Error(ErrorCode::BadShape, "edge endpoint out of range or non-positive multiplicity");
    u_degree_[e.u] += e.multiplicity;
    v_degree_[e.v] += e.multiplicity;
    m_ += e.multiplicity;
  }
}

std::int64_t BipartiteGraph::degree(std::size_t node) const {
  return node < u_count() ? u_degree_[node] : v_degree_[node - u_count()];
}

std::int64_t BipartiteGraph::adjacency(std::size_t i, std::size_t j) const {
  const bool iu = i < u_count(), ju = j < u_count();
  if (iu == ju) return 0;
  const std::size_t u = iu ? i : j;
  const std::size_t v = (iu ? j : i) - u_count();
  std::int64_t a = 0;
  for (const auto& e : edges_)
    if (e.u == u && e.v == v) a += e.multiplicity;
  return a;
}

BipartiteGraph graph_from_pairs(const std::vector<LabelPair>& pairs) {
  if (pairs.empty()) throw Error(ErrorCode::EmptyInput, "no label pairs");
  auto report = check_link_restriction(pairs);
  if (report.violation)
    throw Error(ErrorCode::NotBipartite,
                "label '" + report.offenders.front() + "' appears on both sides");

  std::vector<std::string> u_labels, v_labels;
  std::unordered_map<std::string, std::size_t> u_index, v_index;
  std::map<std::pair<std::size_t, std::size_t>, std::int64_t> mult;
  std::vector<std::pair<std::size_t, std::size_t>> order;
  for (const auto& p : pairs) {
    auto [ui, u_new] = u_index.try_emplace(p.row, u_labels.size());
    if (u_new) u_labels.push_back(p.row);
    auto [vi, v_new] = v_index.try_emplace(p.col, v_labels.size());
    if (v_new) v_labels.push_back(p.col);
    auto key = std::make_pair(ui->second, vi->second);
    if (mult[key]++ == 0) order.push_back(key);
  }
  std::vector<BipartiteGraph::Edge> edges;
  edges.reserve(order.size());
  for (auto key : order) edges.push_back({key.first, key.second, mult[key]});
  return BipartiteGraph(std::move(u_labels), std::move(v_labels), std::move(edges));
}

double modularity_qb(const BipartiteGraph& g, const std::vector<std::size_t>& community) {
  if (community.size() != g.node_count())
    throw Error(ErrorCode::UncoveredNode, "assignment covers " + std::to_string(community.size()) +
                                              " of " + std::to_string(g.node_count()) + " nodes");
  const double m = static_cast<double>(g.edge_count());
  std::unordered_map<std::size_t, std::pair<double, double>> degree_sums;
  for (std::size_t u = 0; u < g.u_count(); ++u)
    degree_sums[community[u]].first += static_cast<double>(g.u_degree(u));
  for (std::size_t v = 0; v < g.v_count(); ++v)
    degree_sums[community[g.u_count() + v]].second += static_cast<double>(g.v_degree(v));

  double inside = 0.0;
  for (const auto& e : g.edges())
    if (community[e.u] == community[g.u_count() + e.v]) inside += static_cast<double>(e.multiplicity);
  double expected = 0.0;
  for (const auto& [c, sums] : degree_sums) expected += sums.first * sums.second;
  return inside / m - expected / (m * m);
}

namespace {

std::size_t dense_count(const std::vector<std::size_t>& ids, const char* side) {
  if (ids.empty()) return 0;
  const std::size_t c = *std::max_element(ids.begin(), ids.end()) + 1;
  std::vector<bool> used(c, false);
  for (auto id : ids) used[id] = true;
  for (std::size_t k = 0; k < c; ++k)
    if (!used[k])
      throw Error(ErrorCode::EmptyCommunity,
                  std::string(side) + " community " + std::to_string(k) + " has no members");
  return c;
}

}  // namespace

CommunityFractions community_fractions(const BipartiteGraph& g,
                                       const std::vector<std::size_t>& c_a,
                                       const std::vector<std::size_t>& c_b) {
  if (c_a.size() != g.u_count() || c_b.size() != g.v_count())
    throw Error(ErrorCode::UncoveredNode, "community assignment does not match the graph parts");
  const std::size_t na = dense_count(c_a, "row-side");
  const std::size_t nb = dense_count(c_b, "column-side");
  CommunityFractions f;
  f.e = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(na), static_cast<Eigen::Index>(nb));
  const double m = static_cast<double>(g.edge_count());
  for (const auto& e : g.edges())
    f.e(static_cast<Eigen::Index>(c_a[e.u]), static_cast<Eigen::Index>(c_b[e.v])) +=
        static_cast<double>(e.multiplicity) / m;
  f.a_row = f.e.rowwise().sum();
  f.a_col = f.e.colwise().sum().transpose();
  return f;
}

std::size_t corresponding_column(const CommunityFractions& f, Eigen::Index i) {
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < f.e.cols(); ++k) {
    const double ek = f.e(i, k), eb = f.e(i, best);
    if (ek > eb || (ek == eb && f.a_col(k) < f.a_col(best))) best = k;
  }
  return static_cast<std::size_t>(best);
}

double modularity_qm(const CommunityFractions& f) {
  double q = 0.0;
  for (Eigen::Index i = 0; i < f.e.rows(); ++i) {
    const auto j = static_cast<Eigen::Index>(corresponding_column(f, i));
    q += f.e(i, j) - f.a_row(i) * f.a_col(j);
  }
  return q;
}

double modularity_qm(const BipartiteGraph& g, const std::vector<std::size_t>& c_a,
                     const std::vector<std::size_t>& c_b) {
  return modularity_qm(community_fractions(g, c_a, c_b));
}

Eigen::MatrixXd correspondence_weights(const Eigen::MatrixXd& e) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(e.rows(), e.cols());
  for (Eigen::Index i = 0; i < e.rows(); ++i) {
    const double top = e.cols() ? e.row(i).maxCoeff() : 0.0;
    if (top > 0.0) w.row(i) = e.row(i) / top;
  }
  return w;
}

double modularity_qh(const CommunityFractions& f) {
  const Eigen::MatrixXd w = correspondence_weights(f.e);
  double q = 0.0;
  for (Eigen::Index i = 0; i < f.e.rows(); ++i)
    for (Eigen::Index j = 0; j < f.e.cols(); ++j)
      q += w(i, j) * (f.e(i, j) - f.a_row(i) * f.a_col(j));
  return q;
}

double modularity_qh(const BipartiteGraph& g, const std::vector<std::size_t>& c_a,
                     const std::vector<std::size_t>& c_b) {
  return modularity_qh(community_fractions(g, c_a, c_b));
}

std::string_view to_string(Measure measure) noexcept {
  switch (measure) {
    case Measure::QB: return "qb";
    case Measure::QM: return "qm";
    case Measure::QH: return "qh";
  }
  return "unknown";
}

std::optional<Measure> parse_measure(std::string_view name) {
  if (name == "qb" || name == "QB") return Measure::QB;
  if (name == "qm" || name == "QM") return Measure::QM;
  if (name == "qh" || name == "QH") return Measure::QH;
  return std::nullopt;
}

std::vector<std::size_t> CommunityStructure::node_assignment() const {
  std::vector<std::size_t> out(u_community);
  const std::size_t offset = measure == Measure::QB ? 0 : u_communities;
  for (auto c : v_community) out.push_back(c + offset);
  return out;
}

std::size_t CommunityStructure::communities() const {
  if (measure != Measure::QB) return u_communities + v_communities;
  std::unordered_set<std::size_t> ids(u_community.begin(), u_community.end());
  ids.insert(v_community.begin(), v_community.end());
  return ids.size();
}

namespace {

// Greedy Barber ascent. With integer degrees the merge gain scaled by m^2 is
// an exact integer: w(c,d) m - (KU_c KV_d + KU_d KV_c).
CommunityStructure greedy_qb(const BipartiteGraph& g) {
  const std::size_t nu = g.u_count(), n = g.node_count();
  const std::int64_t m = g.edge_count();
  std::vector<std::int64_t> ku(n, 0), kv(n, 0);
  std::vector<std::map<std::size_t, std::int64_t>> link(n);
  std::vector<std::size_t> slot(n);
  for (std::size_t i = 0; i < n; ++i) slot[i] = i;
  for (std::size_t u = 0; u < nu; ++u) ku[u] = g.u_degree(u);
  for (std::size_t v = 0; v < g.v_count(); ++v) kv[nu + v] = g.v_degree(v);
  for (const auto& e : g.edges()) {
    link[e.u][nu + e.v] += e.multiplicity;
    link[nu + e.v][e.u] += e.multiplicity;
  }

  for (;;) {
    std::int64_t best_gain = 0;
    std::size_t bc = n, bd = n;
    for (std::size_t c = 0; c < n; ++c)
      for (const auto& [d, w] : link[c]) {
        if (d <= c) continue;
        const std::int64_t gain = w * m - (ku[c] * kv[d] + ku[d] * kv[c]);
        if (gain > best_gain) {
          best_gain = gain;
          bc = c;
          bd = d;
        }
      }
    if (bc == n) break;

    ku[bc] += ku[bd];
    kv[bc] += kv[bd];
    for (const auto& [x, w] : link[bd]) {
      if (x == bc) continue;
      link[bc][x] += w;
      link[x][bc] += w;
      link[x].erase(bd);
    }
    link[bc].erase(bd);
    link[bd].clear();
    for (auto& s : slot)
      if (s == bd) s = bc;
  }

  Partition dense = make_partition(slot);
  CommunityStructure cs;
  cs.measure = Measure::QB;
  cs.u_community.assign(dense.assignment.begin(), dense.assignment.begin() + nu);
  cs.v_community.assign(dense.assignment.begin() + nu, dense.assignment.end());
  cs.u_communities = cs.v_communities = dense.communities;
  cs.score = modularity_qb(g, dense.assignment);
  return cs;
}

// Greedy ascent for the correspondence measures. Row-side communities keep a
// sparse row of edge counts; a merge only changes the terms of rows whose
// entries it touches, so gains are evaluated on those rows alone.
class CorrespondenceGreedy {
 public:
  CorrespondenceGreedy(const BipartiteGraph& g, Measure measure)
      : measure_(measure), m_(static_cast<double>(g.edge_count())), rows_(g.u_count()),
        support_(g.v_count()), row_w_(g.u_count(), 0), col_w_(g.v_count(), 0),
        row_active_(g.u_count(), true), col_active_(g.v_count(), true), u_slot_(g.u_count()),
        v_slot_(g.v_count()), term_(g.u_count(), 0.0) {
    for (std::size_t u = 0; u < g.u_count(); ++u) u_slot_[u] = u;
    for (std::size_t v = 0; v < g.v_count(); ++v) v_slot_[v] = v;
    for (const auto& e : g.edges()) {
      rows_[e.u][e.v] += e.multiplicity;
      support_[e.v].insert(e.u);
      row_w_[e.u] += e.multiplicity;
      col_w_[e.v] += e.multiplicity;
    }
    for (std::size_t i = 0; i < rows_.size(); ++i) term_[i] = row_term(i);
  }

  void run() {
    constexpr double kMinGain = 1e-12;
    for (;;) {
      double best = kMinGain;
      bool row_merge = true;
      std::pair<std::size_t, std::size_t> pick{0, 0};
      bool found = false;

      for (auto [a, b] : row_candidates()) {
        const double gain = row_merge_gain(a, b);
        if (gain > best) {
          best = gain;
          pick = {a, b};
          row_merge = true;
          found = true;
        }
      }
      for (auto [a, b] : col_candidates()) {
        const double gain = col_merge_gain(a, b);
        if (gain > best) {
          best = gain;
          pick = {a, b};
          row_merge = false;
          found = true;
        }
      }
      if (!found) break;
      if (row_merge) merge_rows(pick.first, pick.second);
      else merge_cols(pick.first, pick.second);
    }
  }

  CommunityStructure result(const BipartiteGraph& g) const {
    Partition pu = make_partition(u_slot_);
    Partition pv = make_partition(v_slot_);
    CommunityStructure cs;
    cs.measure = measure_;
    cs.u_community = pu.assignment;
    cs.v_community = pv.assignment;
    cs.u_communities = pu.communities;
    cs.v_communities = pv.communities;
    const auto f = community_fractions(g, cs.u_community, cs.v_community);
    cs.score = measure_ == Measure::QM ? modularity_qm(f) : modularity_qh(f);
    return cs;
  }

 private:
  using Entries = std::vector<std::pair<std::size_t, std::int64_t>>;

  // Term of one row-side community given its entries and a column-weight lookup.
  template <typename ColWeight>
  double term(const Entries& entries, std::int64_t row_weight, ColWeight&& col_weight) const {
    const double a_i = static_cast<double>(row_weight) / m_;
    if (measure_ == Measure::QM) {
      std::size_t best = 0;
      for (std::size_t k = 1; k < entries.size(); ++k) {
        const auto& [ck, nk] = entries[k];
        const auto& [cb, nb] = entries[best];
        if (nk > nb || (nk == nb && (col_weight(ck) < col_weight(cb) ||
                                     (col_weight(ck) == col_weight(cb) && ck < cb))))
          best = k;
      }
      const auto& [c, n] = entries[best];
      return static_cast<double>(n) / m_ - a_i * static_cast<double>(col_weight(c)) / m_;
    }
    std::int64_t top = 0;
    for (const auto& [c, n] : entries) top = std::max(top, n);
    double q = 0.0;
    for (const auto& [c, n] : entries) {
      const double e = static_cast<double>(n) / m_;
      q += (static_cast<double>(n) / static_cast<double>(top)) *
           (e - a_i * static_cast<double>(col_weight(c)) / m_);
    }
    return q;
  }

  double row_term(std::size_t i) const {
    Entries entries(rows_[i].begin(), rows_[i].end());
    return term(entries, row_w_[i], [this](std::size_t c) { return col_w_[c]; });
  }

  std::set<std::pair<std::size_t, std::size_t>> row_candidates() const {
    std::set<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t j = 0; j < support_.size(); ++j) {
      if (!col_active_[j]) continue;
      for (auto a = support_[j].begin(); a != support_[j].end(); ++a)
        for (auto b = std::next(a); b != support_[j].end(); ++b) out.emplace(*a, *b);
    }
    return out;
  }

  std::set<std::pair<std::size_t, std::size_t>> col_candidates() const {
    std::set<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      if (!row_active_[i]) continue;
      for (auto a = rows_[i].begin(); a != rows_[i].end(); ++a)
        for (auto b = std::next(a); b != rows_[i].end(); ++b) out.emplace(a->first, b->first);
    }
    return out;
  }

  double row_merge_gain(std::size_t a, std::size_t b) const {
    std::map<std::size_t, std::int64_t> merged = rows_[a];
    for (const auto& [c, n] : rows_[b]) merged[c] += n;
    Entries entries(merged.begin(), merged.end());
    const double t = term(entries, row_w_[a] + row_w_[b], [this](std::size_t c) { return col_w_[c]; });
    return t - term_[a] - term_[b];
  }

  double col_merge_gain(std::size_t a, std::size_t b) const {
    const std::int64_t merged_w = col_w_[a] + col_w_[b];
    auto weight = [&](std::size_t c) { return c == a ? merged_w : col_w_[c]; };
    std::set<std::size_t> affected(support_[a].begin(), support_[a].end());
    affected.insert(support_[b].begin(), support_[b].end());
    double gain = 0.0;
    for (auto i : affected) {
      Entries entries;
      std::int64_t joined = 0;
      for (const auto& [c, n] : rows_[i]) {
        if (c == a || c == b) joined += n;
        else entries.emplace_back(c, n);
      }
      entries.emplace_back(a, joined);
      gain += term(entries, row_w_[i], weight) - term_[i];
    }
    return gain;
  }

  void merge_rows(std::size_t a, std::size_t b) {
    for (const auto& [c, n] : rows_[b]) {
      rows_[a][c] += n;
      support_[c].erase(b);
      support_[c].insert(a);
    }
    rows_[b].clear();
    row_w_[a] += row_w_[b];
    row_active_[b] = false;
    for (auto& s : u_slot_)
      if (s == b) s = a;
    term_[a] = row_term(a);
  }

  void merge_cols(std::size_t a, std::size_t b) {
    for (auto i : support_[b]) {
      rows_[i][a] += rows_[i][b];
      rows_[i].erase(b);
      support_[a].insert(i);
    }
    support_[b].clear();
    col_w_[a] += col_w_[b];
    col_active_[b] = false;
    for (auto& s : v_slot_)
      if (s == b) s = a;
    for (auto i : support_[a]) term_[i] = row_term(i);
  }

  Measure measure_;
  double m_;
  std::vector<std::map<std::size_t, std::int64_t>> rows_;
  std::vector<std::set<std::size_t>> support_;
  std::vector<std::int64_t> row_w_;
  std::vector<std::int64_t> col_w_;
  std::vector<bool> row_active_;
  std::vector<bool> col_active_;
  std::vector<std::size_t> u_slot_;
  std::vector<std::size_t> v_slot_;
  std::vector<double> term_;
};

}  // namespace

CommunityStructure greedy_optimize(const BipartiteGraph& g, Measure measure) {
  if (measure == Measure::QB) return greedy_qb(g);
  CorrespondenceGreedy greedy(g, measure);
  greedy.run();
  return greedy.result(g);
}

std::vector<PartitionRow> partition_rows(const BipartiteGraph& g, const CommunityStructure& cs) {
  const auto assignment = cs.node_assignment();
  std::vector<PartitionRow> rows;
  rows.reserve(assignment.size());
  for (std::size_t u = 0; u < g.u_count(); ++u)
    rows.push_back({g.u_labels()[u], PartTag::Row, assignment[u]});
  for (std::size_t v = 0; v < g.v_count(); ++v)
    rows.push_back({g.v_labels()[v], PartTag::Col, assignment[g.u_count() + v]});
  return rows;
}

Eigen::MatrixXd co_reference_ratios(const BipartiteGraph& g) {
  const auto n = static_cast<Eigen::Index>(g.u_count());
  std::vector<std::set<std::size_t>> nbr(g.u_count());
  for (const auto& e : g.edges()) nbr[e.u].insert(e.v);
  Eigen::MatrixXd r(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < n; ++k) {
      const auto& ni = nbr[static_cast<std::size_t>(i)];
      const auto& nk = nbr[static_cast<std::size_t>(k)];
      std::size_t shared = 0;
      for (auto v : nk) shared += ni.count(v);
      r(i, k) = static_cast<double>(shared) / static_cast<double>(nk.size());
    }
  return r;
}

WeakestPairResult weakest_pair(const Eigen::MatrixXd& r) {
  const Eigen::Index n = r.rows();
  WeakestPairResult out;
  out.dissimilarity = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      out.dissimilarity(i, j) = out.dissimilarity(j, i) = (r.row(i) - r.row(j)).cwiseAbs().sum();
  const Eigen::MatrixXd& d = out.dissimilarity;

  const double norm = n > 0 ? 1.0 / static_cast<double>(n * n) : 0.0;
  auto within = [&](const std::vector<Eigen::Index>& f) {
    double s = 0.0;
    for (auto i : f)
      for (auto j : f) s += d(i, j);
    return s;
  };

  const double mean_pair = n > 1 ? d.sum() / static_cast<double>(n * (n - 1)) : 0.0;

  std::vector<std::vector<Eigen::Index>> fragments;
  std::vector<Eigen::Index> all(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
  fragments.push_back(all);
  double ibrp = norm * within(all);
  out.ibrp.push_back(ibrp);

  std::deque<std::size_t> queue{0};
  while (!queue.empty()) {
    const std::size_t fi = queue.front();
    queue.pop_front();
    const auto frag = fragments[fi];
    if (frag.size() < 2) continue;

    Eigen::Index s1 = frag[0], s2 = frag[1];
    for (std::size_t x = 0; x < frag.size(); ++x)
      for (std::size_t y = x + 1; y < frag.size(); ++y)
        if (d(frag[x], frag[y]) > d(s1, s2)) {
          s1 = frag[x];
          s2 = frag[y];
        }
    if (!(d(s1, s2) > mean_pair)) continue;

    std::vector<Eigen::Index> left, right;
    for (auto i : frag) (d(i, s2) < d(i, s1) ? right : left).push_back(i);
    const double next = ibrp - norm * within(frag) + norm * (within(left) + within(right));
    if (!(next < ibrp)) continue;

    ibrp = next;
    out.ibrp.push_back(ibrp);
    fragments[fi] = std::move(left);
    fragments.push_back(std::move(right));
    queue.push_back(fi);
    queue.push_back(fragments.size() - 1);
  }

  std::vector<std::size_t> key(static_cast<std::size_t>(n));
  for (std::size_t f = 0; f < fragments.size(); ++f)
    for (auto i : fragments[f]) key[static_cast<std::size_t>(i)] = f;
  out.partition = make_partition(key);
  return out;
}

}  // namespace rpclust
