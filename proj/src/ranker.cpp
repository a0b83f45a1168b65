#include "tuef/ranker.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"

namespace tuef {

using nlohmann::json;

void LtrDataset::validate() const {
  for (const auto* part : {&train, &validation}) {
    for (const auto& g : *part) {
      if (g.labels.size() < 2 || static_cast<Eigen::Index>(g.labels.size()) != g.features.rows() ||
          g.experts.size() != g.labels.size()) {
        throw Error("query " + std::to_string(g.query) + " needs at least two aligned samples");
      }
      if (std::count(g.labels.begin(), g.labels.end(), 1) != 1) {
        throw Error("query " + std::to_string(g.query) + " must have exactly one positive");
      }
      if (g.features.cols() != static_cast<Eigen::Index>(feature_names.size())) {
        throw Error("feature arity mismatch in query " + std::to_string(g.query));
      }
    }
  }
}

LtrDataset project_columns(const LtrDataset& ds, const std::vector<int>& columns) {
  LtrDataset out;
  for (int c : columns) out.feature_names.push_back(ds.feature_names.at(c));
  auto project = [&](const std::vector<QueryGroup>& groups) {
    std::vector<QueryGroup> res;
    res.reserve(groups.size());
    for (const auto& g : groups) {
      QueryGroup p{g.query, g.experts, Eigen::MatrixXd(g.features.rows(), static_cast<Eigen::Index>(columns.size())),
                   g.labels};
      for (std::size_t j = 0; j < columns.size(); ++j) p.features.col(static_cast<Eigen::Index>(j)) = g.features.col(columns[j]);
      res.push_back(std::move(p));
    }
    return res;
  };
  out.train = project(ds.train);
  out.validation = project(ds.validation);
  return out;
}

LtrDataset split_groups(std::vector<QueryGroup> groups, std::vector<std::string> feature_names, double train_ratio) {
  if (groups.empty()) throw Error("no query groups to split");
  LtrDataset ds;
  ds.feature_names = std::move(feature_names);
  const auto n_train = std::min(
      groups.size(), static_cast<std::size_t>(std::ceil(train_ratio * static_cast<double>(groups.size()) - 1e-9)));
  for (std::size_t i = 0; i < groups.size(); ++i) {
    (i < n_train ? ds.train : ds.validation).push_back(std::move(groups[i]));
  }
  return ds;
}

void write_ltr_tsv(const std::vector<QueryGroup>& groups, const std::vector<std::string>& feature_names,
                   const std::filesystem::path& path, const std::filesystem::path& groups_path,
                   const std::string& stamp) {
  std::ofstream out(path);
  std::ofstream gout(groups_path);
  if (!out || !gout) throw Error("cannot write LtR dataset to " + path.string());
  out.precision(17);
  if (!stamp.empty()) {
    out << "# " << stamp << '\n';
    gout << "# " << stamp << '\n';
  }
  out << "query_id\texpert_id\tlabel";
  for (const auto& f : feature_names) out << '\t' << f;
  out << '\n';
  for (const auto& g : groups) {
    gout << g.query << '\t' << g.labels.size() << '\n';
    for (Eigen::Index r = 0; r < g.features.rows(); ++r) {
      out << g.query << '\t' << g.experts[r] << '\t' << g.labels[r];
      for (Eigen::Index c = 0; c < g.features.cols(); ++c) out << '\t' << g.features(r, c);
      out << '\n';
    }
  }
}

std::vector<QueryGroup> read_ltr_tsv(const std::filesystem::path& path, std::vector<std::string>* feature_names) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read LtR dataset " + path.string());
  std::string line;
  do {
    if (!std::getline(in, line)) throw Error("empty LtR dataset " + path.string());
  } while (line.starts_with('#'));
  std::vector<std::string> names;
  {
    std::istringstream hs(line);
    std::string col;
    for (int i = 0; std::getline(hs, col, '\t'); ++i) {
      if (i >= 3) names.push_back(col);
    }
  }
  std::vector<QueryGroup> groups;
  std::vector<std::vector<double>> rows;
  auto finish = [&] {
    if (groups.empty() || rows.empty()) return;
    auto& g = groups.back();
    g.features.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(names.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t c = 0; c < names.size(); ++c) g.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
    rows.clear();
  };
  while (std::getline(in, line)) {
    if (line.empty() || line.starts_with('#')) continue;
    std::istringstream ls(line);
    PostId q = 0;
    UserId e = 0;
    int label = 0;
    ls >> q >> e >> label;
    std::vector<double> row(names.size());
    for (auto& v : row) ls >> v;
    if (!ls) throw Error("malformed LtR row in " + path.string());
    if (groups.empty() || groups.back().query != q) {
      finish();
      groups.push_back({q, {}, {}, {}});
    }
    groups.back().experts.push_back(e);
    groups.back().labels.push_back(label);
    rows.push_back(std::move(row));
  }
  finish();
  if (feature_names) *feature_names = std::move(names);
  return groups;
}

HyperParams HyperParams::midpoint() {
  const SearchSpace s;
  return {(s.lr_min + s.lr_max) / 2, (s.leaves_min + s.leaves_max) / 2, (s.estimators_min + s.estimators_max) / 2,
          (s.depth_min + s.depth_max) / 2, (s.min_data_min + s.min_data_max) / 2};
}

bool SearchSpace::contains(const HyperParams& hp) const {
  return hp.learning_rate >= lr_min && hp.learning_rate <= lr_max && hp.num_leaves >= leaves_min &&
         hp.num_leaves <= leaves_max && hp.n_estimators >= estimators_min && hp.n_estimators <= estimators_max &&
         hp.max_depth >= depth_min && hp.max_depth <= depth_max && hp.min_data_in_leaf >= min_data_min &&
         hp.min_data_in_leaf <= min_data_max;
}

int RegressionTree::leaf_index(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  int i = 0;
  while (nodes[i].feature >= 0) i = x[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
  return i;
}

std::size_t RegressionTree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const auto& n) { return n.feature < 0; }));
}

Eigen::VectorXd RankerModel::score_rows(const Eigen::MatrixXd& rows) const {
  if (rows.cols() != static_cast<Eigen::Index>(arity())) throw Error("feature arity does not match the model");
  Eigen::VectorXd s(rows.rows());
  for (Eigen::Index r = 0; r < rows.rows(); ++r) s[r] = score(rows.row(r).transpose());
  return s;
}

std::map<std::string, double> RankerModel::feature_importance() const {
  std::map<std::string, double> imp;
  for (const auto& f : feature_names) imp[f] = 0.0;
  for (const auto& t : trees) {
    for (const auto& n : t.nodes) {
      if (n.feature >= 0) imp[feature_names.at(n.feature)] += n.gain;
    }
  }
  return imp;
}

std::string RankerModel::to_json() const {
  json j;
  j["format"] = "tuef-lambdamart";
  j["version"] = 1;
  j["learning_rate"] = learning_rate;
  j["feature_names"] = feature_names;
  json trees_j = json::array();
  for (const auto& t : trees) {
    json nodes = json::array();
    for (const auto& n : t.nodes) {
      if (n.feature < 0) {
        nodes.push_back({{"leaf", n.value}});
      } else {
        nodes.push_back({{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left}, {"right", n.right},
                         {"gain", n.gain}});
      }
    }
    trees_j.push_back(std::move(nodes));
  }
  j["trees"] = std::move(trees_j);
  j["metadata"] = {{"seed", seed},
                   {"best_iteration", best_iteration},
                   {"validation_mrr", validation_mrr},
                   {"train_ndcg3", train_ndcg3},
                   {"hyperparameters",
                    {{"learning_rate", hp.learning_rate},
                     {"num_leaves", hp.num_leaves},
                     {"n_estimators", hp.n_estimators},
                     {"max_depth", hp.max_depth},
                     {"min_data_in_leaf", hp.min_data_in_leaf}}}};
  return j.dump(1);
}

RankerModel RankerModel::from_json(const std::string& text) {
  const auto j = json::parse(text);
  if (j.value("format", "") != "tuef-lambdamart" || j.value("version", 0) != 1) {
    throw Error("unsupported model format");
  }
  RankerModel m;
  m.learning_rate = j.at("learning_rate").get<double>();
  m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  for (const auto& tj : j.at("trees")) {
    RegressionTree t;
    for (const auto& nj : tj) {
      TreeNode n;
      if (nj.contains("leaf")) {
        n.value = nj.at("leaf").get<double>();
      } else {
        n.feature = nj.at("feature").get<int>();
        n.threshold = nj.at("threshold").get<double>();
        n.left = nj.at("left").get<int>();
        n.right = nj.at("right").get<int>();
        n.gain = nj.value("gain", 0.0);
        if (n.feature >= static_cast<int>(m.feature_names.size())) throw Error("tree references unknown feature");
      }
      t.nodes.push_back(n);
    }
    m.trees.push_back(std::move(t));
  }
  const auto& meta = j.at("metadata");
  m.seed = meta.value("seed", std::uint64_t{0});
  m.best_iteration = meta.value("best_iteration", -1);
  m.validation_mrr = meta.value("validation_mrr", std::vector<double>{});
  m.train_ndcg3 = meta.value("train_ndcg3", std::vector<double>{});
  if (meta.contains("hyperparameters")) {
    const auto& h = meta["hyperparameters"];
    m.hp = {h.value("learning_rate", 0.1), h.value("num_leaves", 31), h.value("n_estimators", 100),
            h.value("max_depth", 8), h.value("min_data_in_leaf", 20)};
  }
  return m;
}

void RankerModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write model " + path.string());
  out << to_json() << '\n';
}

RankerModel RankerModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read model " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

void lambda_gradients(const Eigen::VectorXd& scores, const std::vector<int>& labels, double sigma, int truncation,
                      Eigen::Ref<Eigen::VectorXd> grad, Eigen::Ref<Eigen::VectorXd> hess) {
  const auto n = static_cast<Eigen::Index>(labels.size());
  grad.setZero();
  hess.setZero();
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });
  std::vector<Eigen::Index> rank(n);
  for (Eigen::Index r = 0; r < n; ++r) rank[order[r]] = r;

  std::vector<int> sorted_labels(labels.begin(), labels.end());
  std::sort(sorted_labels.rbegin(), sorted_labels.rend());
  double ideal = 0.0;
  for (Eigen::Index r = 0; r < std::min<Eigen::Index>(n, truncation); ++r) {
    ideal += (std::pow(2.0, sorted_labels[r]) - 1.0) / std::log2(2.0 + static_cast<double>(r));
  }
  if (ideal <= 0.0) return;

  auto discount = [](Eigen::Index r) { return 1.0 / std::log2(2.0 + static_cast<double>(r)); };
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (labels[i] <= labels[j]) continue;
      if (std::min(rank[i], rank[j]) >= truncation) continue;
      const double dgain = std::pow(2.0, labels[i]) - std::pow(2.0, labels[j]);
      const double delta = std::abs(dgain * (discount(rank[i]) - discount(rank[j]))) / ideal;
      const double rho = 1.0 / (1.0 + std::exp(sigma * (scores[i] - scores[j])));
      const double lambda = sigma * rho * delta;
      grad[i] -= lambda;
      grad[j] += lambda;
      const double h = sigma * sigma * rho * (1.0 - rho) * delta;
      hess[i] += h;
      hess[j] += h;
    }
  }
}

std::vector<std::size_t> rank_order(const Eigen::VectorXd& scores, const std::vector<UserId>& experts) {
  std::vector<std::size_t> order(experts.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ia = static_cast<Eigen::Index>(a);
    const auto ib = static_cast<Eigen::Index>(b);
    if (scores[ia] != scores[ib]) return scores[ia] > scores[ib];
    return experts[a] < experts[b];
  });
  return order;
}

namespace {

// 1-based rank of the positive sample under `scores`, 0 if the group has none.
std::size_t positive_rank(const Eigen::VectorXd& scores, const QueryGroup& g) {
  const auto order = rank_order(scores, g.experts);
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (g.labels[order[r]] > 0) return r + 1;
  }
  return 0;
}

double group_mrr(const std::vector<Eigen::VectorXd>& scores, const std::vector<QueryGroup>& groups) {
  if (groups.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const auto r = positive_rank(scores[i], groups[i]);
    if (r > 0) s += 1.0 / static_cast<double>(r);
  }
  return s / static_cast<double>(groups.size());
}

double group_ndcg(const std::vector<Eigen::VectorXd>& scores, const std::vector<QueryGroup>& groups, int k) {
  if (groups.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const auto r = positive_rank(scores[i], groups[i]);
    if (r > 0 && r <= static_cast<std::size_t>(k)) s += 1.0 / std::log2(static_cast<double>(r) + 1.0);
  }
  return s / static_cast<double>(groups.size());
}

// Quantized training matrix: bins(i, f) = number of thresholds of f strictly below x(i, f).
struct BinnedMatrix {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  std::vector<std::vector<double>> thresholds;
  std::vector<std::uint16_t> bins;  // column-major

  std::uint16_t at(Eigen::Index r, Eigen::Index c) const { return bins[static_cast<std::size_t>(c * rows + r)]; }
  int bin_count(Eigen::Index c) const { return static_cast<int>(thresholds[c].size()) + 1; }
};

BinnedMatrix bin_features(const Eigen::MatrixXd& x, int max_bins) {
  BinnedMatrix b;
  b.rows = x.rows();
  b.cols = x.cols();
  b.thresholds.resize(b.cols);
  b.bins.resize(static_cast<std::size_t>(b.rows * b.cols));
  for (Eigen::Index c = 0; c < b.cols; ++c) {
    std::vector<double> v(x.col(c).data(), x.col(c).data() + b.rows);
    std::sort(v.begin(), v.end());
    std::vector<double> distinct;
    std::vector<std::size_t> counts;
    for (double d : v) {
      if (distinct.empty() || d != distinct.back()) {
        distinct.push_back(d);
        counts.push_back(0);
      }
      ++counts.back();
    }
    auto& th = b.thresholds[c];
    if (static_cast<int>(distinct.size()) <= max_bins) {
      th.assign(distinct.begin(), distinct.end() - 1);
    } else {
      // Equal-frequency boundaries over the distinct values.
      const double per_bin = static_cast<double>(v.size()) / max_bins;
      double acc = 0.0;
      double next = per_bin;
      for (std::size_t i = 0; i + 1 < distinct.size(); ++i) {
        acc += static_cast<double>(counts[i]);
        if (acc >= next) {
          th.push_back(distinct[i]);
          while (next <= acc) next += per_bin;
        }
      }
    }
    for (Eigen::Index r = 0; r < b.rows; ++r) {
      const auto pos = std::lower_bound(th.begin(), th.end(), x(r, c)) - th.begin();
      b.bins[static_cast<std::size_t>(c * b.rows + r)] = static_cast<std::uint16_t>(pos);
    }
  }
  return b;
}

struct Split {
  double gain = -std::numeric_limits<double>::infinity();
  int feature = -1;
  int bin = -1;
};

struct Leaf {
  std::vector<Eigen::Index> rows;
  double g = 0.0;
  double h = 0.0;
  int depth = 0;
  int node = 0;
  Split best;
};

class TreeGrower {
 public:
  TreeGrower(const BinnedMatrix& data, const HyperParams& hp, const TrainOptions& opts)
      : data_(data), hp_(hp), opts_(opts) {}

  // Grows one tree; `leaf_of` receives the leaf node of every training row.
  RegressionTree grow(const Eigen::VectorXd& grad, const Eigen::VectorXd& hess, std::vector<int>& leaf_of) const {
    RegressionTree tree;
    std::vector<Leaf> leaves(1);
    leaves[0].rows.resize(data_.rows);
    std::iota(leaves[0].rows.begin(), leaves[0].rows.end(), Eigen::Index{0});
    for (auto r : leaves[0].rows) {
      leaves[0].g += grad[r];
      leaves[0].h += hess[r];
    }
    tree.nodes.emplace_back();
    find_split(leaves[0], grad, hess);

    while (static_cast<int>(leaves.size()) < hp_.num_leaves) {
      std::size_t pick = leaves.size();
      for (std::size_t i = 0; i < leaves.size(); ++i) {
        if (leaves[i].best.feature < 0 || !(leaves[i].best.gain > 0.0)) continue;
        if (pick == leaves.size() || leaves[i].best.gain > leaves[pick].best.gain) pick = i;
      }
      if (pick == leaves.size()) break;

      Leaf parent = std::move(leaves[pick]);
      Leaf left;
      Leaf right;
      for (auto r : parent.rows) {
        auto& side = data_.at(r, parent.best.feature) <= parent.best.bin ? left : right;
        side.rows.push_back(r);
        side.g += grad[r];
        side.h += hess[r];
      }
      auto& node = tree.nodes[parent.node];
      node.feature = parent.best.feature;
      node.threshold = data_.thresholds[parent.best.feature][parent.best.bin];
      node.gain = parent.best.gain;
      node.left = static_cast<int>(tree.nodes.size());
      node.right = node.left + 1;
      left.node = node.left;
      right.node = node.right;
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      left.depth = right.depth = parent.depth + 1;
      find_split(left, grad, hess);
      find_split(right, grad, hess);
      leaves[pick] = std::move(left);
      leaves.push_back(std::move(right));
    }

    leaf_of.assign(static_cast<std::size_t>(data_.rows), 0);
    for (const auto& leaf : leaves) {
      tree.nodes[leaf.node].value = -leaf.g / (leaf.h + opts_.lambda_l2 + 1e-12);
      for (auto r : leaf.rows) leaf_of[r] = leaf.node;
    }
    return tree;
  }

 private:
  double score(double g, double h) const { return g * g / (h + opts_.lambda_l2 + 1e-12); }

  void find_split(Leaf& leaf, const Eigen::VectorXd& grad, const Eigen::VectorXd& hess) const {
    leaf.best = Split{};
    const auto n = static_cast<int>(leaf.rows.size());
    if (leaf.depth >= hp_.max_depth || n < 2 * hp_.min_data_in_leaf) return;
    const double parent = score(leaf.g, leaf.h);
    std::vector<double> hg;
    std::vector<double> hh;
    std::vector<int> hc;
    for (Eigen::Index f = 0; f < data_.cols; ++f) {
      const int nb = data_.bin_count(f);
      if (nb < 2) continue;
      hg.assign(nb, 0.0);
      hh.assign(nb, 0.0);
      hc.assign(nb, 0);
      for (auto r : leaf.rows) {
        const auto b = data_.at(r, f);
        hg[b] += grad[r];
        hh[b] += hess[r];
        ++hc[b];
      }
      double gl = 0.0;
      double hl = 0.0;
      int cl = 0;
      for (int b = 0; b + 1 < nb; ++b) {
        gl += hg[b];
        hl += hh[b];
        cl += hc[b];
        const int cr = n - cl;
        if (cl < hp_.min_data_in_leaf) continue;
        if (cr < hp_.min_data_in_leaf) break;
        const double hr = leaf.h - hl;
        if (hl < opts_.min_sum_hessian || hr < opts_.min_sum_hessian) continue;
        const double gain = score(gl, hl) + score(leaf.g - gl, hr) - parent;
        if (gain > leaf.best.gain) leaf.best = {gain, static_cast<int>(f), b};
      }
    }
  }

  const BinnedMatrix& data_;
  const HyperParams& hp_;
  const TrainOptions& opts_;
};

std::vector<Eigen::VectorXd> zero_scores(const std::vector<QueryGroup>& groups) {
  std::vector<Eigen::VectorXd> s;
  s.reserve(groups.size());
  for (const auto& g : groups) s.push_back(Eigen::VectorXd::Zero(g.features.rows()));
  return s;
}

}  // namespace

double mean_reciprocal_rank(const RankerModel& model, const std::vector<QueryGroup>& groups) {
  std::vector<Eigen::VectorXd> scores;
  for (const auto& g : groups) scores.push_back(model.score_rows(g.features));
  return group_mrr(scores, groups);
}

double mean_ndcg(const RankerModel& model, const std::vector<QueryGroup>& groups, int k) {
  std::vector<Eigen::VectorXd> scores;
  for (const auto& g : groups) scores.push_back(model.score_rows(g.features));
  return group_ndcg(scores, groups, k);
}

RankerModel train_lambdamart(const LtrDataset& ds, const HyperParams& hp, std::uint64_t seed, const TrainOptions& opts) {
  ds.validate();
  if (ds.train.empty()) throw Error("no training queries");
  if (hp.learning_rate <= 0.0 || hp.num_leaves < 2 || hp.n_estimators < 1 || hp.max_depth < 1 ||
      hp.min_data_in_leaf < 1) {
    throw Error("invalid hyperparameters");
  }
  const bool informative_labels = std::any_of(ds.train.begin(), ds.train.end(), [](const QueryGroup& g) {
    return std::adjacent_find(g.labels.begin(), g.labels.end(), std::not_equal_to<>()) != g.labels.end();
  });

  Eigen::Index n = 0;
  for (const auto& g : ds.train) n += g.features.rows();
  const auto f = static_cast<Eigen::Index>(ds.feature_names.size());
  Eigen::MatrixXd x(n, f);
  std::vector<Eigen::Index> offset;
  for (Eigen::Index row = 0; const auto& g : ds.train) {
    offset.push_back(row);
    x.middleRows(row, g.features.rows()) = g.features;
    row += g.features.rows();
  }
  const bool informative_features = ((x.rowwise() - x.row(0)).array().abs() > 0.0).any();
  if (!informative_labels || !informative_features) {
    throw Error("degenerate dataset: labels or feature vectors are identical within every query");
  }

  const auto binned = bin_features(x, opts.max_bins);
  const TreeGrower grower(binned, hp, opts);

  RankerModel model;
  model.learning_rate = hp.learning_rate;
  model.feature_names = ds.feature_names;
  model.hp = hp;
  model.seed = seed;

  auto train_scores = zero_scores(ds.train);
  auto valid_scores = zero_scores(ds.validation);
  const auto& monitor = ds.validation.empty() ? ds.train : ds.validation;
  Eigen::VectorXd grad(n);
  Eigen::VectorXd hess(n);
  std::vector<int> leaf_of;
  double best = -1.0;
  for (int it = 0; it < hp.n_estimators; ++it) {
    for (std::size_t q = 0; q < ds.train.size(); ++q) {
      const auto rows = ds.train[q].features.rows();
      lambda_gradients(train_scores[q], ds.train[q].labels, opts.sigma, opts.ndcg_truncation,
                       grad.segment(offset[q], rows), hess.segment(offset[q], rows));
    }
    auto tree = grower.grow(grad, hess, leaf_of);
    for (std::size_t q = 0; q < ds.train.size(); ++q) {
      for (Eigen::Index r = 0; r < train_scores[q].size(); ++r) {
        train_scores[q][r] += hp.learning_rate * tree.nodes[leaf_of[offset[q] + r]].value;
      }
    }
    for (std::size_t q = 0; q < ds.validation.size(); ++q) {
      for (Eigen::Index r = 0; r < valid_scores[q].size(); ++r) {
        valid_scores[q][r] += hp.learning_rate * tree.predict(ds.validation[q].features.row(r).transpose());
      }
    }
    model.trees.push_back(std::move(tree));
    model.train_ndcg3.push_back(group_ndcg(train_scores, ds.train, 3));
    const double mrr = group_mrr(ds.validation.empty() ? train_scores : valid_scores, monitor);
    model.validation_mrr.push_back(mrr);
    if (mrr > best) {
      best = mrr;
      model.best_iteration = it;
    } else if (it - model.best_iteration >= opts.early_stopping_rounds) {
      break;
    }
  }
  model.trees.resize(static_cast<std::size_t>(model.best_iteration + 1));
  return model;
}

HyperParams tune_hyperparams(const LtrDataset& ds, int budget, std::uint64_t seed, const SearchSpace& space,
                             std::vector<TuningTrial>* trials, const TrainOptions& opts) {
  if (budget < 1) throw Error("tuning budget must be at least 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> log_lr(std::log(space.lr_min), std::log(space.lr_max));
  auto uniform_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  HyperParams best_hp;
  double best = -1.0;
  for (int t = 0; t < budget; ++t) {
    HyperParams hp;
    hp.learning_rate = std::exp(log_lr(rng));
    hp.num_leaves = uniform_int(space.leaves_min, space.leaves_max);
    hp.n_estimators = uniform_int(space.estimators_min, space.estimators_max);
    hp.max_depth = uniform_int(space.depth_min, space.depth_max);
    hp.min_data_in_leaf = uniform_int(space.min_data_min, space.min_data_max);
    const auto model = train_lambdamart(ds, hp, seed, opts);
    const double mrr = model.validation_mrr.at(static_cast<std::size_t>(model.best_iteration));
    if (trials) trials->push_back({hp, mrr});
    if (mrr > best) {
      best = mrr;
      best_hp = hp;
    }
  }
  return best_hp;
}

std::vector<RankedCandidate> score_and_rank(const RankerModel& model, const std::vector<UserId>& experts,
                                            const Eigen::MatrixXd& features) {
  if (features.rows() != static_cast<Eigen::Index>(experts.size())) throw Error("one feature row per candidate required");
  const auto scores = model.score_rows(features);
  std::vector<RankedCandidate> out;
  for (auto i : rank_order(scores, experts)) out.push_back({experts[i], scores[static_cast<Eigen::Index>(i)]});
  return out;
}

}  // namespace tuef
