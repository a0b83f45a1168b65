#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tuef/types.hpp"

namespace tuef {

/// Candidates of one query: one feature row per candidate, binary labels.
struct QueryGroup {
  PostId query = 0;
  std::vector<UserId> experts;
  Eigen::MatrixXd features;
  std::vector<int> labels;
};

struct LtrDataset {
  std::vector<std::string> feature_names;
  std::vector<QueryGroup> train;
  std::vector<QueryGroup> validation;

  /// Every group needs >= 2 samples and exactly one positive.
  void validate() const;
};

/// Keeps only the given columns (in order) of every group.
LtrDataset project_columns(const LtrDataset& ds, const std::vector<int>& columns);

/// Temporal split of chronologically ordered groups: the first ceil(ratio * n) train.
LtrDataset split_groups(std::vector<QueryGroup> groups, std::vector<std::string> feature_names, double train_ratio);

/// Columnar text export: a header of feature names plus one row per (query, candidate) with the
/// query id, expert id and label leading; `groups_path` lists "query_id<TAB>group_size".
/// A non-empty `stamp` is written as a leading "# " comment line in both files.
void write_ltr_tsv(const std::vector<QueryGroup>& groups, const std::vector<std::string>& feature_names,
                   const std::filesystem::path& path, const std::filesystem::path& groups_path,
                   const std::string& stamp = "");
std::vector<QueryGroup> read_ltr_tsv(const std::filesystem::path& path, std::vector<std::string>* feature_names);

struct HyperParams {
  double learning_rate = 0.05;
  int num_leaves = 31;
  int n_estimators = 100;
  int max_depth = 8;
  int min_data_in_leaf = 20;

  /// Centre of the default search space.
  static HyperParams midpoint();
};

struct SearchSpace {
  double lr_min = 0.0001;
  double lr_max = 0.15;
  int leaves_min = 50;
  int leaves_max = 200;
  int estimators_min = 50;
  int estimators_max = 150;
  int depth_min = 8;
  int depth_max = 15;
  int min_data_min = 150;
  int min_data_max = 500;

  bool contains(const HyperParams& hp) const;
};

struct TrainOptions {
  double sigma = 1.0;
  int ndcg_truncation = 10;
  int early_stopping_rounds = 30;
  int max_bins = 255;
  double lambda_l2 = 0.0;
  double min_sum_hessian = 1e-3;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
  double gain = 0.0;
};

/// Binary regression tree; rows with x[feature] <= threshold go left.
struct RegressionTree {
  std::vector<TreeNode> nodes;

  template <typename Derived>
  double predict(const Eigen::MatrixBase<Derived>& x) const {
    int i = 0;
    while (nodes[i].feature >= 0) i = x[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
    return nodes[i].value;
  }
  int leaf_index(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  std::size_t leaf_count() const;
};

struct RankerModel {
  std::vector<RegressionTree> trees;
  double learning_rate = 0.1;
  std::vector<std::string> feature_names;
  HyperParams hp;
  std::uint64_t seed = 0;
  std::vector<double> validation_mrr;
  std::vector<double> train_ndcg3;
  int best_iteration = -1;

  template <typename Derived>
  double score(const Eigen::MatrixBase<Derived>& x) const {
    double s = 0.0;
    for (const auto& t : trees) s += learning_rate * t.predict(x);
    return s;
  }
  Eigen::VectorXd score_rows(const Eigen::MatrixXd& rows) const;
  std::size_t arity() const { return feature_names.size(); }

  /// Total split gain per feature.
  std::map<std::string, double> feature_importance() const;

  std::string to_json() const;
  static RankerModel from_json(const std::string& text);
  void save(const std::filesystem::path& path) const;
  static RankerModel load(const std::filesystem::path& path);
};

/// LambdaRank gradients (dCost/ds) and Hessians for one query. Pairs are weighted by |delta NDCG@truncation|
/// of swapping them under the current score order (ties keep input order).
void lambda_gradients(const Eigen::VectorXd& scores, const std::vector<int>& labels, double sigma, int truncation,
                      Eigen::Ref<Eigen::VectorXd> grad, Eigen::Ref<Eigen::VectorXd> hess);

/// Candidate order by descending score, ties by expert id.
std::vector<std::size_t> rank_order(const Eigen::VectorXd& scores, const std::vector<UserId>& experts);

/// Mean reciprocal rank of the positive under the model.
double mean_reciprocal_rank(const RankerModel& model, const std::vector<QueryGroup>& groups);

/// Mean NDCG@k under the model (binary gains).
double mean_ndcg(const RankerModel& model, const std::vector<QueryGroup>& groups, int k);

RankerModel train_lambdamart(const LtrDataset& ds, const HyperParams& hp, std::uint64_t seed,
                             const TrainOptions& opts = {});

struct TuningTrial {
  HyperParams hp;
  double validation_mrr = 0.0;
};

/// Random search; learning rate drawn log-uniformly. Ties keep the earlier draw.
HyperParams tune_hyperparams(const LtrDataset& ds, int budget, std::uint64_t seed, const SearchSpace& space = {},
                             std::vector<TuningTrial>* trials = nullptr, const TrainOptions& opts = {});

struct RankedCandidate {
  UserId expert = 0;
  double score = 0.0;
};

std::vector<RankedCandidate> score_and_rank(const RankerModel& model, const std::vector<UserId>& experts,
                                            const Eigen::MatrixXd& features);

}  // namespace tuef
