#pragma once

#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/SparseCore>

#include "tuef/ingest.hpp"
#include "tuef/topics.hpp"

namespace tuef {

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using SparseMatrix = Eigen::SparseMatrix<double>;

struct WeightedEdge {
  UserId a = 0;
  UserId b = 0;
  double weight = 0.0;
};

/// One topic graph. Node-indexed vectors are aligned with `nodes` (ascending user id).
struct Layer {
  int id = 0;
  std::vector<UserId> nodes;
  /// Coordinates of the topic vectors: the layer's tags minus the clustering feature tags.
  std::vector<std::string> tags;
  /// nodes x tags; row u is the user's topic vector.
  SparseRowMatrix topic_vectors;
  /// Symmetric similarity-weighted adjacency, no diagonal.
  SparseMatrix adjacency;
  std::vector<bool> is_expert;
  std::vector<int> accepted_in_layer;
  /// All answers (accepted or not) the node gave to questions of this layer.
  std::vector<int> answers_in_layer;
  int max_answers_in_layer = 0;

  Eigen::Index size() const { return static_cast<Eigen::Index>(nodes.size()); }
  std::optional<Eigen::Index> index_of(UserId user) const;
  bool contains(UserId user) const { return index_of(user).has_value(); }
  bool expert(UserId user) const {
    auto i = index_of(user);
    return i && is_expert[*i];
  }
  /// Each undirected edge once, a < b.
  std::vector<WeightedEdge> edges() const;
  std::size_t edge_count() const { return static_cast<std::size_t>(adjacency.nonZeros() / 2); }
};

struct MlgParams {
  int epsilon = 3;
  double delta = 0.5;
  int lambda = 10;
};

struct MultiLayerGraph {
  std::vector<Layer> layers;
  TagClustering clustering;
  MlgParams params;
};

/// Cluster ids of the question's tags; unknown tags are ignored.
std::set<int> layers_of(const std::vector<std::string>& question_tags, const TagClustering& clustering);

MultiLayerGraph build_mlg(const Dataset& train, const TagClustering& clustering, int epsilon, double delta);

/// Flags layer nodes that belong to the expert set.
void mark_experts(MultiLayerGraph& graph, const std::set<UserId>& experts);

/// Cosine similarity; 0 when either vector is zero.
template <typename A, typename B>
double cosine(const A& a, const B& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

}  // namespace tuef
