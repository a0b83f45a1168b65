#include "tuef/mlg.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

namespace tuef {

std::optional<Eigen::Index> Layer::index_of(UserId user) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), user);
  if (it == nodes.end() || *it != user) return std::nullopt;
  return static_cast<Eigen::Index>(it - nodes.begin());
}

std::vector<WeightedEdge> Layer::edges() const {
  std::vector<WeightedEdge> out;
  for (Eigen::Index c = 0; c < adjacency.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(adjacency, c); it; ++it) {
      if (it.row() < c) out.push_back({nodes[it.row()], nodes[c], it.value()});
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    return x.a != y.a ? x.a < y.a : x.b < y.b;
  });
  return out;
}

std::set<int> layers_of(const std::vector<std::string>& question_tags, const TagClustering& clustering) {
  std::set<int> out;
  for (const auto& t : question_tags) {
    if (auto c = clustering.cluster_of(t)) out.insert(*c);
  }
  return out;
}

namespace {

// Similarity edges among the rows of `vectors`, enumerating only pairs that share a tag.
SparseMatrix similarity_graph(const SparseRowMatrix& vectors, double delta) {
  const Eigen::Index n = vectors.rows();
  SparseMatrix by_col = vectors;  // column-major view: tag -> users
  Eigen::VectorXd norms(n);
  for (Eigen::Index i = 0; i < n; ++i) norms[i] = vectors.row(i).norm();

  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<double> acc(static_cast<std::size_t>(n), 0.0);
  std::vector<Eigen::Index> touched;
  for (Eigen::Index a = 0; a < n; ++a) {
    if (norms[a] == 0.0) continue;
    touched.clear();
    for (SparseRowMatrix::InnerIterator ta(vectors, a); ta; ++ta) {
      for (SparseMatrix::InnerIterator ub(by_col, ta.col()); ub; ++ub) {
        const Eigen::Index b = ub.row();
        if (b <= a) continue;
        if (acc[b] == 0.0) touched.push_back(b);
        acc[b] += ta.value() * ub.value();
      }
    }
    std::sort(touched.begin(), touched.end());
    for (Eigen::Index b : touched) {
      const double cos = acc[b] / (norms[a] * norms[b]);
      acc[b] = 0.0;
      if (cos > 0.0 && cos >= delta) {
        const double w = std::min(cos, 1.0);
        triplets.emplace_back(a, b, w);
        triplets.emplace_back(b, a, w);
      }
    }
  }
  SparseMatrix adj(n, n);
  adj.setFromTriplets(triplets.begin(), triplets.end());
  adj.makeCompressed();
  return adj;
}

}  // namespace

MultiLayerGraph build_mlg(const Dataset& train, const TagClustering& clustering, int epsilon, double delta) {
  if (epsilon < 1) throw Error("epsilon must be at least 1");
  if (!(delta >= 0.0 && delta <= 1.0)) throw Error("delta must lie in [0,1]");
  const int k = clustering.k;
  const std::set<std::string> feature_tags(clustering.features.begin(), clustering.features.end());

  std::vector<std::map<UserId, int>> accepted(k);
  std::vector<std::map<UserId, int>> answered(k);
  std::vector<std::map<UserId, std::map<std::string, int>>> per_tag(k);
  std::map<UserId, int> total_accepted;

  for (const auto& [qid, q] : train.questions) {
    const auto layers = layers_of(q.tags, clustering);
    const UserId best = train.best_answerer(q);
    ++total_accepted[best];
    for (int l : layers) {
      ++accepted[l][best];
      for (const auto& t : q.tags) {
        if (clustering.cluster_of(t) == l && !feature_tags.count(t)) ++per_tag[l][best][t];
      }
    }
  }
  for (const auto& [aid, a] : train.answers) {
    for (int l : layers_of(train.questions.at(a.parent_id).tags, clustering)) ++answered[l][a.owner];
  }

  MultiLayerGraph g;
  g.clustering = clustering;
  g.params = {epsilon, delta, static_cast<int>(clustering.features.size())};
  g.layers.resize(k);
  for (int l = 0; l < k; ++l) {
    Layer& layer = g.layers[l];
    layer.id = l;
    for (const auto& [tag, c] : clustering.assignment) {
      if (c == l && !feature_tags.count(tag)) layer.tags.push_back(tag);
    }
    std::unordered_map<std::string, Eigen::Index> col;
    for (std::size_t j = 0; j < layer.tags.size(); ++j) col.emplace(layer.tags[j], static_cast<Eigen::Index>(j));

    for (const auto& [u, c] : accepted[l]) {
      if (c >= epsilon) layer.nodes.push_back(u);
    }
    const auto n = layer.size();
    layer.is_expert.assign(n, false);
    layer.accepted_in_layer.resize(n);
    layer.answers_in_layer.resize(n);
    std::vector<Eigen::Triplet<double>> tv;
    for (Eigen::Index i = 0; i < n; ++i) {
      const UserId u = layer.nodes[i];
      layer.accepted_in_layer[i] = accepted[l][u];
      layer.answers_in_layer[i] = answered[l][u];
      layer.max_answers_in_layer = std::max(layer.max_answers_in_layer, layer.answers_in_layer[i]);
      const double denom = total_accepted.at(u);
      for (const auto& [tag, cnt] : per_tag[l][u]) tv.emplace_back(i, col.at(tag), cnt / denom);
    }
    layer.topic_vectors.resize(n, static_cast<Eigen::Index>(layer.tags.size()));
    layer.topic_vectors.setFromTriplets(tv.begin(), tv.end());
    layer.topic_vectors.makeCompressed();
    layer.adjacency = similarity_graph(layer.topic_vectors, delta);
  }
  return g;
}

void mark_experts(MultiLayerGraph& graph, const std::set<UserId>& experts) {
  for (auto& layer : graph.layers) {
    for (std::size_t i = 0; i < layer.nodes.size(); ++i) layer.is_expert[i] = experts.count(layer.nodes[i]) > 0;
  }
}

}  // namespace tuef
