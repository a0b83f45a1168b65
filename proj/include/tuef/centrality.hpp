#pragma once

#include <vector>

#include <Eigen/Dense>

#include "tuef/mlg.hpp"

namespace tuef {

/// Per-node scores of one layer, aligned with Layer::nodes.
struct CentralityTable {
  int layer_id = 0;
  Eigen::VectorXd betweenness;
  Eigen::VectorXd eigenvector;
  Eigen::VectorXd pagerank;
  Eigen::VectorXd closeness;
  Eigen::VectorXd degree;
  Eigen::VectorXd avg_weight;
  /// 1 = highest betweenness among the layer's experts; 0 for non-experts.
  std::vector<int> betweenness_rank;
  /// Expert node indices ordered by betweenness (descending, ties by user id).
  std::vector<Eigen::Index> experts_by_betweenness;
  bool eigenvector_converged = true;
};

/// Exact unweighted betweenness (Brandes), unnormalized pair counts, endpoints excluded.
Eigen::VectorXd betweenness_scores(const SparseMatrix& adjacency);

/// Weighted PageRank; isolated nodes redistribute their mass uniformly.
Eigen::VectorXd pagerank(const SparseMatrix& adjacency, double damping = 0.85, double tol = 1e-8,
                         int max_iter = 1000);

/// Weighted eigenvector centrality by power iteration on (A + I), L2-normalized.
/// Returns false (and a zero vector) if it does not converge.
bool eigenvector_centrality(const SparseMatrix& adjacency, Eigen::VectorXd& out, double tol = 1e-8,
                            int max_iter = 1000);

/// Harmonic closeness on hop distances: sum over reachable v of 1 / d(u, v).
Eigen::VectorXd harmonic_closeness(const SparseMatrix& adjacency);

/// Betweenness plus the auxiliary centralities used as ranking features.
CentralityTable compute_centralities(const Layer& layer);

std::vector<CentralityTable> compute_centralities(const MultiLayerGraph& graph);

}  // namespace tuef
