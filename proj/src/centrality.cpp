#include "tuef/centrality.hpp"

#include <algorithm>
#include <numeric>
#include <queue>

namespace tuef {

namespace {

std::vector<std::vector<Eigen::Index>> neighbor_lists(const SparseMatrix& adj) {
  std::vector<std::vector<Eigen::Index>> nb(static_cast<std::size_t>(adj.outerSize()));
  for (Eigen::Index c = 0; c < adj.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(adj, c); it; ++it) {
      if (it.row() != c) nb[c].push_back(it.row());
    }
  }
  return nb;
}

}  // namespace

Eigen::VectorXd betweenness_scores(const SparseMatrix& adjacency) {
  const Eigen::Index n = adjacency.rows();
  const auto nb = neighbor_lists(adjacency);
  Eigen::VectorXd cb = Eigen::VectorXd::Zero(n);
  std::vector<Eigen::Index> stack;
  std::vector<std::vector<Eigen::Index>> pred(n);
  std::vector<double> sigma(n);
  std::vector<long> dist(n);
  std::vector<double> delta(n);
  for (Eigen::Index s = 0; s < n; ++s) {
    stack.clear();
    for (auto& p : pred) p.clear();
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(dist.begin(), dist.end(), -1);
    sigma[s] = 1.0;
    dist[s] = 0;
    std::queue<Eigen::Index> q;
    q.push(s);
    while (!q.empty()) {
      const auto v = q.front();
      q.pop();
      stack.push_back(v);
      for (auto w : nb[v]) {
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          q.push(w);
        }
        if (dist[w] == dist[v] + 1) {
          sigma[w] += sigma[v];
          pred[w].push_back(v);
        }
      }
    }
    std::fill(delta.begin(), delta.end(), 0.0);
    while (!stack.empty()) {
      const auto w = stack.back();
      stack.pop_back();
      for (auto v : pred[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
      if (w != s) cb[w] += delta[w];
    }
  }
  // Each unordered pair was counted from both endpoints.
  return cb / 2.0;
}

Eigen::VectorXd pagerank(const SparseMatrix& adjacency, double damping, double tol, int max_iter) {
  const Eigen::Index n = adjacency.rows();
  if (n == 0) return {};
  const Eigen::VectorXd strength = adjacency * Eigen::VectorXd::Ones(n);
  Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / n);
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd share = Eigen::VectorXd::Zero(n);
    double dangling = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (strength[i] > 0.0) {
        share[i] = x[i] / strength[i];
      } else {
        dangling += x[i];
      }
    }
    // Symmetric adjacency: incoming flow to j is sum_i w_ij * share_i.
    Eigen::VectorXd next = damping * (adjacency * share);
    next.array() += damping * dangling / n + (1.0 - damping) / n;
    const double err = (next - x).lpNorm<1>();
    x = std::move(next);
    if (err < tol) break;
  }
  return x;
}

bool eigenvector_centrality(const SparseMatrix& adjacency, Eigen::VectorXd& out, double tol, int max_iter) {
  const Eigen::Index n = adjacency.rows();
  out = Eigen::VectorXd::Constant(n, n > 0 ? 1.0 / std::sqrt(static_cast<double>(n)) : 0.0);
  if (n == 0) return true;
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd next = adjacency * out + out;
    const double norm = next.norm();
    if (norm == 0.0) break;
    next /= norm;
    const double err = (next - out).norm();
    out = std::move(next);
    if (err < tol) return true;
  }
  out.setZero();
  return false;
}

Eigen::VectorXd harmonic_closeness(const SparseMatrix& adjacency) {
  const Eigen::Index n = adjacency.rows();
  const auto nb = neighbor_lists(adjacency);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  std::vector<long> dist(n);
  for (Eigen::Index s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), -1);
    dist[s] = 0;
    std::queue<Eigen::Index> q;
    q.push(s);
    while (!q.empty()) {
      const auto v = q.front();
      q.pop();
      if (v != s) out[s] += 1.0 / static_cast<double>(dist[v]);
      for (auto w : nb[v]) {
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          q.push(w);
        }
      }
    }
  }
  return out;
}

CentralityTable compute_centralities(const Layer& layer) {
  const auto n = layer.size();
  const auto& adj = layer.adjacency;
  CentralityTable t;
  t.layer_id = layer.id;
  t.betweenness = betweenness_scores(adj);
  t.pagerank = pagerank(adj);
  t.eigenvector_converged = eigenvector_centrality(adj, t.eigenvector);
  t.closeness = harmonic_closeness(adj);
  t.degree = Eigen::VectorXd::Zero(n);
  t.avg_weight = Eigen::VectorXd::Zero(n);
  for (Eigen::Index c = 0; c < adj.outerSize(); ++c) {
    double sum = 0.0;
    int deg = 0;
    for (SparseMatrix::InnerIterator it(adj, c); it; ++it) {
      sum += it.value();
      ++deg;
    }
    t.degree[c] = deg;
    t.avg_weight[c] = deg > 0 ? sum / deg : 0.0;
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    if (layer.is_expert[i]) t.experts_by_betweenness.push_back(i);
  }
  // Node indices follow ascending user id, so index order breaks ties by id.
  std::stable_sort(t.experts_by_betweenness.begin(), t.experts_by_betweenness.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return t.betweenness[a] > t.betweenness[b]; });
  t.betweenness_rank.assign(n, 0);
  for (std::size_t r = 0; r < t.experts_by_betweenness.size(); ++r) {
    t.betweenness_rank[t.experts_by_betweenness[r]] = static_cast<int>(r + 1);
  }
  return t;
}

std::vector<CentralityTable> compute_centralities(const MultiLayerGraph& graph) {
  std::vector<CentralityTable> out;
  out.reserve(graph.layers.size());
  for (const auto& layer : graph.layers) out.push_back(compute_centralities(layer));
  return out;
}

}  // namespace tuef
