#include "doctest.h"
#include "support.hpp"
#include "tuef/centrality.hpp"

using namespace tuef;

namespace {

SparseMatrix graph(int n, std::initializer_list<std::tuple<int, int, double>> edges) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (auto [i, j, w] : edges) a(i, j) = a(j, i) = w;
  return a.sparseView();
}

Layer layer_from(const SparseMatrix& adj, std::vector<bool> experts) {
  Layer l;
  for (Eigen::Index i = 0; i < adj.rows(); ++i) l.nodes.push_back(100 + i);
  l.adjacency = adj;
  l.is_expert = std::move(experts);
  l.accepted_in_layer.assign(l.nodes.size(), 1);
  l.answers_in_layer.assign(l.nodes.size(), 1);
  return l;
}

}  // namespace

TEST_CASE("betweenness hand examples") {
  const auto path = betweenness_scores(graph(3, {{0, 1, 1.0}, {1, 2, 1.0}}));
  CHECK(path[0] == 0.0);
  CHECK(path[1] == 1.0);
  CHECK(path[2] == 0.0);
  const auto star = betweenness_scores(graph(4, {{0, 1, 1.0}, {0, 2, 0.5}, {0, 3, 0.7}}));
  CHECK(star[0] == 3.0);
  CHECK(star[1] == 0.0);
  const auto k4 = betweenness_scores(graph(4, {{0, 1, 1}, {0, 2, 1}, {0, 3, 1}, {1, 2, 1}, {1, 3, 1}, {2, 3, 1}}));
  CHECK(k4.cwiseAbs().maxCoeff() == 0.0);
  CHECK(betweenness_scores(SparseMatrix(0, 0)).size() == 0);
}

TEST_CASE("betweenness agrees with shortest-path enumeration") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 11);
    const auto a = testing::random_graph(n, 0.15 + 0.05 * (trial % 10), rng);
    const auto got = betweenness_scores(a.sparseView());
    const auto want = testing::betweenness_by_enumeration(a);
    for (int i = 0; i < n; ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
  }
}

TEST_CASE("pagerank") {
  const auto two = pagerank(graph(2, {{0, 1, 0.8}}));
  CHECK(two[0] == doctest::Approx(0.5));
  CHECK(two[1] == doctest::Approx(0.5));
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = testing::random_graph(10, 0.3, rng);
    const auto pr = pagerank(a.sparseView());
    CHECK(pr.sum() == doctest::Approx(1.0).epsilon(1e-6));
    const Eigen::MatrixXd scaled = 3.7 * a;
    const auto pr2 = pagerank(scaled.sparseView());
    CHECK((pr - pr2).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("eigenvector, closeness, degree and average weight") {
  Eigen::VectorXd ev;
  CHECK(eigenvector_centrality(graph(3, {{0, 1, 0.6}, {1, 2, 0.6}, {0, 2, 0.6}}), ev));
  CHECK(ev[0] == doctest::Approx(ev[1]));
  CHECK(ev[1] == doctest::Approx(ev[2]));
  CHECK(ev.norm() == doctest::Approx(1.0));

  const auto iso = graph(3, {{0, 1, 0.5}});
  const auto t = compute_centralities(layer_from(iso, {true, true, false}));
  CHECK(t.closeness[2] == 0.0);
  CHECK(t.degree[2] == 0.0);
  CHECK(t.avg_weight[2] == 0.0);
  CHECK(t.degree[0] == 1.0);
  CHECK(t.avg_weight[0] == doctest::Approx(0.5));

  const auto chain = harmonic_closeness(graph(3, {{0, 1, 1.0}, {1, 2, 1.0}}));
  CHECK(chain[0] == doctest::Approx(1.5));
  CHECK(chain[1] == doctest::Approx(2.0));
}

TEST_CASE("betweenness ranks cover the experts of a layer") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const auto a = testing::random_graph(9, 0.35, rng);
    std::vector<bool> experts(9);
    int n_exp = 0;
    for (int i = 0; i < 9; ++i) {
      experts[i] = rng() % 2 == 0;
      n_exp += experts[i];
    }
    const auto t = compute_centralities(layer_from(a.sparseView(), experts));
    std::vector<int> ranks;
    for (int i = 0; i < 9; ++i) {
      if (experts[i]) {
        ranks.push_back(t.betweenness_rank[i]);
      } else {
        CHECK(t.betweenness_rank[i] == 0);
      }
    }
    std::sort(ranks.begin(), ranks.end());
    for (int r = 0; r < n_exp; ++r) CHECK(ranks[r] == r + 1);
    for (std::size_t r = 1; r < t.experts_by_betweenness.size(); ++r) {
      CHECK(t.betweenness[t.experts_by_betweenness[r - 1]] >= t.betweenness[t.experts_by_betweenness[r]]);
    }
    for (int i = 0; i < 9; ++i) CHECK(t.degree[i] == static_cast<double>((a.row(i).array() != 0.0).count()));
  }
}

TEST_CASE("relabeling nodes permutes the scores") {
  std::mt19937_64 rng(12);
  const auto a = testing::random_graph(8, 0.4, rng);
  std::vector<int> perm(8);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Eigen::MatrixXd b(8, 8);
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) b(i, j) = a(perm[i], perm[j]);
  }
  const auto ta = compute_centralities(layer_from(a.sparseView(), std::vector<bool>(8, true)));
  const auto tb = compute_centralities(layer_from(b.sparseView(), std::vector<bool>(8, true)));
  for (int i = 0; i < 8; ++i) {
    CHECK(tb.betweenness[i] == doctest::Approx(ta.betweenness[perm[i]]));
    CHECK(tb.pagerank[i] == doctest::Approx(ta.pagerank[perm[i]]));
    CHECK(tb.closeness[i] == doctest::Approx(ta.closeness[perm[i]]));
    CHECK(tb.eigenvector[i] == doctest::Approx(ta.eigenvector[perm[i]]).epsilon(1e-6));
  }
}
