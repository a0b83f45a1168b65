#include "doctest.h"
#include "support.hpp"
#include "tuef/synthetic.hpp"
#include "tuef/topics.hpp"

using namespace tuef;

namespace {

std::size_t row(const CoMatrix& m, const std::string& t) {
  return static_cast<std::size_t>(std::find(m.tags.begin(), m.tags.end(), t) - m.tags.begin());
}

}  // namespace

TEST_CASE("co-occurrence counts") {
  testing::DatasetBuilder b;
  b.question(9, {"a", "b"}, {1});
  b.question(9, {"a", "b"}, {1});
  b.question(9, {"a", "c"}, {1});
  b.question(9, {"d"}, {1});
  const auto raw = build_cooccurrence(b.build(), 1, false);
  REQUIRE(raw.features == std::vector<std::string>{"a"});
  CHECK(raw.values(row(raw, "b"), 0) == 2);
  CHECK(raw.values(row(raw, "c"), 0) == 1);
  CHECK(raw.values(row(raw, "a"), 0) == 3);
  CHECK(raw.values(row(raw, "d"), 0) == 0);

  const auto m = build_cooccurrence(b.build(), 2);
  CHECK(m.normalized);
  CHECK(m.values.row(row(m, "d")).sum() == 0.0);
  for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
    const double s = m.values.row(i).sum();
    if (s > 0) CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK_THROWS_AS(build_cooccurrence(b.build(), 5), Error);
}

TEST_CASE("feature ties break lexicographically") {
  testing::DatasetBuilder b;
  b.question(9, {"zeta", "beta"}, {1});
  b.question(9, {"alpha"}, {1});
  const auto m = build_cooccurrence(b.build(), 2);
  CHECK(m.features == std::vector<std::string>{"alpha", "beta"});
}

TEST_CASE("k-means objective never increases") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd pts(120, 4);
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
      for (Eigen::Index j = 0; j < pts.cols(); ++j) pts(i, j) = g(rng) + 3.0 * static_cast<double>(i % 4 == j);
    }
    const auto fit = kmeans(pts, 2 + trial % 5, 100 + trial);
    REQUIRE(!fit.objective.empty());
    for (std::size_t i = 1; i < fit.objective.size(); ++i) CHECK(fit.objective[i] <= fit.objective[i - 1] + 1e-12);
  }
}

TEST_CASE("silhouette model selection recovers orthogonal groups") {
  CoMatrix m;
  m.features = {"f0", "f1"};
  m.values.resize(6, 2);
  m.values << 1, 0, 1, 0, 1, 0, 0, 1, 0, 1, 0, 1;
  for (int i = 0; i < 6; ++i) m.tags.push_back("t" + std::to_string(i));
  m.normalized = true;
  const std::vector<int> ks = {2, 3};
  const auto c = cluster_tags(m, ks, 5);
  CHECK(c.k == 2);
  CHECK(c.silhouette_by_k.at(2) == doctest::Approx(1.0));
  CHECK(c.silhouette_by_k.at(3) < c.silhouette_by_k.at(2));
  CHECK(c.assignment.at("t0") == c.assignment.at("t2"));
  CHECK(c.assignment.at("t3") == c.assignment.at("t5"));
  CHECK(c.assignment.at("t0") != c.assignment.at("t3"));
}

TEST_CASE("identical rows give a degenerate clustering") {
  CoMatrix m;
  m.features = {"f"};
  m.values = Eigen::MatrixXd::Ones(4, 1);
  m.tags = {"a", "b", "c", "d"};
  m.normalized = true;
  const std::vector<int> ks = {2};
  const auto c = cluster_tags(m, ks, 1);
  CHECK(c.k == 2);
  CHECK(c.silhouette_by_k.at(2) <= 0.0);
  std::set<int> used;
  for (const auto& [t, k] : c.assignment) used.insert(k);
  CHECK(used.size() == 2);
}

TEST_CASE("cluster_tags rejects bad inputs") {
  CoMatrix m;
  m.values = Eigen::MatrixXd::Identity(3, 3);
  m.tags = {"a", "b", "c"};
  m.normalized = true;
  CHECK_THROWS_AS(cluster_tags(m, std::vector<int>{}, 1), Error);
  CHECK_THROWS_AS(cluster_tags(m, std::vector<int>{4}, 1), Error);
  CHECK_THROWS_AS(cluster_tags(m, std::vector<int>{1}, 1), Error);
  m.normalized = false;
  CHECK_THROWS_AS(cluster_tags(m, std::vector<int>{2}, 1), Error);
}

TEST_CASE("silhouette stays in [-1, 1] and clustering is permutation invariant") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd pts(30, 3);
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) pts(i, j) = u(rng) + (i % 3 == j ? 4.0 : 0.0);
  }
  for (int k = 2; k <= 6; ++k) {
    const auto fit = kmeans(pts, k, 1);
    const double s = silhouette(pts, fit.assignment, k);
    CHECK(s >= -1.0);
    CHECK(s <= 1.0);
  }
  std::vector<int> perm(30);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Eigen::MatrixXd shuffled(30, 3);
  for (int i = 0; i < 30; ++i) shuffled.row(i) = pts.row(perm[i]);
  const auto a = kmeans(pts, 3, 1);
  const auto b = kmeans(shuffled, 3, 1);
  for (int i = 0; i < 30; ++i) {
    for (int j = 0; j < 30; ++j) {
      CHECK((a.assignment[perm[i]] == a.assignment[perm[j]]) == (b.assignment[i] == b.assignment[j]));
    }
  }
}

TEST_CASE("single cluster covers every tag") {
  testing::DatasetBuilder b;
  b.question(9, {"a", "b"}, {1});
  b.question(9, {"c"}, {1});
  const auto c = single_cluster(build_cooccurrence(b.build(), 2));
  CHECK(c.k == 1);
  CHECK(c.assignment.size() == 3);
  for (const auto& [t, k] : c.assignment) CHECK(k == 0);
}
