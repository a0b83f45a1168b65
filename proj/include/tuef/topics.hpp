#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tuef/ingest.hpp"

namespace tuef {

/// Tag x feature-tag co-occurrence counts (or row fractions once normalized).
struct CoMatrix {
  std::vector<std::string> tags;      // rows, lexicographic
  std::vector<std::string> features;  // the lambda most frequent tags
  Eigen::MatrixXd values;
  bool normalized = false;
};

/// Row-normalized unless `normalize` is false (raw question counts).
CoMatrix build_cooccurrence(const Dataset& train, int lambda, bool normalize = true);
/// Divides every nonzero row by its sum; zero rows stay zero.
void normalize_rows(CoMatrix& m);

struct KMeansResult {
  std::vector<int> assignment;
  Eigen::MatrixXd centroids;
  /// Within-cluster sum of squares after each iteration.
  std::vector<double> objective;
  int iterations = 0;
  bool converged = false;
};

struct TagClustering {
  int k = 0;
  std::map<std::string, int> assignment;
  Eigen::MatrixXd centroids;
  std::map<int, double> silhouette_by_k;
  std::vector<std::string> features;

  std::optional<int> cluster_of(const std::string& tag) const {
    auto it = assignment.find(tag);
    if (it == assignment.end()) return std::nullopt;
    return it->second;
  }
};

inline constexpr std::size_t kSilhouetteSampleCap = 20000;

namespace detail {

template <typename Derived>
double wcss(const Eigen::MatrixBase<Derived>& points, const std::vector<int>& assignment,
            const Eigen::MatrixXd& centroids) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    total += (points.row(i) - centroids.row(assignment[i])).squaredNorm();
  }
  return total;
}

}  // namespace detail

/// Lloyd's k-means with k-means++ seeding. Empty clusters take over the point farthest from
/// its centroid. Stops when no centroid moves more than `tol` (Euclidean).
template <typename Derived>
KMeansResult kmeans(const Eigen::MatrixBase<Derived>& points, int k, std::uint64_t seed,
                    int max_iter = 300, double tol = 1e-6) {
  using Eigen::Index;
  const Index n = points.rows();
  if (k < 1 || k > n) throw Error("k-means needs 1 <= k <= number of points");
  std::mt19937_64 rng(seed);

  KMeansResult res;
  res.centroids.resize(k, points.cols());
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::uniform_int_distribution<Index> pick(0, n - 1);
  res.centroids.row(0) = points.row(pick(rng));
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (Index i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], (points.row(i) - res.centroids.row(c - 1)).squaredNorm());
      total += d2[i];
    }
    Index chosen = 0;
    if (total > 0.0) {
      double r = std::uniform_real_distribution<double>(0.0, total)(rng);
      for (chosen = 0; chosen < n - 1; ++chosen) {
        r -= d2[chosen];
        if (r < 0.0) break;
      }
    } else {
      chosen = pick(rng);
    }
    res.centroids.row(c) = points.row(chosen);
  }

  res.assignment.assign(n, 0);
  std::vector<double> dist(n, 0.0);
  for (int it = 0; it < max_iter; ++it) {
    std::vector<Index> counts(k, 0);
    for (Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = (points.row(i) - res.centroids.row(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      res.assignment[i] = best;
      dist[i] = best_d;
      ++counts[best];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      Index far = -1;
      for (Index i = 0; i < n; ++i) {
        if (counts[res.assignment[i]] > 1 && (far < 0 || dist[i] > dist[far])) far = i;
      }
      if (far < 0) break;
      --counts[res.assignment[far]];
      res.assignment[far] = c;
      dist[far] = 0.0;
      counts[c] = 1;
    }

    Eigen::MatrixXd next = Eigen::MatrixXd::Zero(k, points.cols());
    for (Index i = 0; i < n; ++i) next.row(res.assignment[i]) += points.row(i);
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        next.row(c) /= static_cast<double>(counts[c]);
      } else {
        next.row(c) = res.centroids.row(c);
      }
    }
    const double shift = (next - res.centroids).rowwise().norm().maxCoeff();
    res.centroids = std::move(next);
    res.objective.push_back(detail::wcss(points, res.assignment, res.centroids));
    res.iterations = it + 1;
    if (shift < tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

/// Mean silhouette over the given rows (all rows when `rows` is empty). Singletons score 0.
template <typename Derived>
double silhouette(const Eigen::MatrixBase<Derived>& points, const std::vector<int>& assignment, int k,
                  std::span<const Eigen::Index> rows = {}) {
  using Eigen::Index;
  std::vector<Index> idx(rows.begin(), rows.end());
  if (idx.empty()) {
    idx.resize(points.rows());
    for (Index i = 0; i < points.rows(); ++i) idx[i] = i;
  }
  if (idx.empty()) return 0.0;
  double total = 0.0;
  std::vector<double> sum(k);
  std::vector<Index> cnt(k);
  for (Index i : idx) {
    std::fill(sum.begin(), sum.end(), 0.0);
    std::fill(cnt.begin(), cnt.end(), 0);
    for (Index j : idx) {
      if (j == i) continue;
      sum[assignment[j]] += (points.row(i) - points.row(j)).norm();
      ++cnt[assignment[j]];
    }
    const int own = assignment[i];
    if (cnt[own] == 0) continue;
    const double a = sum[own] / static_cast<double>(cnt[own]);
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      if (c != own && cnt[c] > 0) b = std::min(b, sum[c] / static_cast<double>(cnt[c]));
    }
    if (!std::isfinite(b)) continue;
    const double m = std::max(a, b);
    if (m > 0.0) total += (b - a) / m;
  }
  return total / static_cast<double>(idx.size());
}

/// Runs k-means for each candidate k and keeps the clustering with the highest silhouette
/// (ties go to the smaller k).
TagClustering cluster_tags(const CoMatrix& normalized, std::span<const int> k_candidates, std::uint64_t seed);

/// Every tag in one cluster.
TagClustering single_cluster(const CoMatrix& normalized);

}  // namespace tuef
