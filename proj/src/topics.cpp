#include "tuef/topics.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

namespace tuef {

CoMatrix build_cooccurrence(const Dataset& train, int lambda, bool normalize) {
  if (train.questions.empty()) throw Error("co-occurrence needs at least one training question");
  if (lambda < 1) throw Error("lambda must be positive");

  std::map<std::string, int> freq;
  for (const auto& [qid, q] : train.questions) {
    for (const auto& t : q.tags) ++freq[t];
  }
  if (static_cast<std::size_t>(lambda) > freq.size()) {
    throw Error("lambda exceeds the number of distinct tags");
  }

  CoMatrix m;
  m.tags.reserve(freq.size());
  for (const auto& [t, c] : freq) m.tags.push_back(t);
  std::vector<std::pair<std::string, int>> by_freq(freq.begin(), freq.end());
  std::stable_sort(by_freq.begin(), by_freq.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  for (int j = 0; j < lambda; ++j) m.features.push_back(by_freq[j].first);

  std::unordered_map<std::string, Eigen::Index> row;
  for (std::size_t i = 0; i < m.tags.size(); ++i) row.emplace(m.tags[i], static_cast<Eigen::Index>(i));
  std::unordered_map<std::string, Eigen::Index> col;
  for (std::size_t j = 0; j < m.features.size(); ++j) col.emplace(m.features[j], static_cast<Eigen::Index>(j));

  m.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m.tags.size()), lambda);
  for (const auto& [qid, q] : train.questions) {
    for (const auto& f : q.tags) {
      auto c = col.find(f);
      if (c == col.end()) continue;
      for (const auto& t : q.tags) m.values(row.at(t), c->second) += 1.0;
    }
  }
  if (normalize) normalize_rows(m);
  return m;
}

void normalize_rows(CoMatrix& m) {
  if (m.normalized) return;
  for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
    const double s = m.values.row(i).sum();
    if (s > 0.0) m.values.row(i) /= s;
  }
  m.normalized = true;
}

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

TagClustering cluster_tags(const CoMatrix& normalized, std::span<const int> k_candidates, std::uint64_t seed) {
  if (k_candidates.empty()) throw Error("no candidate k supplied");
  if (!normalized.normalized) throw Error("co-occurrence matrix must be row-normalized");
  const auto n = normalized.values.rows();
  for (int k : k_candidates) {
    if (k < 2 || k > n) throw Error("candidate k must satisfy 2 <= k <= number of tags");
  }

  std::vector<Eigen::Index> sample;
  if (static_cast<std::size_t>(n) > kSilhouetteSampleCap) {
    std::vector<Eigen::Index> all(n);
    std::iota(all.begin(), all.end(), Eigen::Index{0});
    std::mt19937_64 rng(mix_seed(seed, 0xC0FFEE));
    std::sample(all.begin(), all.end(), std::back_inserter(sample), kSilhouetteSampleCap, rng);
  }

  std::vector<int> ks(k_candidates.begin(), k_candidates.end());
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());

  TagClustering best;
  double best_score = -std::numeric_limits<double>::infinity();
  KMeansResult best_fit;
  for (int k : ks) {
    auto fit = kmeans(normalized.values, k, mix_seed(seed, static_cast<std::uint64_t>(k)));
    const double s = silhouette(normalized.values, fit.assignment, k, sample);
    best.silhouette_by_k[k] = s;
    if (s > best_score) {
      best_score = s;
      best.k = k;
      best_fit = std::move(fit);
    }
  }
  best.centroids = best_fit.centroids;
  best.features = normalized.features;
  for (std::size_t i = 0; i < normalized.tags.size(); ++i) {
    best.assignment.emplace(normalized.tags[i], best_fit.assignment[i]);
  }
  return best;
}

TagClustering single_cluster(const CoMatrix& normalized) {
  TagClustering c;
  c.k = 1;
  c.features = normalized.features;
  c.centroids = normalized.values.colwise().mean();
  for (const auto& t : normalized.tags) c.assignment.emplace(t, 0);
  return c;
}

}  // namespace tuef
