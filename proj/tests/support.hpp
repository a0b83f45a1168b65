#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tuef/ingest.hpp"
#include "tuef/mlg.hpp"
#include "tuef/pipeline.hpp"
#include "tuef/ranker.hpp"
#include "tuef/synthetic.hpp"

namespace tuef::testing {

/// Builds small cleaned datasets by hand: one call per question with its answerers.
class DatasetBuilder {
 public:
  PostId question(UserId asker, std::vector<std::string> tags, const std::vector<UserId>& answerers,
                  std::size_t accepted = 0, std::string title = "", std::string body = "") {
    Question q;
    q.id = next_++;
    q.asker = asker;
    q.creation_ts = ts_;
    ts_ += 3600;
    q.title = std::move(title);
    q.body = std::move(body);
    q.tags = std::move(tags);
    for (std::size_t i = 0; i < answerers.size(); ++i) {
      Answer a{next_++, answerers[i], q.creation_ts + 60 * static_cast<Timestamp>(i + 1), q.id, "answer"};
      if (i == accepted) q.accepted_answer_id = a.id;
      ds_.answers.emplace(a.id, a);
    }
    ds_.questions.emplace(q.id, q);
    return q.id;
  }
  void reputation(UserId u, std::int64_t r) { ds_.users[u].reputation = r; }
  Dataset build() {
    Dataset out = ds_;
    recompute_user_stats(out);
    return out;
  }

 private:
  Dataset ds_;
  PostId next_ = 1;
  Timestamp ts_ = 1600000000;
};

inline SparseMatrix sparse_from_dense(const Eigen::MatrixXd& m) { return m.sparseView(); }

/// Random symmetric graph with weights in (0,1].
inline Eigen::MatrixXd random_graph(int n, double density, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (u(rng) < density) a(i, j) = a(j, i) = 0.05 + 0.95 * u(rng);
    }
  }
  return a;
}

/// Betweenness by explicit enumeration of every shortest path of every unordered pair
/// (Floyd-Warshall hop distances, depth-first path listing).
inline std::vector<double> betweenness_by_enumeration(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  const int inf = std::numeric_limits<int>::max() / 4;
  std::vector<std::vector<int>> d(n, std::vector<int>(n, inf));
  for (int i = 0; i < n; ++i) {
    d[i][i] = 0;
    for (int j = 0; j < n; ++j) {
      if (a(i, j) != 0.0) d[i][j] = 1;
    }
  }
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
    }
  }
  std::vector<double> bc(n, 0.0);
  for (int s = 0; s < n; ++s) {
    for (int t = s + 1; t < n; ++t) {
      if (d[s][t] >= inf || d[s][t] < 2) continue;
      std::vector<std::vector<int>> paths;
      std::vector<int> path = {s};
      auto dfs = [&](auto&& self, int v) -> void {
        if (v == t) {
          paths.push_back(path);
          return;
        }
        for (int w = 0; w < n; ++w) {
          if (a(v, w) != 0.0 && d[s][w] == d[s][v] + 1 && d[w][t] == d[v][t] - 1) {
            path.push_back(w);
            self(self, w);
            path.pop_back();
          }
        }
      };
      dfs(dfs, s);
      for (const auto& p : paths) {
        for (std::size_t i = 1; i + 1 < p.size(); ++i) bc[p[i]] += 1.0 / static_cast<double>(paths.size());
      }
    }
  }
  return bc;
}

/// Query groups where column 0 is 1 exactly for the positive candidate; the other columns are noise.
inline std::vector<QueryGroup> separable_groups(int queries, int candidates, int noise_cols, std::uint64_t seed,
                                                double signal_noise = 0.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<QueryGroup> out;
  for (int q = 0; q < queries; ++q) {
    QueryGroup g;
    g.query = q + 1;
    g.features.resize(candidates, 1 + noise_cols);
    const int pos = static_cast<int>(rng() % static_cast<std::uint64_t>(candidates));
    for (int c = 0; c < candidates; ++c) {
      g.experts.push_back(1000 * (q + 1) + c);
      g.labels.push_back(c == pos ? 1 : 0);
      g.features(c, 0) = (c == pos ? 1.0 : 0.0) + signal_noise * u(rng);
      for (int f = 1; f <= noise_cols; ++f) g.features(c, f) = u(rng);
    }
    out.push_back(std::move(g));
  }
  return out;
}

inline std::vector<std::string> column_names(int n) {
  std::vector<std::string> names;
  for (int i = 0; i < n; ++i) names.push_back("f" + std::to_string(i));
  return names;
}

inline SyntheticSpec small_spec() {
  SyntheticSpec s;
  s.users = 80;
  s.experts = 8;
  s.tags = 12;
  s.topics = 2;
  s.questions = 1200;
  s.active_users = 15;
  return s;
}

/// Fresh directory holding posts.jsonl for `spec`, and a config pointing at it.
inline PipelineConfig small_project(const std::filesystem::path& dir, const SyntheticSpec& spec = small_spec()) {
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  write_posts_jsonl(generate_synthetic(spec).posts, dir / "posts.jsonl");
  PipelineConfig cfg;
  cfg.data = dir / "posts.jsonl";
  cfg.artifacts = dir / "artifacts";
  cfg.lambda = 6;
  cfg.k_max = 6;
  cfg.beta = 5;
  cfg.epsilon = 2;
  cfg.tuning_budget = 0;
  cfg.verbose = false;
  return cfg;
}

inline std::filesystem::path scratch(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("tuef_test_" + name);
}

}  // namespace tuef::testing
