#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tuef/centrality.hpp"
#include "tuef/ingest.hpp"
#include "tuef/mlg.hpp"
#include "tuef/retrieval.hpp"

namespace tuef {

enum class SelectionMode { kFull, kNetworkOnly, kContentOnly, kNoRandomWalk };
enum class Method { kNetwork = 0, kContent = 1 };

std::string to_string(SelectionMode m);
SelectionMode selection_mode_from_string(const std::string& s);
std::string to_string(Method m);

struct SelectionConfig {
  double alpha = 0.001;
  int walks_per_expert = 5;
  int walk_steps = 10;
  std::size_t top_n_retrieval = 1000;
  std::uint64_t rng_seed = 42;
  SelectionMode mode = SelectionMode::kFull;
  bool tag_first = true;

  void validate() const;
};

struct TraceEntry {
  /// 1-based list position for collected experts; scanned length + walk step otherwise.
  int steps = 0;
  int visit_count = 0;
  bool discovered_in_collection = false;
};

/// Selection trace of one (layer, method) pipeline.
struct MethodTrace {
  int layer = 0;
  Method method = Method::kNetwork;
  std::vector<UserId> initial;  // D_i in collection order
  double final_p = 1.0;
  std::map<UserId, TraceEntry> entries;
};

struct CollectResult {
  std::vector<UserId> selected;
  double p = 1.0;
  /// p after each pick.
  std::vector<double> p_history;
};

/// Static per-user answer statistics needed by the smoothing term.
using UserStatsMap = std::map<UserId, UserStats>;

/// mu_u = (accepted_u / answers_u) * (answers of u in the layer / max answers in the layer).
double answer_probability(UserId user, const Layer& layer, const UserStatsMap& users);

/// Scans `sorted_experts` in order, updating p <- p * (1 - mu_u) until p <= alpha.
CollectResult collect(const std::vector<UserId>& sorted_experts, const Layer& layer, const UserStatsMap& users,
                      double alpha);

/// Seed for the walks of one start node; independent of layer iteration order.
std::uint64_t walk_seed(std::uint64_t base, PostId query, int layer, Method method, std::size_t start_index);

/// Next node of a weighted walk from `node`, or nullopt at an isolated node. `u` is uniform in [0,1).
std::optional<Eigen::Index> walk_step(const Layer& layer, Eigen::Index node, double u);

/// Runs walks_per_expert walks of walk_steps steps from every node of `trace.initial`; every
/// expert visited joins `trace.entries`. Non-experts are traversed but not recorded.
void random_walk_explore(const Layer& layer, const SelectionConfig& cfg, PostId query, MethodTrace& trace);

struct RetrievalResults {
  RankedQuestions tag;
  RankedQuestions text;
};

RetrievalResults retrieve(const Question& q, const Indexes& indexes, std::size_t top_n,
                          std::optional<PostId> exclude = std::nullopt);

struct CandidateSet {
  PostId query = 0;
  std::vector<int> layers_used;
  /// True when none of the question's tags is known and every layer was searched.
  bool fallback_all_layers = false;
  std::vector<MethodTrace> traces;
  std::set<UserId> candidates;
};

struct SelectionContext {
  const MultiLayerGraph& graph;
  const std::vector<CentralityTable>& centralities;
  const UserStatsMap& users;
};

CandidateSet select_candidates(const Question& q, const SelectionContext& ctx, const RetrievalResults& retrieved,
                               const SelectionConfig& cfg);

}  // namespace tuef
