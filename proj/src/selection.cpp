#include "tuef/selection.hpp"

#include <algorithm>
#include <random>

namespace tuef {

std::string to_string(SelectionMode m) {
  switch (m) {
    case SelectionMode::kFull: return "full";
    case SelectionMode::kNetworkOnly: return "network_only";
    case SelectionMode::kContentOnly: return "content_only";
    case SelectionMode::kNoRandomWalk: return "no_random_walk";
  }
  return "full";
}

SelectionMode selection_mode_from_string(const std::string& s) {
  if (s == "full") return SelectionMode::kFull;
  if (s == "network_only") return SelectionMode::kNetworkOnly;
  if (s == "content_only") return SelectionMode::kContentOnly;
  if (s == "no_random_walk") return SelectionMode::kNoRandomWalk;
  throw Error("unknown selection mode " + s);
}

std::string to_string(Method m) { return m == Method::kNetwork ? "network" : "content"; }

void SelectionConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error("alpha must lie in (0,1)");
  if (walks_per_expert < 0 || walk_steps < 0) throw Error("walk counts must be non-negative");
  if (top_n_retrieval < 1) throw Error("top_n must be at least 1");
}

double answer_probability(UserId user, const Layer& layer, const UserStatsMap& users) {
  const auto idx = layer.index_of(user);
  if (!idx) throw Error("user " + std::to_string(user) + " is not a node of layer " + std::to_string(layer.id));
  const auto& st = users.at(user);
  if (st.answers == 0 || layer.max_answers_in_layer == 0) return 0.0;
  const double ratio = static_cast<double>(st.accepted) / st.answers;
  const double activity = static_cast<double>(layer.answers_in_layer[*idx]) / layer.max_answers_in_layer;
  return std::clamp(ratio * activity, 0.0, 1.0);
}

CollectResult collect(const std::vector<UserId>& sorted_experts, const Layer& layer, const UserStatsMap& users,
                      double alpha) {
  CollectResult r;
  for (UserId u : sorted_experts) {
    if (r.p <= alpha) break;
    r.selected.push_back(u);
    r.p *= 1.0 - answer_probability(u, layer, users);
    r.p_history.push_back(r.p);
  }
  return r;
}

std::uint64_t walk_seed(std::uint64_t base, PostId query, int layer, Method method, std::size_t start_index) {
  auto mix = [](std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  };
  std::uint64_t h = mix(base);
  h = mix(h ^ static_cast<std::uint64_t>(query));
  h = mix(h ^ static_cast<std::uint64_t>(layer));
  h = mix(h ^ static_cast<std::uint64_t>(method));
  h = mix(h ^ static_cast<std::uint64_t>(start_index));
  return h;
}

std::optional<Eigen::Index> walk_step(const Layer& layer, Eigen::Index node, double u) {
  double total = 0.0;
  for (SparseMatrix::InnerIterator it(layer.adjacency, node); it; ++it) total += it.value();
  if (total <= 0.0) return std::nullopt;
  double target = u * total;
  std::optional<Eigen::Index> last;
  for (SparseMatrix::InnerIterator it(layer.adjacency, node); it; ++it) {
    last = it.row();
    target -= it.value();
    if (target < 0.0) return it.row();
  }
  return last;
}

void random_walk_explore(const Layer& layer, const SelectionConfig& cfg, PostId query, MethodTrace& trace) {
  const int scanned = static_cast<int>(trace.initial.size());
  for (std::size_t s = 0; s < trace.initial.size(); ++s) {
    std::mt19937_64 rng(walk_seed(cfg.rng_seed, query, layer.id, trace.method, s));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const auto start = layer.index_of(trace.initial[s]);
    if (!start) continue;
    for (int w = 0; w < cfg.walks_per_expert; ++w) {
      Eigen::Index cur = *start;
      for (int step = 1; step <= cfg.walk_steps; ++step) {
        auto next = walk_step(layer, cur, unif(rng));
        if (!next) break;
        cur = *next;
        if (!layer.is_expert[cur]) continue;
        auto [it, inserted] = trace.entries.try_emplace(layer.nodes[cur]);
        auto& e = it->second;
        if (inserted) {
          e.steps = scanned + step;
        } else if (!e.discovered_in_collection) {
          e.steps = std::min(e.steps, scanned + step);
        }
        ++e.visit_count;
      }
    }
  }
}

RetrievalResults retrieve(const Question& q, const Indexes& indexes, std::size_t top_n, std::optional<PostId> exclude) {
  return {bm25_query(indexes.tag, tag_query(q), top_n, {}, exclude),
          bm25_query(indexes.text, text_query(q, indexes.tokenizer), top_n, {}, exclude)};
}

namespace {

std::vector<UserId> network_order(const Layer& layer, const CentralityTable& table) {
  std::vector<UserId> out;
  out.reserve(table.experts_by_betweenness.size());
  for (auto i : table.experts_by_betweenness) out.push_back(layer.nodes[i]);
  return out;
}

MethodTrace run_method(const Layer& layer, Method method, const std::vector<UserId>& order, const SelectionContext& ctx,
                       const SelectionConfig& cfg, PostId query, bool walks) {
  MethodTrace t;
  t.layer = layer.id;
  t.method = method;
  auto c = collect(order, layer, ctx.users, cfg.alpha);
  t.initial = std::move(c.selected);
  t.final_p = c.p;
  for (std::size_t i = 0; i < t.initial.size(); ++i) {
    auto& e = t.entries[t.initial[i]];
    e.steps = static_cast<int>(i + 1);
    e.visit_count = 1;
    e.discovered_in_collection = true;
  }
  if (walks) random_walk_explore(layer, cfg, query, t);
  return t;
}

}  // namespace

CandidateSet select_candidates(const Question& q, const SelectionContext& ctx, const RetrievalResults& retrieved,
                               const SelectionConfig& cfg) {
  cfg.validate();
  CandidateSet cs;
  cs.query = q.id;
  const auto layers = layers_of(q.tags, ctx.graph.clustering);
  if (layers.empty()) {
    cs.fallback_all_layers = true;
    for (const auto& l : ctx.graph.layers) cs.layers_used.push_back(l.id);
  } else {
    cs.layers_used.assign(layers.begin(), layers.end());
  }

  const bool network = cfg.mode != SelectionMode::kContentOnly && !(cs.fallback_all_layers && cfg.mode != SelectionMode::kNetworkOnly);
  const bool content = cfg.mode != SelectionMode::kNetworkOnly;
  const bool walks = cfg.mode != SelectionMode::kNoRandomWalk;
  for (int l : cs.layers_used) {
    const Layer& layer = ctx.graph.layers.at(l);
    if (network) {
      cs.traces.push_back(
          run_method(layer, Method::kNetwork, network_order(layer, ctx.centralities.at(l)), ctx, cfg, q.id, walks));
    }
    if (content) {
      const auto order = content_order(retrieved.tag, retrieved.text, layer, cfg.tag_first);
      cs.traces.push_back(run_method(layer, Method::kContent, order, ctx, cfg, q.id, walks));
    }
  }
  for (const auto& t : cs.traces) {
    for (const auto& [u, e] : t.entries) cs.candidates.insert(u);
  }
  return cs;
}

}  // namespace tuef
