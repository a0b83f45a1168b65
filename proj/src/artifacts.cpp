#include "tuef/artifacts.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace tuef {

using nlohmann::json;

namespace {

json meta_line(const std::string& stamp) { return {{"_meta", {{"config_hash", stamp}}}}; }

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("missing artifact " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error("corrupt artifact " + path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(1) + "\n"); }

/// Calls `fn` on every record of a JSONL artifact; returns the stamp from its meta line.
template <typename Fn>
std::string for_each_record(const std::filesystem::path& path, Fn fn) {
  std::ifstream in(path);
  if (!in) throw Error("missing artifact " + path.string());
  std::string line;
  std::string stamp;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (j.contains("_meta")) {
      stamp = j["_meta"].value("config_hash", "");
      continue;
    }
    fn(j);
  }
  return stamp;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

}  // namespace

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("missing artifact " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_dataset_dir(const Dataset& ds, const std::filesystem::path& dir, const std::string& stamp) {
  std::filesystem::create_directories(dir);
  {
    auto out = open_out(dir / "questions.jsonl");
    out << meta_line(stamp).dump() << '\n';
    for (const auto& [id, q] : ds.questions) {
      out << json{{"id", q.id},
                  {"asker", q.asker},
                  {"creation_ts", q.creation_ts},
                  {"title", q.title},
                  {"body", q.body},
                  {"tags", q.tags},
                  {"accepted_answer_id", q.accepted_answer_id}}
                 .dump()
          << '\n';
    }
  }
  {
    auto out = open_out(dir / "answers.jsonl");
    out << meta_line(stamp).dump() << '\n';
    for (const auto& [id, a] : ds.answers) {
      out << json{{"id", a.id}, {"owner", a.owner}, {"creation_ts", a.creation_ts}, {"parent_id", a.parent_id},
                  {"body", a.body}}
                 .dump()
          << '\n';
    }
  }
  {
    auto out = open_out(dir / "users.jsonl");
    out << meta_line(stamp).dump() << '\n';
    for (const auto& [id, u] : ds.users) {
      out << json{{"id", id}, {"answers", u.answers}, {"accepted", u.accepted}, {"reputation", u.reputation}}.dump()
          << '\n';
    }
  }
}

Dataset read_dataset_dir(const std::filesystem::path& dir, std::string* stamp) {
  Dataset ds;
  const auto s = for_each_record(dir / "questions.jsonl", [&](const json& j) {
    Question q;
    q.id = j.at("id");
    q.asker = j.at("asker");
    q.creation_ts = j.at("creation_ts");
    q.title = j.at("title");
    q.body = j.at("body");
    q.tags = j.at("tags").get<std::vector<std::string>>();
    q.accepted_answer_id = j.at("accepted_answer_id");
    ds.tag_universe.insert(q.tags.begin(), q.tags.end());
    ds.questions.emplace(q.id, std::move(q));
  });
  for_each_record(dir / "answers.jsonl", [&](const json& j) {
    Answer a;
    a.id = j.at("id");
    a.owner = j.at("owner");
    a.creation_ts = j.at("creation_ts");
    a.parent_id = j.at("parent_id");
    a.body = j.at("body");
    ds.answers.emplace(a.id, std::move(a));
  });
  for_each_record(dir / "users.jsonl", [&](const json& j) {
    ds.users[j.at("id").get<UserId>()] = {j.at("answers"), j.at("accepted"), j.at("reputation")};
  });
  if (stamp) *stamp = s;
  return ds;
}

void write_clustering(const TagClustering& c, const std::filesystem::path& path, const std::string& stamp) {
  json j;
  j["config_hash"] = stamp;
  j["k"] = c.k;
  j["features"] = c.features;
  json sil = json::object();
  for (const auto& [k, s] : c.silhouette_by_k) sil[std::to_string(k)] = s;
  j["silhouette_by_k"] = sil;
  j["assignment"] = c.assignment;
  json cent = json::array();
  for (Eigen::Index r = 0; r < c.centroids.rows(); ++r) {
    std::vector<double> row(c.centroids.cols());
    for (Eigen::Index col = 0; col < c.centroids.cols(); ++col) row[col] = c.centroids(r, col);
    cent.push_back(row);
  }
  j["centroids"] = cent;
  write_json(path, j);
}

TagClustering read_clustering(const std::filesystem::path& path, std::string* stamp) {
  const json j = read_json(path);
  TagClustering c;
  c.k = j.at("k");
  c.features = j.at("features").get<std::vector<std::string>>();
  for (const auto& [k, s] : j.at("silhouette_by_k").items()) c.silhouette_by_k[std::stoi(k)] = s.get<double>();
  c.assignment = j.at("assignment").get<std::map<std::string, int>>();
  const auto& cent = j.at("centroids");
  const auto cols = cent.empty() ? 0 : cent[0].size();
  c.centroids.resize(static_cast<Eigen::Index>(cent.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < cent.size(); ++r) {
    for (std::size_t col = 0; col < cols; ++col) c.centroids(r, col) = cent[r][col].get<double>();
  }
  if (stamp) *stamp = j.value("config_hash", "");
  return c;
}

void write_experts(const ExpertSet& e, const std::map<UserId, UserStats>& users, const std::filesystem::path& path,
                   const std::string& stamp) {
  auto out = open_out(path);
  out << json{{"_meta",
               {{"config_hash", stamp}, {"beta", e.beta}, {"mean_ratio", e.mean_ratio}, {"warning", e.warning}}}}
             .dump()
      << '\n';
  for (UserId u : e.candidates) {
    const auto& st = users.at(u);
    out << json{{"user", u},
                {"accepted", st.accepted},
                {"answers", st.answers},
                {"ratio", e.ratios.at(u)},
                {"is_expert", e.contains(u)}}
               .dump()
        << '\n';
  }
}

ExpertSet read_experts(const std::filesystem::path& path, std::string* stamp) {
  std::ifstream in(path);
  if (!in) throw Error("missing artifact " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error("empty artifact " + path.string());
  ExpertSet e;
  const json meta = json::parse(line).at("_meta");
  e.beta = meta.at("beta");
  e.mean_ratio = meta.at("mean_ratio");
  e.warning = meta.at("warning");
  if (stamp) *stamp = meta.value("config_hash", "");
  for_each_record(path, [&](const json& j) {
    const UserId u = j.at("user");
    e.candidates.insert(u);
    e.ratios[u] = j.at("ratio");
    if (j.at("is_expert").get<bool>()) e.experts.insert(u);
  });
  return e;
}

void write_graph(const MultiLayerGraph& g, const std::vector<CentralityTable>& centralities,
                 const std::filesystem::path& path, const std::string& stamp) {
  json j;
  j["config_hash"] = stamp;
  j["params"] = {{"epsilon", g.params.epsilon}, {"delta", g.params.delta}, {"lambda", g.params.lambda}};
  j["betweenness"] = "unweighted";
  json layers = json::array();
  for (std::size_t l = 0; l < g.layers.size(); ++l) {
    const Layer& layer = g.layers[l];
    const CentralityTable& c = centralities.at(l);
    json lj;
    lj["id"] = layer.id;
    lj["tags"] = layer.tags;
    lj["max_answers_in_layer"] = layer.max_answers_in_layer;
    lj["eigenvector_converged"] = c.eigenvector_converged;
    json nodes = json::array();
    for (Eigen::Index i = 0; i < layer.size(); ++i) {
      json tv = json::array();
      for (SparseRowMatrix::InnerIterator it(layer.topic_vectors, i); it; ++it) tv.push_back({it.col(), it.value()});
      nodes.push_back({{"user", layer.nodes[i]},
                       {"expert", static_cast<bool>(layer.is_expert[i])},
                       {"accepted", layer.accepted_in_layer[i]},
                       {"answers", layer.answers_in_layer[i]},
                       {"topic_vector", tv},
                       {"betweenness", c.betweenness[i]},
                       {"betweenness_rank", c.betweenness_rank[i]},
                       {"eigenvector", c.eigenvector[i]},
                       {"pagerank", c.pagerank[i]},
                       {"closeness", c.closeness[i]},
                       {"degree", c.degree[i]},
                       {"avg_weight", c.avg_weight[i]}});
    }
    lj["nodes"] = nodes;
    json edges = json::array();
    for (const auto& e : layer.edges()) edges.push_back({e.a, e.b, e.weight});
    lj["edges"] = edges;
    layers.push_back(lj);
  }
  j["layers"] = layers;
  write_json(path, j);
}

void read_graph(const std::filesystem::path& path, MultiLayerGraph& g, std::vector<CentralityTable>& centralities,
                std::string* stamp) {
  const json j = read_json(path);
  g.layers.clear();
  centralities.clear();
  g.params.epsilon = j.at("params").at("epsilon");
  g.params.delta = j.at("params").at("delta");
  g.params.lambda = j.at("params").at("lambda");
  for (const auto& lj : j.at("layers")) {
    Layer layer;
    CentralityTable c;
    layer.id = lj.at("id");
    c.layer_id = layer.id;
    layer.tags = lj.at("tags").get<std::vector<std::string>>();
    layer.max_answers_in_layer = lj.at("max_answers_in_layer");
    c.eigenvector_converged = lj.at("eigenvector_converged");
    const auto& nodes = lj.at("nodes");
    const auto n = static_cast<Eigen::Index>(nodes.size());
    for (auto* v : {&c.betweenness, &c.eigenvector, &c.pagerank, &c.closeness, &c.degree, &c.avg_weight}) v->resize(n);
    std::vector<Eigen::Triplet<double>> tv;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& nj = nodes[i];
      layer.nodes.push_back(nj.at("user"));
      layer.is_expert.push_back(nj.at("expert").get<bool>());
      layer.accepted_in_layer.push_back(nj.at("accepted"));
      layer.answers_in_layer.push_back(nj.at("answers"));
      for (const auto& e : nj.at("topic_vector")) tv.emplace_back(i, e[0].get<int>(), e[1].get<double>());
      c.betweenness[i] = nj.at("betweenness");
      c.betweenness_rank.push_back(nj.at("betweenness_rank"));
      c.eigenvector[i] = nj.at("eigenvector");
      c.pagerank[i] = nj.at("pagerank");
      c.closeness[i] = nj.at("closeness");
      c.degree[i] = nj.at("degree");
      c.avg_weight[i] = nj.at("avg_weight");
    }
    layer.topic_vectors.resize(n, static_cast<Eigen::Index>(layer.tags.size()));
    layer.topic_vectors.setFromTriplets(tv.begin(), tv.end());
    std::vector<Eigen::Triplet<double>> adj;
    for (const auto& e : lj.at("edges")) {
      const auto a = layer.index_of(e[0].get<UserId>());
      const auto b = layer.index_of(e[1].get<UserId>());
      if (!a || !b) throw Error("edge endpoint outside layer in " + path.string());
      adj.emplace_back(*a, *b, e[2].get<double>());
      adj.emplace_back(*b, *a, e[2].get<double>());
    }
    layer.adjacency.resize(n, n);
    layer.adjacency.setFromTriplets(adj.begin(), adj.end());
    for (Eigen::Index i = 0; i < n; ++i) {
      if (c.betweenness_rank[i] > 0) c.experts_by_betweenness.push_back(i);
    }
    std::sort(c.experts_by_betweenness.begin(), c.experts_by_betweenness.end(),
              [&](auto a, auto b) { return c.betweenness_rank[a] < c.betweenness_rank[b]; });
    g.layers.push_back(std::move(layer));
    centralities.push_back(std::move(c));
  }
  if (stamp) *stamp = j.value("config_hash", "");
}

namespace {

json candidate_json(const CandidateSet& cs) {
  json traces = json::array();
  for (const auto& t : cs.traces) {
    json entries = json::array();
    for (const auto& [u, e] : t.entries) entries.push_back({u, e.steps, e.visit_count, e.discovered_in_collection});
    traces.push_back({{"layer", t.layer},
                      {"method", to_string(t.method)},
                      {"initial", t.initial},
                      {"final_p", t.final_p},
                      {"entries", entries}});
  }
  return {{"query", cs.query},
          {"layers_used", cs.layers_used},
          {"fallback_all_layers", cs.fallback_all_layers},
          {"candidates", cs.candidates},
          {"traces", traces}};
}

}  // namespace

std::string candidate_set_json(const CandidateSet& cs, int indent) { return candidate_json(cs).dump(indent); }

void write_candidates(const std::vector<CandidateSet>& sets, const std::filesystem::path& path,
                      const std::string& stamp) {
  auto out = open_out(path);
  out << meta_line(stamp).dump() << '\n';
  for (const auto& cs : sets) out << candidate_json(cs).dump() << '\n';
}

std::vector<CandidateSet> read_candidates(const std::filesystem::path& path, std::string* stamp) {
  std::vector<CandidateSet> out;
  const auto s = for_each_record(path, [&](const json& j) {
    CandidateSet cs;
    cs.query = j.at("query");
    cs.layers_used = j.at("layers_used").get<std::vector<int>>();
    cs.fallback_all_layers = j.at("fallback_all_layers");
    cs.candidates = j.at("candidates").get<std::set<UserId>>();
    for (const auto& tj : j.at("traces")) {
      MethodTrace t;
      t.layer = tj.at("layer");
      t.method = tj.at("method") == "network" ? Method::kNetwork : Method::kContent;
      t.initial = tj.at("initial").get<std::vector<UserId>>();
      t.final_p = tj.at("final_p");
      for (const auto& e : tj.at("entries")) {
        t.entries[e[0].get<UserId>()] = {e[1].get<int>(), e[2].get<int>(), e[3].get<bool>()};
      }
      cs.traces.push_back(std::move(t));
    }
    out.push_back(std::move(cs));
  });
  if (stamp) *stamp = s;
  return out;
}

void write_run(const RunResult& run, const std::string& name, const std::filesystem::path& path,
               const std::string& stamp) {
  json queries = json::array();
  for (const auto& q : run.queries) queries.push_back({{"query", q.query}, {"relevant", q.relevant}, {"ranked", q.ranked}});
  write_json(path, {{"config_hash", stamp}, {"name", name}, {"queries", queries}});
}

RunResult read_run(const std::filesystem::path& path, std::string* stamp) {
  const json j = read_json(path);
  RunResult run;
  for (const auto& q : j.at("queries")) {
    run.queries.push_back({q.at("query"), q.at("ranked").get<std::vector<UserId>>(), q.at("relevant")});
  }
  if (stamp) *stamp = j.value("config_hash", "");
  return run;
}

}  // namespace tuef
