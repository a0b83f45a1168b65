#include "tuef/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <numeric>

#include "json.hpp"
#include "tuef/artifacts.hpp"

namespace tuef {

using nlohmann::json;

std::string to_string(AblationMode m) {
  switch (m) {
    case AblationMode::kTuef: return "tuef";
    case AblationMode::kBc: return "bc";
    case AblationMode::kBm25: return "bm25";
    case AblationMode::kNb: return "nb";
    case AblationMode::kCb: return "cb";
    case AblationMode::kSl: return "sl";
    case AblationMode::kNorw: return "norw";
  }
  return "tuef";
}

AblationMode ablation_mode_from_string(const std::string& s) {
  for (auto m : {AblationMode::kTuef, AblationMode::kBc, AblationMode::kBm25, AblationMode::kNb, AblationMode::kCb,
                 AblationMode::kSl, AblationMode::kNorw}) {
    if (to_string(m) == s) return m;
  }
  throw Error("unknown mode '" + s + "' (expected tuef, bc, bm25, nb, cb, sl or norw)");
}

std::string display_name(AblationMode m) {
  switch (m) {
    case AblationMode::kTuef: return "TUEF";
    case AblationMode::kBc: return "BC";
    case AblationMode::kBm25: return "BM25";
    case AblationMode::kNb: return "TUEF_NB";
    case AblationMode::kCb: return "TUEF_CB";
    case AblationMode::kSl: return "TUEF_SL";
    case AblationMode::kNorw: return "TUEF_NoRW";
  }
  return "TUEF";
}

void PipelineConfig::validate() const {
  if (lambda < 1) throw Error("lambda must be at least 1");
  if (k_min < 2 || k_max < k_min) throw Error("k range must satisfy 2 <= k_min <= k_max");
  if (epsilon < 1) throw Error("epsilon must be at least 1");
  if (!(delta >= 0.0 && delta <= 1.0)) throw Error("delta must lie in [0,1]");
  if (beta < 1) throw Error("beta must be at least 1");
  if (top_n < 1) throw Error("top_n must be at least 1");
  if (tuning_budget < 0) throw Error("tuning budget must be non-negative");
  if (!(split_ratio > 0.0 && split_ratio < 1.0)) throw Error("split ratio must lie in (0,1)");
  if (!(ltr_train_ratio > 0.0 && ltr_train_ratio < 1.0)) throw Error("LtR train ratio must lie in (0,1)");
  if (ltr_queries < 1 || test_queries < 1) throw Error("query limits must be positive");
  selection().validate();
}

std::string PipelineConfig::canonical() const {
  const json j = {{"lambda", lambda},       {"k_min", k_min},
                  {"k_max", k_max},         {"epsilon", epsilon},
                  {"delta", delta},         {"beta", beta},
                  {"alpha", alpha},         {"walks", walks},
                  {"steps", steps},         {"top_n", top_n},
                  {"seed", seed},           {"mode", to_string(mode)},
                  {"tuning_budget", tuning_budget}, {"split_ratio", split_ratio},
                  {"ltr_queries", ltr_queries},     {"test_queries", test_queries},
                  {"ltr_train_ratio", ltr_train_ratio},
                  {"remove_stopwords", remove_stopwords}};
  return j.dump();
}

std::string PipelineConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  static const char* hex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[i] = hex[h & 0xf];
  return out;
}

SelectionConfig PipelineConfig::selection() const {
  SelectionConfig s;
  s.alpha = alpha;
  s.walks_per_expert = walks;
  s.walk_steps = steps;
  s.top_n_retrieval = static_cast<std::size_t>(std::max(top_n, 1));
  s.rng_seed = seed;
  switch (mode) {
    case AblationMode::kNb: s.mode = SelectionMode::kNetworkOnly; break;
    case AblationMode::kCb: s.mode = SelectionMode::kContentOnly; break;
    case AblationMode::kNorw: s.mode = SelectionMode::kNoRandomWalk; break;
    default: s.mode = SelectionMode::kFull; break;
  }
  return s;
}

FeatureSet PipelineConfig::feature_set() const {
  if (mode == AblationMode::kNb) return FeatureSet::kNetworkBased;
  if (mode == AblationMode::kCb) return FeatureSet::kContentBased;
  return FeatureSet::kAll;
}

bool PipelineConfig::uses_ranker() const { return mode != AblationMode::kBc && mode != AblationMode::kBm25; }

std::vector<const Question*> evaluation_queries(const Dataset& test, const ExpertSet& experts, std::size_t limit) {
  std::vector<const Question*> out;
  for (const Question* q : chronological(test)) {
    if (out.size() >= limit) break;
    if (experts.contains(test.best_answerer(*q))) out.push_back(q);
  }
  return out;
}

std::optional<QueryGroup> make_group(PostId query, UserId relevant, const std::vector<CandidateFeatures>& rows,
                                     const std::vector<int>& columns) {
  if (rows.size() < 2) return std::nullopt;
  QueryGroup g;
  g.query = query;
  g.features.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(columns.size()));
  bool found = false;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    g.experts.push_back(rows[r].expert);
    g.labels.push_back(rows[r].expert == relevant ? 1 : 0);
    found = found || rows[r].expert == relevant;
    for (std::size_t c = 0; c < columns.size(); ++c) {
      g.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r].x[columns[c]];
    }
  }
  if (!found) return std::nullopt;
  return g;
}

namespace {

void log(const PipelineConfig& cfg, const std::string& stage, const std::string& msg) {
  if (cfg.verbose) std::clog << "[" << stage << "] " << msg << '\n';
}

void check_stamp(const PipelineConfig& cfg, const std::string& found, const std::filesystem::path& what) {
  if (found == cfg.hash() || cfg.force) return;
  throw Error(what.filename().string() + " was produced under config " + (found.empty() ? "<none>" : found) +
              " but the current config is " + cfg.hash() + " (rerun upstream stages or pass --force)");
}

/// Upstream artifacts shared by the later stages, loaded and hash-checked on demand.
struct Loaded {
  const PipelineConfig& cfg;
  ArtifactLayout at;

  Dataset dataset(const std::filesystem::path& dir) const {
    std::string s;
    Dataset ds = read_dataset_dir(dir, &s);
    check_stamp(cfg, s, dir / "questions.jsonl");
    return ds;
  }
  TagClustering clustering() const {
    std::string s;
    auto c = read_clustering(at.clustering(), &s);
    check_stamp(cfg, s, at.clustering());
    return c;
  }
  ExpertSet experts() const {
    std::string s;
    auto e = read_experts(at.experts(), &s);
    check_stamp(cfg, s, at.experts());
    return e;
  }
  void graph(MultiLayerGraph& g, std::vector<CentralityTable>& c) const {
    std::string s;
    read_graph(at.graph(), g, c, &s);
    check_stamp(cfg, s, at.graph());
    g.clustering = clustering();
  }
  Indexes indexes() const {
    Indexes idx;
    idx.tokenizer.remove_stopwords = cfg.remove_stopwords;
    std::string s;
    idx.tag = InvertedIndex::load(at.tag_index(), &s);
    check_stamp(cfg, s, at.tag_index());
    idx.text = InvertedIndex::load(at.text_index(), &s);
    check_stamp(cfg, s, at.text_index());
    return idx;
  }
  std::vector<CandidateSet> candidates(const std::filesystem::path& p) const {
    std::string s;
    auto c = read_candidates(p, &s);
    check_stamp(cfg, s, p);
    return c;
  }
};

std::vector<const Question*> ltr_queries(const Dataset& train, std::size_t limit) {
  auto order = chronological(train);
  if (order.size() > limit) order.erase(order.begin(), order.end() - static_cast<std::ptrdiff_t>(limit));
  return order;
}

void stage_ingest(const PipelineConfig& cfg, const ArtifactLayout& at) {
  if (cfg.data.empty()) throw Error("no input data configured");
  const auto ext = cfg.data.extension().string();
  const auto format = ext == ".xml" ? DumpFormat::kXmlDump : DumpFormat::kJsonl;
  ParseReport pr;
  const auto raw = parse_posts(cfg.data, format, &pr);
  std::map<UserId, std::int64_t> rep;
  if (!cfg.users.empty()) rep = parse_reputation(cfg.users);
  CleanReport cr;
  const Dataset ds = clean(raw, rep, &cr);
  const auto split = temporal_split(ds, cfg.split_ratio);
  const auto h = cfg.hash();
  write_dataset_dir(split.train, at.train_dir(), h);
  write_dataset_dir(split.test, at.test_dir(), h);
  const json manifest = {
      {"config_hash", h},
      {"split_ts", split.split_ts},
      {"split_ts_iso", format_timestamp(split.split_ts)},
      {"ratio", cfg.split_ratio},
      {"parsed_records", pr.records},
      {"skipped_records", pr.skipped},
      {"dropped",
       {{"no_owner", cr.dropped_no_owner},
        {"no_accepted", cr.dropped_no_accepted},
        {"missing_accepted", cr.dropped_missing_accepted},
        {"self_answered", cr.dropped_self_answered},
        {"no_tags", cr.dropped_no_tags},
        {"orphan_answers", cr.dropped_orphan_answers}}},
      {"train", {{"questions", split.train.questions.size()}, {"answers", split.train.answers.size()}, {"users", split.train.users.size()}}},
      {"test", {{"questions", split.test.questions.size()}, {"answers", split.test.answers.size()}, {"users", split.test.users.size()}}}};
  write_text(at.split(), manifest.dump(1) + "\n");
  log(cfg, "ingest",
      std::to_string(ds.questions.size()) + " questions kept (" + std::to_string(split.train.questions.size()) +
          " train / " + std::to_string(split.test.questions.size()) + " test), " + std::to_string(pr.skipped) +
          " malformed records skipped");
}

void stage_topics(const PipelineConfig& cfg, const Loaded& in) {
  const Dataset train = in.dataset(in.at.train_dir());
  const CoMatrix m = build_cooccurrence(train, cfg.lambda);
  TagClustering c;
  if (cfg.mode == AblationMode::kSl) {
    c = single_cluster(m);
  } else {
    const int hi = std::min<int>(cfg.k_max, static_cast<int>(m.tags.size()));
    if (hi < cfg.k_min) throw Error("only " + std::to_string(m.tags.size()) + " tags; cannot form k_min clusters");
    std::vector<int> ks(hi - cfg.k_min + 1);
    std::iota(ks.begin(), ks.end(), cfg.k_min);
    c = cluster_tags(m, ks, cfg.seed);
  }
  write_clustering(c, in.at.clustering(), cfg.hash());
  log(cfg, "topics", std::to_string(m.tags.size()) + " tags in " + std::to_string(c.k) + " clusters");
}

void stage_experts(const PipelineConfig& cfg, const Loaded& in) {
  const Dataset train = in.dataset(in.at.train_dir());
  const auto e = identify_experts(train, cfg.beta);
  write_experts(e, train.users, in.at.experts(), cfg.hash());
  if (!e.warning.empty()) log(cfg, "experts", "warning: " + e.warning);
  log(cfg, "experts", std::to_string(e.experts.size()) + " experts out of " + std::to_string(e.candidates.size()) +
                          " candidates (mean ratio " + std::to_string(e.mean_ratio) + ")");
}

void stage_graph(const PipelineConfig& cfg, const Loaded& in) {
  const Dataset train = in.dataset(in.at.train_dir());
  auto g = build_mlg(train, in.clustering(), cfg.epsilon, cfg.delta);
  g.params.lambda = cfg.lambda;
  mark_experts(g, in.experts().experts);
  const auto c = compute_centralities(g);
  write_graph(g, c, in.at.graph(), cfg.hash());
  std::size_t nodes = 0;
  std::size_t edges = 0;
  for (const auto& l : g.layers) {
    nodes += l.nodes.size();
    edges += l.edge_count();
  }
  log(cfg, "graph", std::to_string(g.layers.size()) + " layers, " + std::to_string(nodes) + " nodes, " +
                        std::to_string(edges) + " edges");
}

void stage_index(const PipelineConfig& cfg, const Loaded& in) {
  const auto idx = build_indexes(in.dataset(in.at.train_dir()), TokenizerOptions{cfg.remove_stopwords});
  idx.tag.save(in.at.tag_index(), cfg.hash());
  idx.text.save(in.at.text_index(), cfg.hash());
  log(cfg, "index", std::to_string(idx.tag.doc_count()) + " documents, " + std::to_string(idx.text.vocabulary().size()) +
                        " text terms");
}

void stage_select(const PipelineConfig& cfg, const Loaded& in) {
  if (!cfg.uses_ranker()) {
    log(cfg, "select", "skipped for mode " + to_string(cfg.mode));
    return;
  }
  const Dataset train = in.dataset(in.at.train_dir());
  const Dataset test = in.dataset(in.at.test_dir());
  MultiLayerGraph g;
  std::vector<CentralityTable> cent;
  in.graph(g, cent);
  const auto experts = in.experts();
  const auto idx = in.indexes();
  const SelectionContext ctx{g, cent, train.users};
  const auto scfg = cfg.selection();

  std::vector<CandidateSet> ltr;
  for (const Question* q : ltr_queries(train, static_cast<std::size_t>(cfg.ltr_queries))) {
    ltr.push_back(select_candidates(*q, ctx, retrieve(*q, idx, scfg.top_n_retrieval, q->id), scfg));
  }
  std::vector<CandidateSet> tst;
  for (const Question* q : evaluation_queries(test, experts, static_cast<std::size_t>(cfg.test_queries))) {
    tst.push_back(select_candidates(*q, ctx, retrieve(*q, idx, scfg.top_n_retrieval), scfg));
  }
  write_candidates(ltr, in.at.ltr_candidates(), cfg.hash());
  write_candidates(tst, in.at.test_candidates(), cfg.hash());
  log(cfg, "select", std::to_string(ltr.size()) + " training queries, " + std::to_string(tst.size()) + " test queries");
}

void stage_ltr_build(const PipelineConfig& cfg, const Loaded& in) {
  if (!cfg.uses_ranker()) return;
  const Dataset train = in.dataset(in.at.train_dir());
  MultiLayerGraph g;
  std::vector<CentralityTable> cent;
  in.graph(g, cent);
  const auto idx = in.indexes();
  const auto profiles = build_profiles(train);
  const FeatureContext fctx{g, cent, profiles};
  const auto columns = feature_columns(cfg.feature_set());
  std::vector<std::string> names;
  for (int c : columns) names.emplace_back(feature_names()[c]);

  std::vector<QueryGroup> groups;
  std::size_t total = 0;
  for (const auto& cs : in.candidates(in.at.ltr_candidates())) {
    ++total;
    const Question& q = train.questions.at(cs.query);
    const auto retrieved = retrieve(q, idx, cfg.selection().top_n_retrieval, q.id);
    if (auto grp = make_group(q.id, train.best_answerer(q), extract_features(cs, retrieved, fctx), columns)) {
      groups.push_back(std::move(*grp));
    }
  }
  if (groups.empty()) throw Error("no training query kept its best answerer among the candidates");
  const auto n = groups.size();
  const LtrDataset ds = split_groups(std::move(groups), names, cfg.ltr_train_ratio);
  const auto h = cfg.hash();
  write_ltr_tsv(ds.train, names, in.at.ltr_train(), in.at.ltr_train_groups(), h);
  write_ltr_tsv(ds.validation, names, in.at.ltr_valid(), in.at.ltr_valid_groups(), h);
  write_text(in.at.ltr_manifest(), json{{"config_hash", h},
                                        {"queries", total},
                                        {"retained", n},
                                        {"train_groups", ds.train.size()},
                                        {"validation_groups", ds.validation.size()},
                                        {"features", names}}
                                           .dump(1) +
                                       "\n");
  log(cfg, "ltr-build", std::to_string(n) + " of " + std::to_string(total) + " queries retained");
}

LtrDataset load_ltr(const PipelineConfig& cfg, const ArtifactLayout& at) {
  const json manifest = json::parse(read_text(at.ltr_manifest()));
  check_stamp(cfg, manifest.value("config_hash", ""), at.ltr_manifest());
  LtrDataset ds;
  ds.train = read_ltr_tsv(at.ltr_train(), &ds.feature_names);
  std::vector<std::string> vnames;
  ds.validation = read_ltr_tsv(at.ltr_valid(), &vnames);
  if (!ds.validation.empty() && vnames != ds.feature_names) throw Error("train and validation feature columns differ");
  ds.validate();
  return ds;
}

json hp_json(const HyperParams& hp) {
  return {{"learning_rate", hp.learning_rate},
          {"num_leaves", hp.num_leaves},
          {"n_estimators", hp.n_estimators},
          {"max_depth", hp.max_depth},
          {"min_data_in_leaf", hp.min_data_in_leaf}};
}

HyperParams hp_from_json(const json& j) {
  HyperParams hp;
  hp.learning_rate = j.at("learning_rate");
  hp.num_leaves = j.at("num_leaves");
  hp.n_estimators = j.at("n_estimators");
  hp.max_depth = j.at("max_depth");
  hp.min_data_in_leaf = j.at("min_data_in_leaf");
  return hp;
}

void stage_tune(const PipelineConfig& cfg, const Loaded& in) {
  if (!cfg.uses_ranker()) return;
  HyperParams best = HyperParams::midpoint();
  json trials = json::array();
  if (cfg.tuning_budget > 0) {
    std::vector<TuningTrial> tr;
    best = tune_hyperparams(load_ltr(cfg, in.at), cfg.tuning_budget, cfg.seed, {}, &tr);
    for (const auto& t : tr) trials.push_back({{"hp", hp_json(t.hp)}, {"validation_mrr", t.validation_mrr}});
  }
  write_text(in.at.hyperparams(),
             json{{"config_hash", cfg.hash()}, {"best", hp_json(best)}, {"trials", trials}}.dump(1) + "\n");
  log(cfg, "tune", std::to_string(trials.size()) + " trials, learning rate " + std::to_string(best.learning_rate) +
                       ", " + std::to_string(best.num_leaves) + " leaves");
}

void stage_train(const PipelineConfig& cfg, const Loaded& in) {
  if (!cfg.uses_ranker()) return;
  const json hj = json::parse(read_text(in.at.hyperparams()));
  check_stamp(cfg, hj.value("config_hash", ""), in.at.hyperparams());
  const auto model = train_lambdamart(load_ltr(cfg, in.at), hp_from_json(hj.at("best")), cfg.seed);
  model.save(in.at.model());
  json imp = json::object();
  for (const auto& [f, v] : model.feature_importance()) imp[f] = v;
  write_text(in.at.importance(), json{{"config_hash", cfg.hash()}, {"split_gain", imp}}.dump(1) + "\n");
  log(cfg, "train", std::to_string(model.trees.size()) + " trees, best validation MRR " +
                        (model.best_iteration >= 0 ? std::to_string(model.validation_mrr.at(model.best_iteration))
                                                   : std::string("n/a")));
}

std::vector<UserId> rank_by_betweenness(const Question& q, const MultiLayerGraph& g,
                                        const std::vector<CentralityTable>& cent) {
  auto layers = layers_of(q.tags, g.clustering);
  if (layers.empty()) {
    for (const auto& l : g.layers) layers.insert(l.id);
  }
  std::map<UserId, double> score;
  for (int l : layers) {
    const Layer& layer = g.layers.at(l);
    for (auto i : cent.at(l).experts_by_betweenness) {
      auto [it, inserted] = score.try_emplace(layer.nodes[i], cent[l].betweenness[i]);
      if (!inserted) it->second = std::max(it->second, cent[l].betweenness[i]);
    }
  }
  std::vector<std::pair<UserId, double>> v(score.begin(), score.end());
  std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<UserId> out;
  for (const auto& [u, s] : v) out.push_back(u);
  return out;
}

void stage_rank(const PipelineConfig& cfg, const Loaded& in) {
  const Dataset test = in.dataset(in.at.test_dir());
  RunResult run;
  if (cfg.mode == AblationMode::kBc) {
    MultiLayerGraph g;
    std::vector<CentralityTable> cent;
    in.graph(g, cent);
    for (const Question* q : evaluation_queries(test, in.experts(), static_cast<std::size_t>(cfg.test_queries))) {
      run.queries.push_back({q->id, rank_by_betweenness(*q, g, cent), test.best_answerer(*q)});
    }
  } else if (cfg.mode == AblationMode::kBm25) {
    const auto experts = in.experts();
    const auto idx = in.indexes();
    for (const Question* q : evaluation_queries(test, experts, static_cast<std::size_t>(cfg.test_queries))) {
      const auto r = retrieve(*q, idx, cfg.selection().top_n_retrieval);
      run.queries.push_back(
          {q->id, interleave_experts(r.tag, r.text, [&](UserId u) { return experts.contains(u); }), test.best_answerer(*q)});
    }
  } else {
    const Dataset train = in.dataset(in.at.train_dir());
    MultiLayerGraph g;
    std::vector<CentralityTable> cent;
    in.graph(g, cent);
    const auto idx = in.indexes();
    const auto profiles = build_profiles(train);
    const FeatureContext fctx{g, cent, profiles};
    const auto model = RankerModel::load(in.at.model());
    std::vector<int> columns;
    for (const auto& name : model.feature_names) {
      const auto& all = feature_names();
      const auto it = std::find(all.begin(), all.end(), name);
      if (it == all.end()) throw Error("model uses unknown feature " + name);
      columns.push_back(static_cast<int>(it - all.begin()));
    }
    for (const auto& cs : in.candidates(in.at.test_candidates())) {
      const Question& q = test.questions.at(cs.query);
      const auto rows = extract_features(cs, retrieve(q, idx, cfg.selection().top_n_retrieval), fctx);
      Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(columns.size()));
      std::vector<UserId> experts;
      for (std::size_t r = 0; r < rows.size(); ++r) {
        experts.push_back(rows[r].expert);
        for (std::size_t c = 0; c < columns.size(); ++c) x(r, c) = rows[r].x[columns[c]];
      }
      QueryRun qr{q.id, {}, test.best_answerer(q)};
      for (const auto& rc : score_and_rank(model, experts, x)) qr.ranked.push_back(rc.expert);
      run.queries.push_back(std::move(qr));
    }
  }
  write_run(run, display_name(cfg.mode), in.at.run(), cfg.hash());
  log(cfg, "rank", std::to_string(run.queries.size()) + " queries ranked");
}

EvalReport evaluate(const PipelineConfig& cfg, const ArtifactLayout& at) {
  std::string s;
  const RunResult run = read_run(at.run(), &s);
  check_stamp(cfg, s, at.run());
  const EvalReport r = compute_metrics(run);
  write_text(at.report_json(), report_json(r));
  write_text(at.report_text(), compare_runs({{display_name(cfg.mode), run}}, display_name(cfg.mode)).to_text());
  write_text(at.per_query(), per_query_csv(run, r));
  return r;
}

}  // namespace

void run_stage(const std::string& stage, const PipelineConfig& cfg) {
  cfg.validate();
  const Loaded in{cfg, ArtifactLayout{cfg.artifacts}};
  std::filesystem::create_directories(cfg.artifacts);
  try {
    if (stage == "ingest") {
      stage_ingest(cfg, in.at);
    } else if (stage == "topics") {
      stage_topics(cfg, in);
    } else if (stage == "experts") {
      stage_experts(cfg, in);
    } else if (stage == "graph") {
      stage_graph(cfg, in);
    } else if (stage == "index") {
      stage_index(cfg, in);
    } else if (stage == "select") {
      stage_select(cfg, in);
    } else if (stage == "ltr-build") {
      stage_ltr_build(cfg, in);
    } else if (stage == "tune") {
      stage_tune(cfg, in);
    } else if (stage == "train") {
      stage_train(cfg, in);
    } else if (stage == "rank") {
      stage_rank(cfg, in);
    } else if (stage == "eval") {
      const auto r = evaluate(cfg, in.at);
      log(cfg, "eval", "P@1 " + std::to_string(r.mean.at(Metric::kP1)) + ", MRR " + std::to_string(r.mean.at(Metric::kMrr)) +
                           ", R@100 " + std::to_string(r.mean.at(Metric::kR100)));
    } else {
      throw Error("unknown stage");
    }
  } catch (const std::exception& e) {
    throw Error("stage '" + stage + "' failed: " + e.what());
  }
}

EvalReport run_pipeline(const PipelineConfig& cfg) {
  for (const char* stage : kStages) run_stage(stage, cfg);
  std::string s;
  const ArtifactLayout at{cfg.artifacts};
  return compute_metrics(read_run(at.run(), &s));
}

ComparisonTable run_ablation(const PipelineConfig& cfg, const std::vector<AblationMode>& modes) {
  if (modes.empty()) throw Error("no ablation modes given");
  std::vector<std::pair<std::string, RunResult>> runs;
  for (AblationMode m : modes) {
    PipelineConfig sub = cfg;
    sub.mode = m;
    sub.artifacts = cfg.artifacts / "ablation" / to_string(m);
    log(cfg, "ablate", "mode " + to_string(m));
    run_pipeline(sub);
    runs.emplace_back(display_name(m), read_run(ArtifactLayout{sub.artifacts}.run()));
  }
  const bool has_tuef = std::find(modes.begin(), modes.end(), AblationMode::kTuef) != modes.end();
  const auto table = compare_runs(runs, has_tuef ? display_name(AblationMode::kTuef) : runs.front().first);
  write_text(cfg.artifacts / "ablation.txt", table.to_text());
  write_text(cfg.artifacts / "ablation.json", table.to_json());
  return table;
}

Question read_question_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error("bad question file " + path.string() + ": " + e.what());
  }
  Question q;
  q.id = j.value("id", PostId{0});
  q.title = j.value("title", "");
  q.body = j.value("body", "");
  if (j.contains("tags")) {
    const auto& t = j.at("tags");
    q.tags = t.is_string() ? decode_dump_tags(t.get<std::string>()) : t.get<std::vector<std::string>>();
  }
  if (q.tags.empty() && q.title.empty() && q.body.empty()) throw Error("question file has no title, body or tags");
  return q;
}

CandidateSet select_for_question(const PipelineConfig& cfg, const Question& q) {
  cfg.validate();
  const Loaded in{cfg, ArtifactLayout{cfg.artifacts}};
  const Dataset train = in.dataset(in.at.train_dir());
  MultiLayerGraph g;
  std::vector<CentralityTable> cent;
  in.graph(g, cent);
  const auto idx = in.indexes();
  const auto scfg = cfg.selection();
  return select_candidates(q, SelectionContext{g, cent, train.users}, retrieve(q, idx, scfg.top_n_retrieval), scfg);
}

RankedQuestions query_index(const PipelineConfig& cfg, IndexKind kind, const std::string& text, std::size_t top_n) {
  const Loaded in{cfg, ArtifactLayout{cfg.artifacts}};
  const auto idx = in.indexes();
  std::vector<std::string> tokens;
  if (kind == IndexKind::kTag) {
    std::string cur;
    for (char c : text + " ") {
      if (c == ' ' || c == ',' || c == '<' || c == '>' || c == '\t') {
        if (!cur.empty()) tokens.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
  } else {
    tokens = tokenize_text(text, idx.tokenizer);
  }
  return bm25_query(kind == IndexKind::kTag ? idx.tag : idx.text, tokens, top_n);
}

}  // namespace tuef
