#include <fstream>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "tuef/artifacts.hpp"
#include "tuef/pipeline.hpp"
#include "tuef/synthetic.hpp"
#include "tuef/topics.hpp"

using namespace tuef;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Dataset ingest_posts(const std::vector<RawPost>& posts) { return clean(posts); }

}  // namespace

TEST_CASE("synthetic corpus with a single expert") {
  SyntheticSpec s;
  s.users = 30;
  s.experts = 1;
  s.tags = 4;
  s.topics = 1;
  s.questions = 300;
  s.owner_answer_prob = 1.0;
  s.noise_answers_min = 0;
  s.noise_answers_max = 0;
  s.active_users = 0;
  const auto corpus = generate_synthetic(s);
  const auto ds = ingest_posts(corpus.posts);
  CHECK(ds.questions.size() > 250);
  for (const auto& [id, q] : ds.questions) CHECK(ds.best_answerer(q) == 1);
  REQUIRE(corpus.truth.experts.size() == 1);
  CHECK(corpus.truth.experts[0].user == 1);
  CHECK(corpus.truth.experts[0].primary_topic == 0);
}

TEST_CASE("two topic-pure experts give a two-cluster tag partition") {
  SyntheticSpec s;
  s.users = 60;
  s.experts = 2;
  s.tags = 10;
  s.topics = 2;
  s.questions = 800;
  s.affinity_concentration = 1.0;
  s.active_users = 10;
  const auto corpus = generate_synthetic(s);
  for (const auto& e : corpus.truth.experts) {
    CHECK(e.topic_affinity[e.primary_topic] == doctest::Approx(1.0));
  }
  const auto m = build_cooccurrence(clean(corpus.posts), 4);
  const std::vector<int> ks = {2, 3, 4, 5};
  const auto c = cluster_tags(m, ks, 42);
  CHECK(c.k == 2);
  std::map<int, int> to_planted;
  for (const auto& [tag, cluster] : c.assignment) {
    const auto [it, fresh] = to_planted.try_emplace(cluster, corpus.truth.tag_topic.at(tag));
    CHECK(it->second == corpus.truth.tag_topic.at(tag));
  }
  CHECK(to_planted.size() == 2);
  CHECK(to_planted.begin()->second != std::next(to_planted.begin())->second);
}

TEST_CASE("synthetic generation is deterministic and valid") {
  const auto spec = testing::small_spec();
  const auto a = testing::scratch("synth_a.jsonl");
  const auto b = testing::scratch("synth_b.jsonl");
  write_posts_jsonl(generate_synthetic(spec).posts, a);
  write_posts_jsonl(generate_synthetic(spec).posts, b);
  CHECK(slurp(a) == slurp(b));
  auto other = spec;
  other.seed = 8;
  write_posts_jsonl(generate_synthetic(other).posts, b);
  CHECK(slurp(a) != slurp(b));
  fs::remove(a);
  fs::remove(b);

  const auto corpus = generate_synthetic(spec);
  CleanReport rep;
  const auto ds = clean(corpus.posts, {}, &rep);
  CHECK(rep.dropped_self_answered == 0);
  for (const auto& [id, q] : ds.questions) CHECK(q.asker != ds.best_answerer(q));
  CHECK(corpus.truth.tag_topic.size() == static_cast<std::size_t>(spec.tags));

  auto bad = spec;
  bad.experts = bad.users + 1;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = spec;
  bad.topics = bad.tags + 1;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("artifact round trips") {
  const auto corpus = generate_synthetic(testing::small_spec());
  const auto ds = clean(corpus.posts);
  const auto dir = testing::scratch("roundtrip");
  fs::remove_all(dir);
  write_dataset_dir(ds, dir / "ds", "stamp1");
  std::string stamp;
  CHECK(read_dataset_dir(dir / "ds", &stamp) == ds);
  CHECK(stamp == "stamp1");

  ExpertSet e = identify_experts(ds, 5);
  write_experts(e, ds.users, dir / "experts.jsonl", "stamp2");
  const auto back = read_experts(dir / "experts.jsonl", &stamp);
  CHECK(stamp == "stamp2");
  CHECK(back.experts == e.experts);
  CHECK(back.candidates == e.candidates);
  CHECK(back.beta == e.beta);
  CHECK(back.mean_ratio == doctest::Approx(e.mean_ratio));

  RunResult run;
  run.queries.push_back({5, {3, 1, 2}, 1});
  run.queries.push_back({6, {}, 4});
  write_run(run, "x", dir / "run.json", "stamp3");
  const auto rb = read_run(dir / "run.json", &stamp);
  REQUIRE(rb.queries.size() == 2);
  CHECK(rb.queries[0].ranked == run.queries[0].ranked);
  CHECK(rb.queries[1].relevant == 4);
  fs::remove_all(dir);
}

TEST_CASE("config hash and stage stamps") {
  PipelineConfig a;
  PipelineConfig b;
  b.data = "elsewhere.jsonl";
  b.force = true;
  CHECK(a.hash() == b.hash());
  CHECK(a.hash().size() == 16);
  b.lambda = 11;
  CHECK(a.hash() != b.hash());
  b = a;
  b.remove_stopwords = false;
  CHECK(a.hash() != b.hash());
  b = a;
  b.mode = AblationMode::kCb;
  CHECK(a.hash() != b.hash());

  auto cfg = testing::small_project(testing::scratch("stamps"));
  run_stage("ingest", cfg);
  auto changed = cfg;
  changed.lambda = 5;
  CHECK_THROWS_AS(run_stage("topics", changed), Error);
  try {
    run_stage("topics", changed);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("topics") != std::string::npos);
  }
  changed.force = true;
  CHECK_NOTHROW(run_stage("topics", changed));
  CHECK_THROWS_AS(run_stage("nonsense", cfg), Error);
  CHECK_THROWS_AS(ablation_mode_from_string("xyz"), Error);
  for (const char* m : {"tuef", "bc", "bm25", "nb", "cb", "sl", "norw"}) {
    CHECK(to_string(ablation_mode_from_string(m)) == m);
  }
  fs::remove_all(cfg.data.parent_path());
}

TEST_CASE("make_group and evaluation_queries") {
  std::vector<CandidateFeatures> rows(3);
  for (int i = 0; i < 3; ++i) {
    rows[i].expert = 10 + i;
    rows[i].x = FeatureVector::Constant(i);
  }
  const auto g = make_group(1, 11, rows, {0, 3});
  REQUIRE(g);
  CHECK(g->labels == std::vector<int>{0, 1, 0});
  CHECK(g->features.cols() == 2);
  CHECK(g->features(2, 1) == 2.0);
  CHECK_FALSE(make_group(1, 99, rows, {0}));
  CHECK_FALSE(make_group(1, 10, {rows[0]}, {0}));

  testing::DatasetBuilder b;
  b.question(9, {"a"}, {1});
  b.question(9, {"a"}, {2});
  b.question(9, {"a"}, {1});
  const auto ds = b.build();
  ExpertSet e;
  e.experts = {1};
  const auto q = evaluation_queries(ds, e, 10);
  REQUIRE(q.size() == 2);
  CHECK(q[0]->creation_ts < q[1]->creation_ts);
  CHECK(evaluation_queries(ds, e, 1).size() == 1);
}

TEST_CASE("end-to-end on a small synthetic corpus") {
  auto cfg = testing::small_project(testing::scratch("e2e"));
  const auto rep = run_pipeline(cfg);
  const ArtifactLayout at{cfg.artifacts};
  CHECK(rep.query_count > 50);
  CHECK(rep.mean.at(Metric::kP1) > 0.3);
  CHECK(rep.mean.at(Metric::kR100) > 0.8);
  for (const auto& p : {at.model(), at.run(), at.report_json(), at.per_query(), at.ltr_train(), at.graph()}) {
    CHECK(fs::exists(p));
  }
  const auto run = read_run(at.run());
  const auto experts = read_experts(at.experts());
  for (const auto& q : run.queries) {
    CHECK(experts.contains(q.relevant));
    for (UserId u : q.ranked) CHECK(experts.contains(u));
  }

  const auto qfile = cfg.artifacts.parent_path() / "q.json";
  {
    std::ofstream(qfile) << R"({"id": 5, "title": "topic1w3", "body": "topic1 text", "tags": "<topic1><topic1-sub0>"})";
  }
  const auto question = read_question_file(qfile);
  CHECK(question.tags == std::vector<std::string>{"topic1", "topic1-sub0"});
  const auto cs = select_for_question(cfg, question);
  CHECK(!cs.candidates.empty());
  CHECK(candidate_set_json(cs).find("\"traces\"") != std::string::npos);
  const auto hits = query_index(cfg, IndexKind::kTag, "topic1, topic1-sub0", 5);
  CHECK(hits.size() == 5);
  for (std::size_t i = 1; i < hits.size(); ++i) CHECK(hits[i - 1].score >= hits[i].score);
  CHECK(!query_index(cfg, IndexKind::kText, "topic1 common3", 3).empty());
  {
    std::ofstream(qfile) << "{}";
  }
  CHECK_THROWS_AS(read_question_file(qfile), Error);

  SUBCASE("single-layer mode builds one layer") {
    auto sl = cfg;
    sl.mode = AblationMode::kSl;
    sl.artifacts = cfg.artifacts.parent_path() / "sl";
    run_stage("ingest", sl);
    run_stage("topics", sl);
    run_stage("experts", sl);
    run_stage("graph", sl);
    MultiLayerGraph g;
    std::vector<CentralityTable> c;
    read_graph(ArtifactLayout{sl.artifacts}.graph(), g, c);
    g.clustering = read_clustering(ArtifactLayout{sl.artifacts}.clustering());
    CHECK(g.layers.size() == 1);
    CHECK(g.clustering.k == 1);
  }

  SUBCASE("betweenness baseline ranks experts by centrality") {
    auto bc = cfg;
    bc.mode = AblationMode::kBc;
    bc.artifacts = cfg.artifacts.parent_path() / "bc";
    const auto r = run_pipeline(bc);
    CHECK(r.query_count == rep.query_count);
    CHECK(!fs::exists(ArtifactLayout{bc.artifacts}.model()));
    MultiLayerGraph g;
    std::vector<CentralityTable> c;
    read_graph(ArtifactLayout{bc.artifacts}.graph(), g, c);
    g.clustering = read_clustering(ArtifactLayout{bc.artifacts}.clustering());
    const auto brun = read_run(ArtifactLayout{bc.artifacts}.run());
    const auto test = read_dataset_dir(ArtifactLayout{bc.artifacts}.test_dir());
    for (const auto& q : brun.queries) {
      REQUIRE(!q.ranked.empty());
      auto layers = layers_of(test.questions.at(q.query).tags, g.clustering);
      REQUIRE(!layers.empty());
      auto score = [&](UserId u) {
        double s = -1.0;
        for (int l : layers) {
          if (auto i = g.layers[l].index_of(u)) s = std::max(s, c[l].betweenness[*i]);
        }
        return s;
      };
      for (std::size_t i = 1; i < q.ranked.size(); ++i) CHECK(score(q.ranked[i - 1]) >= score(q.ranked[i]));
    }
  }
  fs::remove_all(cfg.data.parent_path());
}
