#include "doctest.h"
#include "support.hpp"
#include "tuef/selection.hpp"

using namespace tuef;

namespace {

/// Layer over users 1..n with the given dense adjacency; every node is an expert unless listed.
Layer make_layer(const Eigen::MatrixXd& adj, const std::set<UserId>& non_experts = {}) {
  Layer l;
  const auto n = adj.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    l.nodes.push_back(i + 1);
    l.is_expert.push_back(!non_experts.count(i + 1));
  }
  l.adjacency = adj.sparseView();
  l.accepted_in_layer.assign(n, 1);
  l.answers_in_layer.assign(n, 4);
  l.max_answers_in_layer = 4;
  return l;
}

}  // namespace

TEST_CASE("answer probability") {
  Layer l = make_layer(Eigen::MatrixXd::Zero(2, 2));
  l.answers_in_layer = {4, 2};
  UserStatsMap users = {{1, {10, 5, 0}}, {2, {10, 10, 0}}};
  CHECK(answer_probability(1, l, users) == doctest::Approx(0.5));
  CHECK(answer_probability(2, l, users) == doctest::Approx(0.5));
  CHECK_THROWS_AS(answer_probability(7, l, users), Error);
}

TEST_CASE("collection stops once p reaches alpha") {
  Layer l = make_layer(Eigen::MatrixXd::Zero(20, 20));
  UserStatsMap half;
  std::vector<UserId> order;
  for (UserId u = 1; u <= 20; ++u) {
    half[u] = {2, 1, 0};
    order.push_back(u);
  }
  const auto r = collect(order, l, half, 0.001);
  CHECK(r.selected.size() == 10);
  CHECK(r.selected.size() == static_cast<std::size_t>(std::ceil(std::log(0.001) / std::log(0.5))));
  CHECK(r.p == std::pow(0.5, 10));

  UserStatsMap perfect = {{1, {3, 3, 0}}};
  const auto one = collect({1, 2, 3}, l, perfect, 0.001);
  CHECK(one.selected == std::vector<UserId>{1});
  CHECK(one.p == 0.0);

  // mu = 0.1 each: ratio 0.4 times activity 1/4.
  Layer low = make_layer(Eigen::MatrixXd::Zero(3, 3));
  low.answers_in_layer = {1, 1, 1};
  UserStatsMap tenth = {{1, {5, 2, 0}}, {2, {5, 2, 0}}, {3, {5, 2, 0}}};
  const auto three = collect({1, 2, 3}, low, tenth, 0.001);
  CHECK(three.selected.size() == 3);
  CHECK(three.p == doctest::Approx(0.729).epsilon(1e-12));

  CHECK(collect({}, l, half, 0.001).selected.empty());
}

TEST_CASE("final p equals the direct product") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 40);
    Layer l = make_layer(Eigen::MatrixXd::Zero(n, n));
    UserStatsMap users;
    std::vector<UserId> order;
    for (int i = 0; i < n; ++i) {
      const int answers = 1 + static_cast<int>(rng() % 30);
      users[i + 1] = {answers, static_cast<int>(rng() % (answers + 1)), 0};
      l.answers_in_layer[i] = static_cast<int>(rng() % 10);
      order.push_back(i + 1);
    }
    l.max_answers_in_layer = *std::max_element(l.answers_in_layer.begin(), l.answers_in_layer.end());
    const auto r = collect(order, l, users, 0.001);
    double p = 1.0;
    for (UserId u : r.selected) {
      const auto& st = users[u];
      const double mu = l.max_answers_in_layer == 0
                            ? 0.0
                            : static_cast<double>(st.accepted) / st.answers *
                                  (static_cast<double>(l.answers_in_layer[u - 1]) / l.max_answers_in_layer);
      CHECK(mu >= 0.0);
      CHECK(mu <= 1.0);
      p *= 1.0 - mu;
    }
    CHECK(std::abs(r.p - p) <= 1e-12);
    for (std::size_t i = 1; i < r.p_history.size(); ++i) CHECK(r.p_history[i] <= r.p_history[i - 1]);
    // Stops at the first p <= alpha, or exhausts the list.
    if (r.selected.size() < order.size()) CHECK(r.p <= 0.001);
    if (r.p_history.size() > 1) CHECK(r.p_history[r.p_history.size() - 2] > 0.001);
  }
}

TEST_CASE("walk transitions follow edge weights") {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3);
  a(0, 1) = a(1, 0) = 0.9;
  a(0, 2) = a(2, 0) = 0.1;
  const Layer l = make_layer(a);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int to_x = 0;
  const int steps = 10000;
  for (int s = 0; s < steps; ++s) to_x += *walk_step(l, 0, u(rng)) == 1;
  CHECK(std::abs(to_x / static_cast<double>(steps) - 0.9) <= 0.02);

  SelectionConfig cfg;
  cfg.walks_per_expert = steps;
  cfg.walk_steps = 1;
  MethodTrace t;
  t.initial = {1};
  random_walk_explore(l, cfg, 7, t);
  const double fx = t.entries.at(2).visit_count / static_cast<double>(steps);
  CHECK(std::abs(fx - 0.9) <= 0.02);
  CHECK(t.entries.at(3).visit_count > 0);
}

TEST_CASE("walk edge cases") {
  const Layer lonely = make_layer(Eigen::MatrixXd::Zero(2, 2));
  CHECK(!walk_step(lonely, 0, 0.3).has_value());
  MethodTrace t;
  t.initial = {1};
  random_walk_explore(lonely, SelectionConfig{}, 1, t);
  CHECK(t.entries.empty());

  Eigen::MatrixXd chain = Eigen::MatrixXd::Zero(3, 3);
  chain(0, 1) = chain(1, 0) = 0.7;
  chain(1, 2) = chain(2, 1) = 0.7;
  MethodTrace c;
  c.initial = {1};
  c.entries[1] = {1, 1, true};
  random_walk_explore(make_layer(chain), SelectionConfig{}, 1, c);
  REQUIRE(c.entries.count(3));
  CHECK(c.entries.at(3).steps >= 1 + 2);
  CHECK(!c.entries.at(3).discovered_in_collection);

  // Non-experts are transit only.
  MethodTrace n;
  n.initial = {1};
  random_walk_explore(make_layer(chain, {2}), SelectionConfig{}, 1, n);
  CHECK(n.entries.count(2) == 0);
  CHECK(n.entries.count(3) == 1);
}

namespace {

struct Fixture {
  MultiLayerGraph graph;
  std::vector<CentralityTable> cent;
  UserStatsMap users;
  Dataset train;
  Indexes idx;

  Fixture() {
    testing::DatasetBuilder b;
    // Layer 0 tags a*, layer 1 tags b*; users 1..4 answer in layer 0, 5..8 in layer 1.
    for (int r = 0; r < 4; ++r) {
      for (UserId u = 1; u <= 4; ++u) b.question(50, {"a", "a" + std::to_string(u % 2)}, {u, 1 + u % 4}, 0, "alpha topic");
      for (UserId u = 5; u <= 8; ++u) b.question(50, {"b", "b" + std::to_string(u % 2)}, {u, 5 + u % 4}, 0, "beta topic");
    }
    train = b.build();
    users = train.users;
    TagClustering c;
    c.k = 2;
    c.assignment = {{"a", 0}, {"a0", 0}, {"a1", 0}, {"b", 1}, {"b0", 1}, {"b1", 1}};
    c.features = {"a", "b"};
    graph = build_mlg(train, c, 2, 0.3);
    mark_experts(graph, {1, 2, 3, 4, 5, 6, 7, 8});
    cent = compute_centralities(graph);
    idx = build_indexes(train);
  }

  CandidateSet run(const Question& q, SelectionMode mode, std::uint64_t seed = 42) const {
    SelectionConfig cfg;
    cfg.mode = mode;
    cfg.rng_seed = seed;
    return select_candidates(q, SelectionContext{graph, cent, users}, retrieve(q, idx, 1000), cfg);
  }
};

Question query(std::vector<std::string> tags) {
  Question q;
  q.id = 100000;
  q.tags = std::move(tags);
  q.title = "alpha topic";
  return q;
}

}  // namespace

TEST_CASE("select_candidates modes") {
  const Fixture f;
  const auto q = query({"a", "a1"});
  const auto full = f.run(q, SelectionMode::kFull);
  CHECK(full.layers_used == std::vector<int>{0});
  CHECK(!full.candidates.empty());
  for (UserId u : full.candidates) CHECK(f.graph.layers[0].expert(u));

  const auto norw = f.run(q, SelectionMode::kNoRandomWalk);
  std::set<UserId> union_d;
  for (const auto& t : norw.traces) union_d.insert(t.initial.begin(), t.initial.end());
  CHECK(norw.candidates == union_d);
  for (UserId u : norw.candidates) CHECK(full.candidates.count(u));

  const auto net = f.run(query({"a", "b"}), SelectionMode::kNetworkOnly);
  CHECK(net.layers_used == std::vector<int>{0, 1});
  for (const auto& t : net.traces) CHECK(t.method == Method::kNetwork);
  const auto con = f.run(q, SelectionMode::kContentOnly);
  for (const auto& t : con.traces) CHECK(t.method == Method::kContent);

  // Same seed twice: identical traces.
  const auto again = f.run(q, SelectionMode::kFull);
  CHECK(again.candidates == full.candidates);
  REQUIRE(again.traces.size() == full.traces.size());
  for (std::size_t i = 0; i < full.traces.size(); ++i) {
    CHECK(again.traces[i].initial == full.traces[i].initial);
    CHECK(again.traces[i].final_p == full.traces[i].final_p);
    for (const auto& [u, e] : full.traces[i].entries) {
      CHECK(again.traces[i].entries.at(u).visit_count == e.visit_count);
      CHECK(again.traces[i].entries.at(u).steps == e.steps);
    }
  }
}

TEST_CASE("unknown tags fall back to every layer") {
  const Fixture f;
  const auto cs = f.run(query({"never-seen"}), SelectionMode::kFull);
  CHECK(cs.fallback_all_layers);
  CHECK(cs.layers_used == std::vector<int>{0, 1});
  for (const auto& t : cs.traces) CHECK(t.method == Method::kContent);
}

TEST_CASE("trace invariants") {
  const Fixture f;
  const auto cs = f.run(query({"a", "b1"}), SelectionMode::kFull);
  for (const auto& t : cs.traces) {
    for (std::size_t i = 0; i < t.initial.size(); ++i) {
      CHECK(f.graph.layers[t.layer].expert(t.initial[i]));
      CHECK(t.entries.at(t.initial[i]).steps == static_cast<int>(i + 1));
      CHECK(t.entries.at(t.initial[i]).discovered_in_collection);
    }
    for (const auto& [u, e] : t.entries) {
      CHECK(e.visit_count >= 1);
      CHECK(e.steps >= 1);
    }
  }
  CHECK_THROWS_AS(SelectionConfig{0.0}.validate(), Error);
  CHECK(selection_mode_from_string(to_string(SelectionMode::kNoRandomWalk)) == SelectionMode::kNoRandomWalk);
}
