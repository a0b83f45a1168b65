#include <filesystem>

#include "doctest.h"
#include "support.hpp"
#include "tuef/retrieval.hpp"

using namespace tuef;

namespace {

// Tag documents with their lengths: 2, 3, 2, 1, 4.
Dataset toy_corpus() {
  testing::DatasetBuilder b;
  b.question(90, {"python", "flask"}, {1});
  b.question(90, {"python", "django", "orm"}, {2});
  b.question(90, {"java", "spring"}, {3});
  b.question(90, {"python"}, {4});
  b.question(90, {"java", "python", "jvm", "interop"}, {5});
  return b.build();
}

Layer expert_layer(const std::vector<UserId>& users, const std::set<UserId>& experts) {
  Layer l;
  l.nodes = users;
  std::sort(l.nodes.begin(), l.nodes.end());
  for (UserId u : l.nodes) l.is_expert.push_back(experts.count(u) > 0);
  l.adjacency.resize(l.size(), l.size());
  return l;
}

/// Direct BM25 on token lists: Lucene idf, k1 = 1.2, b = 0.75.
double bm25_oracle(const std::vector<std::vector<std::string>>& docs, std::size_t d,
                   const std::vector<std::string>& query) {
  double avg = 0.0;
  for (const auto& doc : docs) avg += static_cast<double>(doc.size());
  avg /= static_cast<double>(docs.size());
  double score = 0.0;
  for (const auto& t : query) {
    double df = 0.0;
    for (const auto& doc : docs) df += std::count(doc.begin(), doc.end(), t) > 0;
    const double tf = static_cast<double>(std::count(docs[d].begin(), docs[d].end(), t));
    if (tf == 0.0) continue;
    const double n = static_cast<double>(docs.size());
    const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
    score += idf * tf * 2.2 / (tf + 1.2 * (0.25 + 0.75 * static_cast<double>(docs[d].size()) / avg));
  }
  return score;
}

}  // namespace

TEST_CASE("tokenizer") {
  const auto toks = tokenize_text("Fix NullPointerException in Java");
  CHECK(std::find(toks.begin(), toks.end(), "nullpointerexception") != toks.end());
  CHECK(std::find(toks.begin(), toks.end(), "in") == toks.end());
  CHECK(std::find(toks.begin(), toks.end(), "java") != toks.end());
  const auto html = tokenize_text(strip_html("<p>Use <code>df.groupby()</code> here</p>"));
  CHECK(html == std::vector<std::string>{"use", "df", "groupby"});
  CHECK(tokenize_text("The and of", TokenizerOptions{false}).size() == 3);
  CHECK(english_stopwords().size() >= 250);
}

TEST_CASE("index construction") {
  const auto idx = build_indexes(toy_corpus());
  CHECK(idx.tag.doc_count() == 5);
  CHECK(idx.tag.docs()[0].length == 2);
  CHECK(idx.tag.df("python") == 4);
  CHECK(idx.tag.df("flask") == 1);
  CHECK(idx.tag.df("absent") == 0);
  CHECK(idx.tag.avg_doc_length() == doctest::Approx(2.4));
  for (const auto& [term, list] : idx.tag.vocabulary()) {
    for (std::size_t i = 1; i < list.size(); ++i) CHECK(idx.tag.docs()[list[i - 1].doc].question < idx.tag.docs()[list[i].doc].question);
  }
  CHECK(idx.tag.docs()[2].expert == 3);
}

TEST_CASE("BM25 on the toy corpus matches the hand table") {
  const auto idx = build_indexes(toy_corpus());
  const std::vector<std::string> q = {"python", "java"};
  const auto r = bm25_query(idx.tag, q, 10);
  REQUIRE(r.size() == 5);
  // Hand-computed with idf = ln(1 + (N - df + 0.5) / (df + 0.5)), avgdl = 2.4.
  const std::map<PostId, double> table = {{idx.tag.docs()[0].question, 0.3087319801921551},
                                          {idx.tag.docs()[1].question, 0.2609899213995538},
                                          {idx.tag.docs()[2].question, 0.9395274254529659},
                                          {idx.tag.docs()[3].question, 0.3778510802351749},
                                          {idx.tag.docs()[4].question, 0.9139042077044635}};
  for (const auto& hit : r) CHECK(std::abs(hit.score - table.at(hit.question)) < 1e-9);
  CHECK(r[0].question == idx.tag.docs()[2].question);
  CHECK(r[1].question == idx.tag.docs()[4].question);
  CHECK(r[4].question == idx.tag.docs()[1].question);
  for (std::size_t i = 1; i < r.size(); ++i) CHECK(r[i - 1].score >= r[i].score);
  CHECK(bm25_query(idx.tag, q, 2).size() == 2);
}

TEST_CASE("BM25 agrees with the direct formula on random corpora") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    testing::DatasetBuilder b;
    std::vector<std::vector<std::string>> docs;
    for (int d = 0; d < 12; ++d) {
      std::vector<std::string> tags;
      const int len = 1 + static_cast<int>(rng() % 4);
      for (int i = 0; i < len; ++i) {
        auto t = "t" + std::to_string(rng() % 8);
        if (std::find(tags.begin(), tags.end(), t) == tags.end()) tags.push_back(t);
      }
      docs.push_back(tags);
      b.question(90, tags, {1});
    }
    const auto idx = build_indexes(b.build());
    const std::vector<std::string> q = {"t" + std::to_string(rng() % 8), "t" + std::to_string(rng() % 8)};
    for (const auto& hit : bm25_query(idx.tag, q, 100)) {
      const auto d = static_cast<std::size_t>(hit.question - 1) / 2;
      CHECK(std::abs(hit.score - bm25_oracle(docs, d, q)) < 1e-9);
    }
    auto extended = q;
    extended.push_back("never-seen");
    const auto a = bm25_query(idx.tag, q, 100);
    const auto e = bm25_query(idx.tag, extended, 100);
    REQUIRE(a.size() == e.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].score == e[i].score);
  }
}

TEST_CASE("BM25 edge cases") {
  testing::DatasetBuilder b;
  b.question(90, {"solo"}, {1});
  const auto single = build_indexes(b.build());
  const auto r = bm25_query(single.tag, {"solo"}, 5);
  REQUIRE(r.size() == 1);
  CHECK(r[0].score > 0.0);
  CHECK(bm25_query(single.tag, {"absent"}, 5).empty());
  CHECK(bm25_query(single.tag, {}, 5).empty());
  CHECK(bm25_query(single.tag, {"solo"}, 5, {}, r[0].question).empty());

  testing::DatasetBuilder tie;
  tie.question(90, {"x"}, {1});
  tie.question(90, {"x"}, {2});
  const auto ti = build_indexes(tie.build());
  const auto tr = bm25_query(ti.tag, {"x"}, 5);
  REQUIRE(tr.size() == 2);
  CHECK(tr[0].score == tr[1].score);
  CHECK(tr[0].expert == 2);
}

TEST_CASE("index files round-trip") {
  const auto idx = build_indexes(toy_corpus());
  const auto path = std::filesystem::temp_directory_path() / "tuef_index_roundtrip.bin";
  idx.text.save(path, "stamp-1");
  std::string stamp;
  const auto back = InvertedIndex::load(path, &stamp);
  CHECK(stamp == "stamp-1");
  CHECK(back == idx.text);
  std::filesystem::remove(path);
}

TEST_CASE("content order interleaves, filters and deduplicates") {
  const Layer layer = expert_layer({1, 2, 3, 4}, {1, 2, 3});
  auto rq = [](std::vector<UserId> experts) {
    RankedQuestions out;
    PostId id = 100;
    double s = 10.0;
    for (UserId e : experts) out.push_back({id++, s--, e});
    return out;
  };
  CHECK(content_order(rq({1, 2}), rq({3}), layer) == std::vector<UserId>{1, 3, 2});
  CHECK(content_order(rq({1, 2}), rq({2, 3}), layer) == std::vector<UserId>{1, 2, 3});
  CHECK(content_order({}, {}, layer).empty());
  CHECK(content_order(rq({4, 9, 1}), rq({}), layer) == std::vector<UserId>{1});
  CHECK(content_order(rq({1, 2}), rq({3}), layer, false) == std::vector<UserId>{3, 1, 2});

  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<UserId> a;
    std::vector<UserId> b;
    for (int i = 0; i < 8; ++i) {
      a.push_back(1 + static_cast<UserId>(rng() % 5));
      b.push_back(1 + static_cast<UserId>(rng() % 5));
    }
    const auto out = content_order(rq(a), rq(b), layer);
    std::set<UserId> seen(out.begin(), out.end());
    CHECK(seen.size() == out.size());
    for (UserId u : out) CHECK(layer.expert(u));
  }
}

TEST_CASE("interleave keeps each list's relative order") {
  std::vector<UserId> users(20);
  std::iota(users.begin(), users.end(), 1);
  const Layer layer = expert_layer(users, {1, 2, 3, 4, 5, 6, 7, 8, 11, 12, 13, 14, 15});
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<UserId> a = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::vector<UserId> b = {11, 12, 13, 14, 15, 16, 17, 18, 19, 20};
    std::shuffle(a.begin(), a.end(), rng);
    std::shuffle(b.begin(), b.end(), rng);
    a.resize(3 + rng() % 8);
    RankedQuestions ra;
    RankedQuestions rb;
    for (UserId u : a) ra.push_back({u, 1.0, u});
    for (UserId u : b) rb.push_back({u, 1.0, u});
    const auto out = content_order(ra, rb, layer);
    for (const auto* src : {&a, &b}) {
      std::vector<std::ptrdiff_t> pos;
      for (UserId u : *src) {
        if (layer.expert(u)) pos.push_back(std::find(out.begin(), out.end(), u) - out.begin());
      }
      CHECK(std::is_sorted(pos.begin(), pos.end()));
    }
  }
}
