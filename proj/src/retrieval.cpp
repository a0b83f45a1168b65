#include "tuef/retrieval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>

namespace tuef {

namespace {

constexpr char kMagic[8] = {'T', 'U', 'E', 'F', 'I', 'D', 'X', '\0'};
constexpr std::uint32_t kIndexVersion = 1;

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw Error("truncated index file");
  return v;
}

bool token_char(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

}  // namespace

std::string strip_html(std::string_view html) {
  std::string out;
  out.reserve(html.size());
  std::size_t i = 0;
  while (i < html.size()) {
    if (html[i] == '<') {
      const auto close = html.find('>', i + 1);
      if (close != std::string_view::npos) {
        out.push_back(' ');
        i = close + 1;
        continue;
      }
    }
    out.push_back(html[i++]);
  }
  return out;
}

std::vector<std::string> tokenize_text(std::string_view text, const TokenizerOptions& opts) {
  const std::string plain = strip_html(text);
  const auto& stop = english_stopwords();
  std::vector<std::string> tokens;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty() && !(opts.remove_stopwords && stop.count(cur))) tokens.push_back(cur);
    cur.clear();
  };
  for (unsigned char c : plain) {
    if (token_char(c)) {
      cur.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

InvertedIndex::InvertedIndex(IndexKind kind, std::vector<IndexedDoc> docs,
                             const std::vector<std::vector<std::string>>& tokens)
    : kind_(kind), docs_(std::move(docs)) {
  if (tokens.size() != docs_.size()) throw Error("token lists do not match documents");
  double total = 0.0;
  for (std::size_t d = 0; d < docs_.size(); ++d) {
    std::map<std::string, std::uint32_t> tf;
    for (const auto& t : tokens[d]) ++tf[t];
    docs_[d].length = static_cast<std::uint32_t>(tokens[d].size());
    total += docs_[d].length;
    for (const auto& [term, f] : tf) postings_[term].push_back({static_cast<std::uint32_t>(d), f});
  }
  avg_len_ = docs_.empty() ? 0.0 : total / static_cast<double>(docs_.size());
}

std::size_t InvertedIndex::df(const std::string& term) const {
  auto p = postings(term);
  return p ? p->size() : 0;
}

const std::vector<Posting>* InvertedIndex::postings(const std::string& term) const {
  auto it = postings_.find(term);
  return it == postings_.end() ? nullptr : &it->second;
}

bool operator==(const InvertedIndex& a, const InvertedIndex& b) {
  if (a.kind_ != b.kind_ || a.docs_.size() != b.docs_.size() || a.avg_len_ != b.avg_len_) return false;
  for (std::size_t i = 0; i < a.docs_.size(); ++i) {
    const auto& x = a.docs_[i];
    const auto& y = b.docs_[i];
    if (x.question != y.question || x.creation_ts != y.creation_ts || x.expert != y.expert || x.length != y.length) {
      return false;
    }
  }
  if (a.postings_.size() != b.postings_.size()) return false;
  for (const auto& [term, list] : a.postings_) {
    auto other = b.postings(term);
    if (!other || other->size() != list.size()) return false;
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (list[i].doc != (*other)[i].doc || list[i].tf != (*other)[i].tf) return false;
    }
  }
  return true;
}

void InvertedIndex::save(const std::filesystem::path& path, const std::string& stamp) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write index " + path.string());
  out.write(kMagic, sizeof kMagic);
  put(out, kIndexVersion);
  put(out, static_cast<std::uint32_t>(stamp.size()));
  out.write(stamp.data(), static_cast<std::streamsize>(stamp.size()));
  put(out, static_cast<std::uint8_t>(kind_));
  put(out, static_cast<std::uint64_t>(docs_.size()));
  for (const auto& d : docs_) {
    put(out, d.question);
    put(out, d.creation_ts);
    put(out, d.expert);
    put(out, d.length);
  }
  std::vector<const std::string*> terms;
  terms.reserve(postings_.size());
  for (const auto& [t, p] : postings_) terms.push_back(&t);
  std::sort(terms.begin(), terms.end(), [](auto* a, auto* b) { return *a < *b; });
  put(out, static_cast<std::uint64_t>(terms.size()));
  for (const auto* t : terms) {
    put(out, static_cast<std::uint32_t>(t->size()));
    out.write(t->data(), static_cast<std::streamsize>(t->size()));
    const auto& list = postings_.at(*t);
    put(out, static_cast<std::uint64_t>(list.size()));
    for (const auto& p : list) {
      put(out, p.doc);
      put(out, p.tf);
    }
  }
}

InvertedIndex InvertedIndex::load(const std::filesystem::path& path, std::string* stamp) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read index " + path.string());
  char magic[sizeof kMagic];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw Error("not an index file: " + path.string());
  if (get<std::uint32_t>(in) != kIndexVersion) throw Error("unsupported index version in " + path.string());
  std::string st(get<std::uint32_t>(in), '\0');
  in.read(st.data(), static_cast<std::streamsize>(st.size()));
  if (stamp) *stamp = st;
  InvertedIndex idx;
  idx.kind_ = static_cast<IndexKind>(get<std::uint8_t>(in));
  const auto n = get<std::uint64_t>(in);
  idx.docs_.resize(n);
  double total = 0.0;
  for (auto& d : idx.docs_) {
    d.question = get<PostId>(in);
    d.creation_ts = get<Timestamp>(in);
    d.expert = get<UserId>(in);
    d.length = get<std::uint32_t>(in);
    total += d.length;
  }
  idx.avg_len_ = n ? total / static_cast<double>(n) : 0.0;
  const auto terms = get<std::uint64_t>(in);
  for (std::uint64_t i = 0; i < terms; ++i) {
    std::string term(get<std::uint32_t>(in), '\0');
    in.read(term.data(), static_cast<std::streamsize>(term.size()));
    auto& list = idx.postings_[term];
    list.resize(get<std::uint64_t>(in));
    for (auto& p : list) {
      p.doc = get<std::uint32_t>(in);
      p.tf = get<std::uint32_t>(in);
      if (p.doc >= n) throw Error("corrupt posting in " + path.string());
    }
  }
  return idx;
}

std::vector<std::string> tag_query(const Question& q) { return q.tags; }

std::vector<std::string> text_query(const Question& q, const TokenizerOptions& opts) {
  return tokenize_text(q.title + " " + q.body, opts);
}

Indexes build_indexes(const Dataset& train, const TokenizerOptions& opts) {
  std::vector<IndexedDoc> docs;
  std::vector<std::vector<std::string>> tag_tokens;
  std::vector<std::vector<std::string>> text_tokens;
  for (const auto& [qid, q] : train.questions) {
    docs.push_back({qid, q.creation_ts, train.best_answerer(q), 0});
    tag_tokens.push_back(tag_query(q));
    text_tokens.push_back(text_query(q, opts));
  }
  return {InvertedIndex(IndexKind::kTag, docs, tag_tokens), InvertedIndex(IndexKind::kText, docs, text_tokens), opts};
}

RankedQuestions bm25_query(const InvertedIndex& index, const std::vector<std::string>& query_tokens,
                           std::size_t top_n, const Bm25Params& params, std::optional<PostId> exclude) {
  if (top_n < 1) throw Error("top_n must be at least 1");
  const auto& docs = index.docs();
  const double n = static_cast<double>(docs.size());
  const double avg = index.avg_doc_length();
  std::unordered_map<std::uint32_t, double> scores;
  for (const auto& term : query_tokens) {
    const auto* list = index.postings(term);
    if (!list) continue;
    const double df = static_cast<double>(list->size());
    const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
    for (const auto& p : *list) {
      const double tf = p.tf;
      const double norm = params.k1 * (1.0 - params.b + params.b * docs[p.doc].length / avg);
      scores[p.doc] += idf * tf * (params.k1 + 1.0) / (tf + norm);
    }
  }
  std::vector<std::pair<std::uint32_t, double>> hits;
  hits.reserve(scores.size());
  for (const auto& [d, s] : scores) {
    if (s <= 0.0 || (exclude && docs[d].question == *exclude)) continue;
    hits.emplace_back(d, s);
  }
  auto cmp = [&](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    const auto& da = docs[a.first];
    const auto& db = docs[b.first];
    if (da.creation_ts != db.creation_ts) return da.creation_ts > db.creation_ts;
    return da.question > db.question;
  };
  if (hits.size() > top_n) {
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(top_n), hits.end(), cmp);
    hits.resize(top_n);
  } else {
    std::sort(hits.begin(), hits.end(), cmp);
  }
  RankedQuestions out;
  out.reserve(hits.size());
  for (const auto& [d, s] : hits) out.push_back({docs[d].question, s, docs[d].expert});
  return out;
}

std::vector<UserId> content_order(const RankedQuestions& tag_results, const RankedQuestions& text_results,
                                  const Layer& layer, bool tag_first) {
  auto keep = [&](UserId u) { return layer.expert(u); };
  return tag_first ? interleave_experts(tag_results, text_results, keep)
                   : interleave_experts(text_results, tag_results, keep);
}

}  // namespace tuef
