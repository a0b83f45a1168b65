#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tuef/ingest.hpp"
#include "tuef/mlg.hpp"

namespace tuef {

enum class IndexKind : std::uint8_t { kTag = 0, kText = 1 };

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

struct TokenizerOptions {
  bool remove_stopwords = true;
};

const std::set<std::string>& english_stopwords();

/// Drops every <...> span; text between tags (including code blocks) is kept.
std::string strip_html(std::string_view html);

/// Lowercase alphanumeric runs of the tag-stripped text, minus stopwords.
std::vector<std::string> tokenize_text(std::string_view text, const TokenizerOptions& opts = {});

struct Posting {
  std::uint32_t doc = 0;  // index into InvertedIndex::docs
  std::uint32_t tf = 0;
};

struct IndexedDoc {
  PostId question = 0;
  Timestamp creation_ts = 0;
  UserId expert = 0;  // author of the accepted answer
  std::uint32_t length = 0;
};

class InvertedIndex {
 public:
  InvertedIndex() = default;
  InvertedIndex(IndexKind kind, std::vector<IndexedDoc> docs, const std::vector<std::vector<std::string>>& tokens);

  IndexKind kind() const { return kind_; }
  const std::vector<IndexedDoc>& docs() const { return docs_; }
  std::size_t doc_count() const { return docs_.size(); }
  double avg_doc_length() const { return avg_len_; }
  std::size_t df(const std::string& term) const;
  const std::vector<Posting>* postings(const std::string& term) const;
  const std::unordered_map<std::string, std::vector<Posting>>& vocabulary() const { return postings_; }

  /// `stamp` is an opaque provenance string stored in the file header.
  void save(const std::filesystem::path& path, const std::string& stamp = "") const;
  static InvertedIndex load(const std::filesystem::path& path, std::string* stamp = nullptr);

  friend bool operator==(const InvertedIndex& a, const InvertedIndex& b);

 private:
  IndexKind kind_ = IndexKind::kTag;
  std::vector<IndexedDoc> docs_;  // ascending question id
  std::unordered_map<std::string, std::vector<Posting>> postings_;
  double avg_len_ = 0.0;
};

struct RankedQuestion {
  PostId question = 0;
  double score = 0.0;
  UserId expert = 0;
};
using RankedQuestions = std::vector<RankedQuestion>;

struct Indexes {
  InvertedIndex tag;
  InvertedIndex text;
  /// Applied to text queries so they are tokenized like the indexed documents.
  TokenizerOptions tokenizer;
};

std::vector<std::string> tag_query(const Question& q);
std::vector<std::string> text_query(const Question& q, const TokenizerOptions& opts = {});

Indexes build_indexes(const Dataset& train, const TokenizerOptions& opts = {});

/// Scores every document sharing a term with the query; keeps the top_n positive scores.
/// Ties go to the newer question. `exclude` drops one question (the query itself).
RankedQuestions bm25_query(const InvertedIndex& index, const std::vector<std::string>& query_tokens,
                           std::size_t top_n, const Bm25Params& params = {},
                           std::optional<PostId> exclude = std::nullopt);

/// Alternates the two lists (tag list first unless `tag_first` is false), maps questions to
/// their best answerers, keeps experts of `layer` and drops repeats.
std::vector<UserId> content_order(const RankedQuestions& tag_results, const RankedQuestions& text_results,
                                  const Layer& layer, bool tag_first = true);

/// Same interleave restricted to experts accepted by `keep`.
template <typename Pred>
std::vector<UserId> interleave_experts(const RankedQuestions& first, const RankedQuestions& second, Pred keep) {
  std::vector<UserId> out;
  std::set<UserId> seen;
  auto take = [&](const RankedQuestion& r) {
    if (keep(r.expert) && seen.insert(r.expert).second) out.push_back(r.expert);
  };
  const std::size_t n = std::max(first.size(), second.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (i < first.size()) take(first[i]);
    if (i < second.size()) take(second[i]);
  }
  return out;
}

}  // namespace tuef
