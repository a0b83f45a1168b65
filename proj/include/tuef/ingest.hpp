#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tuef/types.hpp"

namespace tuef {

enum class PostKind { kQuestion, kAnswer };
enum class DumpFormat { kXmlDump, kJsonl };

struct RawPost {
  PostId id = 0;
  PostKind kind = PostKind::kQuestion;
  std::optional<UserId> owner_user_id;
  Timestamp creation_ts = 0;
  std::optional<std::string> title;
  std::string body;
  std::vector<std::string> tags;
  std::optional<PostId> accepted_answer_id;
  std::optional<PostId> parent_id;
};

struct ParseReport {
  std::size_t records = 0;
  std::size_t skipped = 0;
};

struct Question {
  PostId id = 0;
  UserId asker = 0;
  Timestamp creation_ts = 0;
  std::string title;
  std::string body;
  std::vector<std::string> tags;
  PostId accepted_answer_id = 0;

  friend bool operator==(const Question&, const Question&) = default;
};

struct Answer {
  PostId id = 0;
  UserId owner = 0;
  Timestamp creation_ts = 0;
  PostId parent_id = 0;
  std::string body;

  friend bool operator==(const Answer&, const Answer&) = default;
};

struct UserStats {
  int answers = 0;
  int accepted = 0;
  std::int64_t reputation = 0;

  friend bool operator==(const UserStats&, const UserStats&) = default;
};

struct CleanReport {
  std::size_t dropped_no_owner = 0;
  std::size_t dropped_no_accepted = 0;
  std::size_t dropped_missing_accepted = 0;
  std::size_t dropped_self_answered = 0;
  std::size_t dropped_no_tags = 0;
  std::size_t dropped_orphan_answers = 0;
};

/// Canonical cleaned corpus. Immutable after construction.
struct Dataset {
  std::map<PostId, Question> questions;
  std::map<PostId, Answer> answers;
  std::map<UserId, UserStats> users;
  std::set<std::string> tag_universe;

  UserId best_answerer(const Question& q) const { return answers.at(q.accepted_answer_id).owner; }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct SplitDataset {
  Dataset train;
  Dataset test;
  Timestamp split_ts = 0;
};

/// Parses ISO-8601 ("2020-07-01T12:00:00.123", optional trailing Z) to epoch seconds.
Timestamp parse_timestamp(const std::string& text);
std::string format_timestamp(Timestamp ts);

/// Splits "<python><flask>" or "|python|flask|" into lowercase, trimmed tags.
std::vector<std::string> decode_dump_tags(const std::string& field);

std::vector<RawPost> parse_posts(const std::filesystem::path& path, DumpFormat format,
                                 ParseReport* report = nullptr);
std::vector<RawPost> parse_posts_jsonl(std::istream& in, ParseReport* report = nullptr);
std::vector<RawPost> parse_posts_xml(std::istream& in, ParseReport* report = nullptr);

/// Reads {"id":..,"reputation":..} lines.
std::map<UserId, std::int64_t> parse_reputation(const std::filesystem::path& path);

Dataset clean(const std::vector<RawPost>& raw, const std::map<UserId, std::int64_t>& reputation = {},
              CleanReport* report = nullptr);

/// Inverse of clean for retained records; used to re-clean or re-export a Dataset.
std::vector<RawPost> to_raw(const Dataset& ds);

/// Recomputes per-user answer / accepted counts from the dataset's posts; keeps reputations.
void recompute_user_stats(Dataset& ds);

SplitDataset temporal_split(const Dataset& ds, double ratio);

/// Questions ordered by (creation_ts, id).
std::vector<const Question*> chronological(const Dataset& ds);

}  // namespace tuef
