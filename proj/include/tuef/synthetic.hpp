#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "tuef/ingest.hpp"

namespace tuef {

/// Desk-scale planted corpus: each topic owns a broad head tag plus specific tags, and each
/// planted expert specialises in one topic and a share of its specific tags.
struct SyntheticSpec {
  int users = 200;
  int experts = 20;
  int tags = 50;
  int topics = 5;
  int questions = 5000;
  /// Share of an expert's affinity on their primary topic; the rest is spread evenly.
  double affinity_concentration = 0.9;
  /// Probability that the expert owning the question's tag answers it.
  double owner_answer_prob = 0.85;
  /// Probability that another expert of the question's topic answers.
  double peer_answer_prob = 0.5;
  /// Non-expert answers per question, drawn uniformly from [min, max].
  int noise_answers_min = 1;
  int noise_answers_max = 2;
  /// Non-experts that answer often but are rarely accepted.
  int active_users = 40;
  Timestamp start_ts = 1593561600;  // 2020-07-01T00:00:00Z
  std::uint64_t seed = 7;

  void validate() const;
};

struct PlantedExpert {
  UserId user = 0;
  int primary_topic = 0;
  std::vector<double> topic_affinity;
  std::vector<std::string> owned_tags;
};

struct SyntheticTruth {
  std::map<std::string, int> tag_topic;
  std::vector<PlantedExpert> experts;
};

struct SyntheticCorpus {
  std::vector<RawPost> posts;
  SyntheticTruth truth;
};

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec);

/// Posts as JSONL in the canonical ingest format.
void write_posts_jsonl(const std::vector<RawPost>& posts, const std::filesystem::path& path);
void write_truth_json(const SyntheticTruth& truth, const std::filesystem::path& path);

}  // namespace tuef
