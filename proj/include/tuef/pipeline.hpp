#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tuef/eval.hpp"
#include "tuef/experts.hpp"
#include "tuef/features.hpp"
#include "tuef/ranker.hpp"
#include "tuef/selection.hpp"

namespace tuef {

enum class AblationMode { kTuef, kBc, kBm25, kNb, kCb, kSl, kNorw };

std::string to_string(AblationMode m);
AblationMode ablation_mode_from_string(const std::string& s);
/// Row label used in comparison tables (TUEF, BC, BM25, TUEF_NB, ...).
std::string display_name(AblationMode m);

struct PipelineConfig {
  std::filesystem::path data;
  std::filesystem::path users;  // optional reputation file
  std::filesystem::path artifacts = "artifacts";

  int lambda = 10;
  int k_min = 2;
  int k_max = 20;
  int epsilon = 3;
  double delta = 0.5;
  int beta = 20;
  double alpha = 0.001;
  int walks = 5;
  int steps = 10;
  int top_n = 1000;
  bool remove_stopwords = true;
  std::uint64_t seed = 42;
  AblationMode mode = AblationMode::kTuef;
  /// Random-search draws; 0 trains once at the search-space midpoint.
  int tuning_budget = 50;

  double split_ratio = 0.8;
  /// The most recent training questions used to build the LtR dataset.
  int ltr_queries = 50000;
  /// Leading test questions (answered by an expert) that are evaluated.
  int test_queries = 5000;
  double ltr_train_ratio = 0.8;

  bool force = false;
  bool verbose = true;

  void validate() const;
  /// Canonical JSON of every parameter that affects artifacts (paths and flags excluded).
  std::string canonical() const;
  /// 16 hex digits of FNV-1a over canonical().
  std::string hash() const;
  SelectionConfig selection() const;
  FeatureSet feature_set() const;
  /// True for the modes that rank with a trained model.
  bool uses_ranker() const;
};

/// Fixed artifact file names inside PipelineConfig::artifacts.
struct ArtifactLayout {
  std::filesystem::path root;

  std::filesystem::path train_dir() const { return root / "train"; }
  std::filesystem::path test_dir() const { return root / "test"; }
  std::filesystem::path split() const { return root / "split.json"; }
  std::filesystem::path clustering() const { return root / "clustering.json"; }
  std::filesystem::path experts() const { return root / "experts.jsonl"; }
  std::filesystem::path graph() const { return root / "graph.json"; }
  std::filesystem::path tag_index() const { return root / "index_tag.bin"; }
  std::filesystem::path text_index() const { return root / "index_text.bin"; }
  std::filesystem::path ltr_candidates() const { return root / "candidates_ltr.jsonl"; }
  std::filesystem::path test_candidates() const { return root / "candidates_test.jsonl"; }
  std::filesystem::path ltr_train() const { return root / "ltr_train.tsv"; }
  std::filesystem::path ltr_train_groups() const { return root / "ltr_train.groups"; }
  std::filesystem::path ltr_valid() const { return root / "ltr_valid.tsv"; }
  std::filesystem::path ltr_valid_groups() const { return root / "ltr_valid.groups"; }
  std::filesystem::path ltr_manifest() const { return root / "ltr.json"; }
  std::filesystem::path hyperparams() const { return root / "hyperparams.json"; }
  std::filesystem::path model() const { return root / "model.json"; }
  std::filesystem::path importance() const { return root / "feature_importance.json"; }
  std::filesystem::path run() const { return root / "run.json"; }
  std::filesystem::path report_json() const { return root / "report.json"; }
  std::filesystem::path report_text() const { return root / "report.txt"; }
  std::filesystem::path per_query() const { return root / "per_query.csv"; }
};

inline constexpr const char* kStages[] = {"ingest", "topics", "experts", "graph", "index", "select",
                                          "ltr-build", "tune", "train", "rank", "eval"};

/// Runs one named stage against the artifact directory. Errors name the failing stage.
void run_stage(const std::string& stage, const PipelineConfig& cfg);

/// Every stage in order; stages a mode does not need are skipped.
EvalReport run_pipeline(const PipelineConfig& cfg);

/// Runs each mode in artifacts/ablation/<mode> and compares them against TUEF (or the first mode).
ComparisonTable run_ablation(const PipelineConfig& cfg, const std::vector<AblationMode>& modes);

/// Question from a JSON object with "title", "body", "tags" and an optional "id". Tags may be an
/// array or a dump string such as "<python><flask>".
Question read_question_file(const std::filesystem::path& path);

/// Candidate selection for one question against the artifacts of `cfg`.
CandidateSet select_for_question(const PipelineConfig& cfg, const Question& q);

/// BM25 over a persisted index. Tag queries split `text` on whitespace, commas or dump brackets.
RankedQuestions query_index(const PipelineConfig& cfg, IndexKind kind, const std::string& text, std::size_t top_n);

/// Test questions in chronological order whose best answerer is an expert, at most `limit`.
std::vector<const Question*> evaluation_queries(const Dataset& test, const ExpertSet& experts, std::size_t limit);

/// Labels the accepted answerer 1 and every other candidate 0; nullopt when the answerer is
/// missing or the group has fewer than two candidates.
std::optional<QueryGroup> make_group(PostId query, UserId relevant, const std::vector<CandidateFeatures>& rows,
                                     const std::vector<int>& columns);

}  // namespace tuef
