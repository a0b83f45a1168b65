#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "tuef/centrality.hpp"
#include "tuef/eval.hpp"
#include "tuef/experts.hpp"
#include "tuef/ingest.hpp"
#include "tuef/mlg.hpp"
#include "tuef/selection.hpp"
#include "tuef/topics.hpp"

// On-disk forms of the pipeline's intermediate results. Every writer takes a `stamp` (the
// producing config hash) that the matching reader hands back for upstream checks.
namespace tuef {

/// questions.jsonl, answers.jsonl, users.jsonl; each file opens with a {"_meta": ...} line.
void write_dataset_dir(const Dataset& ds, const std::filesystem::path& dir, const std::string& stamp);
Dataset read_dataset_dir(const std::filesystem::path& dir, std::string* stamp = nullptr);

void write_clustering(const TagClustering& c, const std::filesystem::path& path, const std::string& stamp);
TagClustering read_clustering(const std::filesystem::path& path, std::string* stamp = nullptr);

/// One JSONL record per candidate (user, accepted, answers, ratio, is_expert); beta and the mean
/// ratio ride on the meta line.
void write_experts(const ExpertSet& e, const std::map<UserId, UserStats>& users, const std::filesystem::path& path,
                   const std::string& stamp);
ExpertSet read_experts(const std::filesystem::path& path, std::string* stamp = nullptr);

/// Layers with their node attributes, edges and centralities. The clustering is stored separately.
void write_graph(const MultiLayerGraph& g, const std::vector<CentralityTable>& centralities,
                 const std::filesystem::path& path, const std::string& stamp);
void read_graph(const std::filesystem::path& path, MultiLayerGraph& g, std::vector<CentralityTable>& centralities,
                std::string* stamp = nullptr);

void write_candidates(const std::vector<CandidateSet>& sets, const std::filesystem::path& path,
                      const std::string& stamp);
/// One candidate set with its traces; `indent` < 0 gives a single line.
std::string candidate_set_json(const CandidateSet& cs, int indent = -1);
std::vector<CandidateSet> read_candidates(const std::filesystem::path& path, std::string* stamp = nullptr);

void write_run(const RunResult& run, const std::string& name, const std::filesystem::path& path,
               const std::string& stamp);
RunResult read_run(const std::filesystem::path& path, std::string* stamp = nullptr);

/// Writes `text` to `path`, replacing any previous content.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace tuef
