#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "tuef/selection.hpp"

namespace tuef {

enum Feature : int {
  kReputation,
  kAnswers,
  kAcceptedAnswers,
  kRatio,
  kAvgActivity,
  kStdActivity,
  kLayerCount,
  kQueryKnowledge,
  kVisitCountContent,
  kVisitCountNetwork,
  kStepsContent,
  kStepsNetwork,
  kBetweennessPos,
  kBetweennessScore,
  kScoreIndexTag,
  kScoreIndexText,
  kFrequencyIndexTag,
  kFrequencyIndexText,
  kEigenvector,
  kPageRank,
  kCloseness,
  kDegree,
  kAvgWeights,
  kNumFeatures
};

using FeatureVector = Eigen::Matrix<double, kNumFeatures, 1>;

const std::array<std::string_view, kNumFeatures>& feature_names();

/// Query-independent user profile (the static features).
struct UserProfile {
  double reputation = 0;
  double answers = 0;
  double accepted = 0;
  double ratio = 0;
  double avg_activity = kFeatureSentinel;
  double std_activity = kFeatureSentinel;
};

/// Mean and population standard deviation of the gaps (hours) between consecutive answers.
std::pair<double, double> activity_hours(std::vector<Timestamp> answer_times);

std::map<UserId, UserProfile> build_profiles(const Dataset& train);

struct FeatureContext {
  const MultiLayerGraph& graph;
  const std::vector<CentralityTable>& centralities;
  const std::map<UserId, UserProfile>& profiles;
};

struct CandidateFeatures {
  UserId expert = 0;
  FeatureVector x;
};

/// One feature vector per candidate, ascending expert id.
std::vector<CandidateFeatures> extract_features(const CandidateSet& candidates, const RetrievalResults& retrieved,
                                                const FeatureContext& ctx);

/// Named subsets used by the single-method ablations.
enum class FeatureSet { kAll, kNetworkBased, kContentBased };
std::vector<int> feature_columns(FeatureSet set);
std::string to_string(FeatureSet set);

}  // namespace tuef
