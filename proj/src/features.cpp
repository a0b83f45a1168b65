#include "tuef/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tuef {

const std::array<std::string_view, kNumFeatures>& feature_names() {
  static const std::array<std::string_view, kNumFeatures> names = {
      "Reputation",        "Answers",           "AcceptedAnswers",    "Ratio",
      "AvgActivity",       "StdActivity",       "LayerCount",         "QueryKnowledge",
      "VisitCountContent", "VisitCountNetwork", "StepsContent",       "StepsNetwork",
      "BetweennessPos",    "BetweennessScore",  "ScoreIndexTag",      "ScoreIndexText",
      "FrequencyIndexTag", "FrequencyIndexText", "Eigenvector",       "PageRank",
      "Closeness",         "Degree",            "AvgWeights"};
  return names;
}

std::pair<double, double> activity_hours(std::vector<Timestamp> answer_times) {
  if (answer_times.size() < 2) return {kFeatureSentinel, kFeatureSentinel};
  std::sort(answer_times.begin(), answer_times.end());
  const auto gaps = answer_times.size() - 1;
  double mean = 0.0;
  for (std::size_t i = 1; i < answer_times.size(); ++i) mean += (answer_times[i] - answer_times[i - 1]) / 3600.0;
  mean /= static_cast<double>(gaps);
  double var = 0.0;
  for (std::size_t i = 1; i < answer_times.size(); ++i) {
    const double d = (answer_times[i] - answer_times[i - 1]) / 3600.0 - mean;
    var += d * d;
  }
  return {mean, std::sqrt(var / static_cast<double>(gaps))};
}

std::map<UserId, UserProfile> build_profiles(const Dataset& train) {
  std::map<UserId, std::vector<Timestamp>> times;
  for (const auto& [aid, a] : train.answers) times[a.owner].push_back(a.creation_ts);
  std::map<UserId, UserProfile> out;
  for (const auto& [u, st] : train.users) {
    UserProfile p;
    p.reputation = static_cast<double>(st.reputation);
    p.answers = st.answers;
    p.accepted = st.accepted;
    p.ratio = st.answers > 0 ? static_cast<double>(st.accepted) / st.answers : 0.0;
    if (auto it = times.find(u); it != times.end()) {
      std::tie(p.avg_activity, p.std_activity) = activity_hours(it->second);
    }
    out.emplace(u, p);
  }
  return out;
}

std::vector<CandidateFeatures> extract_features(const CandidateSet& candidates, const RetrievalResults& retrieved,
                                                const FeatureContext& ctx) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::map<UserId, std::pair<double, int>> tag_hits;
  std::map<UserId, std::pair<double, int>> text_hits;
  for (const auto& r : retrieved.tag) {
    auto& h = tag_hits[r.expert];
    h.first += r.score;
    ++h.second;
  }
  for (const auto& r : retrieved.text) {
    auto& h = text_hits[r.expert];
    h.first += r.score;
    ++h.second;
  }

  std::vector<CandidateFeatures> out;
  out.reserve(candidates.candidates.size());
  for (UserId u : candidates.candidates) {
    FeatureVector x = FeatureVector::Zero();
    if (auto it = ctx.profiles.find(u); it != ctx.profiles.end()) {
      const auto& p = it->second;
      x[kReputation] = p.reputation;
      x[kAnswers] = p.answers;
      x[kAcceptedAnswers] = p.accepted;
      x[kRatio] = p.ratio;
      x[kAvgActivity] = p.avg_activity;
      x[kStdActivity] = p.std_activity;
    }

    std::set<int> layers;
    double steps_content = inf;
    double steps_network = inf;
    for (const auto& t : candidates.traces) {
      auto e = t.entries.find(u);
      if (e == t.entries.end()) continue;
      layers.insert(t.layer);
      if (t.method == Method::kContent) {
        x[kVisitCountContent] += e->second.visit_count;
        steps_content = std::min(steps_content, static_cast<double>(e->second.steps));
      } else {
        x[kVisitCountNetwork] += e->second.visit_count;
        steps_network = std::min(steps_network, static_cast<double>(e->second.steps));
      }
    }
    x[kStepsContent] = std::isfinite(steps_content) ? steps_content : kFeatureSentinel;
    x[kStepsNetwork] = std::isfinite(steps_network) ? steps_network : kFeatureSentinel;

    x[kLayerCount] = static_cast<double>(layers.size());
    double pos = inf;
    for (int l : layers) {
      const Layer& layer = ctx.graph.layers.at(l);
      const CentralityTable& c = ctx.centralities.at(l);
      const auto i = *layer.index_of(u);
      x[kQueryKnowledge] += static_cast<double>(layer.answers_in_layer[i]) / layer.accepted_in_layer[i];
      if (c.betweenness_rank[i] > 0) pos = std::min(pos, static_cast<double>(c.betweenness_rank[i]));
      x[kBetweennessScore] = std::max(x[kBetweennessScore], c.betweenness[i]);
      x[kEigenvector] = std::max(x[kEigenvector], c.eigenvector[i]);
      x[kPageRank] = std::max(x[kPageRank], c.pagerank[i]);
      x[kCloseness] = std::max(x[kCloseness], c.closeness[i]);
      x[kDegree] += c.degree[i];
      x[kAvgWeights] += c.avg_weight[i];
    }
    x[kBetweennessPos] = std::isfinite(pos) ? pos : kFeatureSentinel;

    if (auto it = tag_hits.find(u); it != tag_hits.end()) {
      x[kScoreIndexTag] = it->second.first;
      x[kFrequencyIndexTag] = it->second.second;
    }
    if (auto it = text_hits.find(u); it != text_hits.end()) {
      x[kScoreIndexText] = it->second.first;
      x[kFrequencyIndexText] = it->second.second;
    }
    out.push_back({u, x});
  }
  return out;
}

std::vector<int> feature_columns(FeatureSet set) {
  std::vector<int> cols = {kReputation, kAnswers, kAcceptedAnswers, kRatio, kAvgActivity, kStdActivity};
  switch (set) {
    case FeatureSet::kAll:
      for (int f = kLayerCount; f < kNumFeatures; ++f) cols.push_back(f);
      break;
    case FeatureSet::kNetworkBased:
      cols.insert(cols.end(), {kLayerCount, kQueryKnowledge, kVisitCountNetwork, kStepsNetwork, kBetweennessPos,
                               kBetweennessScore, kEigenvector, kPageRank, kCloseness, kDegree, kAvgWeights});
      break;
    case FeatureSet::kContentBased:
      cols.insert(cols.end(), {kLayerCount, kQueryKnowledge, kVisitCountContent, kStepsContent, kScoreIndexTag,
                               kScoreIndexText, kFrequencyIndexTag, kFrequencyIndexText, kDegree, kAvgWeights});
      break;
  }
  return cols;
}

std::string to_string(FeatureSet set) {
  switch (set) {
    case FeatureSet::kAll: return "all";
    case FeatureSet::kNetworkBased: return "network";
    case FeatureSet::kContentBased: return "content";
  }
  return "all";
}

}  // namespace tuef
