#pragma once

#include <map>
#include <set>
#include <string>

#include "tuef/ingest.hpp"

namespace tuef {

struct ExpertSet {
  int beta = 0;
  std::set<UserId> candidates;
  double mean_ratio = 0.0;
  std::set<UserId> experts;
  std::map<UserId, double> ratios;
  /// Set when no candidate clears the strict ratio filter.
  std::string warning;

  bool contains(UserId u) const { return experts.count(u) > 0; }
};

/// Candidates have at least `beta` accepted answers; experts are the candidates whose
/// acceptance ratio is strictly above the candidates' mean ratio.
ExpertSet identify_experts(const Dataset& train, int beta);

}  // namespace tuef
