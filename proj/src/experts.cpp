#include "tuef/experts.hpp"

namespace tuef {

ExpertSet identify_experts(const Dataset& train, int beta) {
  if (beta < 1) throw Error("beta must be at least 1");
  ExpertSet es;
  es.beta = beta;
  double sum = 0.0;
  for (const auto& [u, st] : train.users) {
    if (st.accepted < beta) continue;
    es.candidates.insert(u);
    const double r = static_cast<double>(st.accepted) / st.answers;
    es.ratios[u] = r;
    sum += r;
  }
  if (es.candidates.empty()) {
    throw Error("no user has " + std::to_string(beta) + " accepted answers; try a smaller beta");
  }
  es.mean_ratio = sum / static_cast<double>(es.candidates.size());
  for (const auto& [u, r] : es.ratios) {
    if (r > es.mean_ratio) es.experts.insert(u);
  }
  if (es.experts.empty()) {
    es.warning = "no candidate has an acceptance ratio above the mean; the expert set is empty";
  }
  return es;
}

}  // namespace tuef
