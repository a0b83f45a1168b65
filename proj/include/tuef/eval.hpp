#pragma once

#include <map>
#include <string>
#include <vector>

#include "tuef/types.hpp"

namespace tuef {

struct QueryRun {
  PostId query = 0;
  std::vector<UserId> ranked;
  UserId relevant = 0;
};

/// One ranked list per query with the single relevant expert.
struct RunResult {
  std::vector<QueryRun> queries;
};

enum class Metric { kP1, kNdcg3, kMrr, kR100, kHit5 };
inline constexpr Metric kAllMetrics[] = {Metric::kP1, Metric::kNdcg3, Metric::kR100, Metric::kMrr, Metric::kHit5};
std::string to_string(Metric m);

struct EvalReport {
  std::size_t query_count = 0;
  std::map<Metric, double> mean;
  std::map<Metric, std::vector<double>> per_query;
};

/// 1-based rank of `relevant`, 0 if absent.
std::size_t rank_of(const std::vector<UserId>& ranked, UserId relevant);

EvalReport compute_metrics(const RunResult& run);

/// Two-sided paired Student t-test. Zero variance of the differences gives 1 when the means
/// agree and 0 otherwise.
double paired_ttest(const std::vector<double>& a, const std::vector<double>& b);

/// Two-sided tail probability of Student's t with `df` degrees of freedom.
double student_t_two_sided(double t, double df);

struct ComparisonRow {
  std::string name;
  std::map<Metric, double> mean;
  /// +1 significantly better than the baseline, -1 significantly worse, 0 otherwise.
  std::map<Metric, int> marker;
  std::map<Metric, double> p_value;
};

struct ComparisonTable {
  std::string baseline;
  std::vector<ComparisonRow> rows;

  std::string to_text() const;
  std::string to_json() const;
};

ComparisonTable compare_runs(const std::vector<std::pair<std::string, RunResult>>& runs, const std::string& baseline,
                             double significance = 0.05);

std::string report_json(const EvalReport& r);
std::string per_query_csv(const RunResult& run, const EvalReport& r);

}  // namespace tuef
