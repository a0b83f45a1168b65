#include "tuef/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

#include <boost/math/special_functions/beta.hpp>

#include "json.hpp"

namespace tuef {

std::string to_string(Metric m) {
  switch (m) {
    case Metric::kP1: return "P@1";
    case Metric::kNdcg3: return "NDCG@3";
    case Metric::kMrr: return "MRR";
    case Metric::kR100: return "R@100";
    case Metric::kHit5: return "Hit@5";
  }
  return "?";
}

std::size_t rank_of(const std::vector<UserId>& ranked, UserId relevant) {
  auto it = std::find(ranked.begin(), ranked.end(), relevant);
  return it == ranked.end() ? 0 : static_cast<std::size_t>(it - ranked.begin()) + 1;
}

EvalReport compute_metrics(const RunResult& run) {
  EvalReport r;
  r.query_count = run.queries.size();
  for (Metric m : kAllMetrics) {
    r.per_query[m].reserve(run.queries.size());
    r.mean[m] = 0.0;
  }
  for (const auto& q : run.queries) {
    std::set<UserId> seen(q.ranked.begin(), q.ranked.end());
    if (seen.size() != q.ranked.size()) {
      throw Error("ranked list of query " + std::to_string(q.query) + " contains duplicates");
    }
    const auto rank = rank_of(q.ranked, q.relevant);
    const bool found = rank > 0;
    r.per_query[Metric::kP1].push_back(rank == 1 ? 1.0 : 0.0);
    r.per_query[Metric::kNdcg3].push_back(found && rank <= 3 ? 1.0 / std::log2(rank + 1.0) : 0.0);
    r.per_query[Metric::kMrr].push_back(found ? 1.0 / static_cast<double>(rank) : 0.0);
    r.per_query[Metric::kR100].push_back(found && rank <= 100 ? 1.0 : 0.0);
    r.per_query[Metric::kHit5].push_back(found && rank <= 5 ? 1.0 : 0.0);
  }
  if (r.query_count > 0) {
    for (Metric m : kAllMetrics) {
      double s = 0.0;
      for (double v : r.per_query[m]) s += v;
      r.mean[m] = s / static_cast<double>(r.query_count);
    }
  }
  return r;
}

double student_t_two_sided(double t, double df) {
  const double x = df / (df + t * t);
  return boost::math::ibeta(df / 2.0, 0.5, x);
}

double paired_ttest(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw Error("paired t-test needs equal-length samples");
  if (a.size() < 2) throw Error("paired t-test needs at least two pairs");
  const auto n = static_cast<double>(a.size());
  double mean = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) mean += a[i] - b[i];
  mean /= n;
  double ss = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i] - mean;
    ss += d * d;
  }
  const double var = ss / (n - 1.0);
  if (var <= 1e-300) return std::abs(mean) <= 1e-15 ? 1.0 : 0.0;
  const double t = mean / std::sqrt(var / n);
  return student_t_two_sided(t, n - 1.0);
}

ComparisonTable compare_runs(const std::vector<std::pair<std::string, RunResult>>& runs, const std::string& baseline,
                             double significance) {
  auto base_it = std::find_if(runs.begin(), runs.end(), [&](const auto& r) { return r.first == baseline; });
  if (base_it == runs.end()) throw Error("baseline run " + baseline + " not found");
  auto query_ids = [](const RunResult& r) {
    std::vector<PostId> ids;
    for (const auto& q : r.queries) ids.push_back(q.query);
    return ids;
  };
  const auto base_ids = query_ids(base_it->second);
  const auto base = compute_metrics(base_it->second);

  ComparisonTable table;
  table.baseline = baseline;
  for (const auto& [name, run] : runs) {
    if (query_ids(run) != base_ids) throw Error("run " + name + " covers a different query set");
    const auto rep = compute_metrics(run);
    ComparisonRow row;
    row.name = name;
    for (Metric m : kAllMetrics) {
      row.mean[m] = rep.mean.at(m);
      row.marker[m] = 0;
      row.p_value[m] = 1.0;
      if (name == baseline || rep.query_count < 2) continue;
      const double p = paired_ttest(rep.per_query.at(m), base.per_query.at(m));
      row.p_value[m] = p;
      if (p < significance) row.marker[m] = rep.mean.at(m) > base.mean.at(m) ? 1 : -1;
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string ComparisonTable::to_text() const {
  std::ostringstream out;
  const Metric cols[] = {Metric::kP1, Metric::kNdcg3, Metric::kR100, Metric::kMrr};
  out << std::left << std::setw(12) << "";
  for (Metric m : cols) out << std::setw(10) << to_string(m);
  out << '\n';
  for (const auto& row : rows) {
    out << std::setw(12) << row.name;
    for (Metric m : cols) {
      std::ostringstream cell;
      cell << std::fixed << std::setprecision(3) << row.mean.at(m);
      const int mk = row.marker.at(m);
      if (mk > 0) cell << "▲";
      if (mk < 0) cell << "▼";
      out << std::setw(10 + (mk != 0 ? 2 : 0)) << cell.str();
    }
    out << '\n';
  }
  out << "markers: paired t-test vs " << baseline << ", p < 0.05\n";
  return out.str();
}

std::string ComparisonTable::to_json() const {
  nlohmann::json j;
  j["baseline"] = baseline;
  j["rows"] = nlohmann::json::array();
  for (const auto& row : rows) {
    nlohmann::json r;
    r["name"] = row.name;
    for (Metric m : kAllMetrics) {
      r["metrics"][to_string(m)] = {{"mean", row.mean.at(m)}, {"p_value", row.p_value.at(m)}, {"marker", row.marker.at(m)}};
    }
    j["rows"].push_back(std::move(r));
  }
  return j.dump(1);
}

std::string report_json(const EvalReport& r) {
  nlohmann::json j;
  j["query_count"] = r.query_count;
  for (Metric m : kAllMetrics) j["metrics"][to_string(m)] = r.mean.at(m);
  return j.dump(1);
}

std::string per_query_csv(const RunResult& run, const EvalReport& r) {
  std::ostringstream out;
  out.precision(17);
  out << "query_id,relevant,rank";
  for (Metric m : kAllMetrics) out << ',' << to_string(m);
  out << '\n';
  for (std::size_t i = 0; i < run.queries.size(); ++i) {
    const auto& q = run.queries[i];
    out << q.query << ',' << q.relevant << ',' << rank_of(q.ranked, q.relevant);
    for (Metric m : kAllMetrics) out << ',' << r.per_query.at(m)[i];
    out << '\n';
  }
  return out.str();
}

}  // namespace tuef
