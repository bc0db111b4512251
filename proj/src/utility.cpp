#include "rankfair/utility.hpp"

#include <algorithm>
#include <cmath>

#include "rankfair/errors.hpp"
#include "rankfair/stats.hpp"

namespace rankfair {

namespace {

double discount(std::size_t position_one_based) {
  return 1.0 / std::log2(1.0 + static_cast<double>(position_one_based));
}

double gain_of(int grade, GainScheme scheme) {
  if (scheme == GainScheme::Linear) return static_cast<double>(grade);
  return std::exp2(static_cast<double>(grade)) - 1.0;
}

void check_cutoff(int cutoff) {
  if (cutoff < 1) {
    throw ValidationError("cutoff must be >= 1, got " + std::to_string(cutoff));
  }
}

}  // namespace

double mrr(const std::vector<ScoredDoc>& ranked,
           const std::map<std::string, int>& query_grades, int cutoff,
           int rel_threshold) {
  check_cutoff(cutoff);
  const std::size_t top = std::min(ranked.size(), static_cast<std::size_t>(cutoff));
  for (std::size_t i = 0; i < top; ++i) {
    auto it = query_grades.find(ranked[i].doc_id);
    if (it != query_grades.end() && it->second >= rel_threshold) {
      return 1.0 / static_cast<double>(i + 1);
    }
  }
  return 0.0;
}

double ndcg(const std::vector<ScoredDoc>& ranked,
            const std::map<std::string, int>& query_grades, int cutoff,
            GainScheme gain) {
  check_cutoff(cutoff);
  const std::size_t top = std::min(ranked.size(), static_cast<std::size_t>(cutoff));
  double dcg = 0.0;
  for (std::size_t i = 0; i < top; ++i) {
    auto it = query_grades.find(ranked[i].doc_id);
    if (it != query_grades.end() && it->second > 0) {
      dcg += gain_of(it->second, gain) * discount(i + 1);
    }
  }

  std::vector<int> grades;
  grades.reserve(query_grades.size());
  for (const auto& [doc, grade] : query_grades) {
    if (grade > 0) grades.push_back(grade);
  }
  std::sort(grades.begin(), grades.end(), std::greater<>());
  double idcg = 0.0;
  const std::size_t ideal_top =
      std::min(grades.size(), static_cast<std::size_t>(cutoff));
  for (std::size_t i = 0; i < ideal_top; ++i) {
    idcg += gain_of(grades[i], gain) * discount(i + 1);
  }
  return idcg > 0.0 ? dcg / idcg : 0.0;
}

double recall(const std::vector<ScoredDoc>& ranked,
              const std::map<std::string, int>& query_grades, int cutoff,
              int rel_threshold) {
  check_cutoff(cutoff);
  std::size_t relevant_total = 0;
  for (const auto& [doc, grade] : query_grades) {
    if (grade >= rel_threshold) ++relevant_total;
  }
  if (relevant_total == 0) return 0.0;
  const std::size_t top = std::min(ranked.size(), static_cast<std::size_t>(cutoff));
  std::size_t found = 0;
  for (std::size_t i = 0; i < top; ++i) {
    auto it = query_grades.find(ranked[i].doc_id);
    if (it != query_grades.end() && it->second >= rel_threshold) ++found;
  }
  return static_cast<double>(found) / static_cast<double>(relevant_total);
}

UtilityResult evaluate_run(const RankedRun& run, const Qrels& qrels, int cutoff,
                           int mrr_cutoff, int rel_threshold, GainScheme gain) {
  check_cutoff(cutoff);
  check_cutoff(mrr_cutoff);
  UtilityResult result;
  result.cutoff = cutoff;
  result.mrr_cutoff = mrr_cutoff;
  result.rel_threshold = rel_threshold;
  if (run.queries.empty()) {
    throw ValidationError("run '" + run.ranker_tag + "' has no queries");
  }
  static const std::map<std::string, int> kNoGrades;
  for (const auto& [qid, ranked] : run.queries) {
    QueryUtility qu;
    auto judged = qrels.grades.find(qid);
    if (judged == qrels.grades.end()) {
      qu.judged = false;
      ++result.unjudged_queries;
    }
    const auto& grades = judged == qrels.grades.end() ? kNoGrades : judged->second;
    qu.mrr = mrr(ranked, grades, mrr_cutoff, rel_threshold);
    qu.ndcg = ndcg(ranked, grades, cutoff, gain);
    qu.recall = recall(ranked, grades, cutoff, rel_threshold);
    result.mean_mrr += qu.mrr;
    result.mean_ndcg += qu.ndcg;
    result.mean_recall += qu.recall;
    result.per_query.emplace(qid, qu);
  }
  const double n = static_cast<double>(result.per_query.size());
  result.mean_mrr /= n;
  result.mean_ndcg /= n;
  result.mean_recall /= n;
  return result;
}

TtestResult paired_ttest(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ValidationError("paired t-test needs samples of equal length");
  }
  if (a.size() < 2) {
    throw ValidationError("paired t-test needs at least 2 pairs, got " +
                          std::to_string(a.size()));
  }
  const std::size_t n = a.size();
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
  mean /= static_cast<double>(n);

  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = (a[i] - b[i]) - mean;
    ss += d * d;
  }
  double variance = ss / static_cast<double>(n - 1);

  TtestResult result;
  if (variance == 0.0) {
    if (mean == 0.0) {
      result.t_stat = 0.0;
      result.p_value = 1.0;
      return result;
    }
    variance = 1e-12;
    result.zero_variance = true;
  }
  result.t_stat = mean / std::sqrt(variance / static_cast<double>(n));
  result.p_value =
      stats::student_t_two_sided_p(result.t_stat, static_cast<double>(n - 1));
  return result;
}

}  // namespace rankfair
