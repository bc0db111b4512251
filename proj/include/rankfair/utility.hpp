#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "rankfair/run.hpp"

namespace rankfair {

inline constexpr int kDefaultUtilityCutoff = 10;
inline constexpr int kDefaultRelThreshold = 1;

enum class GainScheme { Linear, Exponential };

// Reciprocal rank of the first document with grade >= rel_threshold within
// the cutoff, 0 when none qualifies.
double mrr(const std::vector<ScoredDoc>& ranked,
           const std::map<std::string, int>& query_grades, int cutoff,
           int rel_threshold = kDefaultRelThreshold);

// DCG / IDCG with discount 1/log2(1+i); gains are the raw grades (Linear) or
// 2^grade - 1 (Exponential). The ideal ranking sorts all judged grades
// descending. 0 when the query has no positive grades.
double ndcg(const std::vector<ScoredDoc>& ranked,
            const std::map<std::string, int>& query_grades, int cutoff,
            GainScheme gain = GainScheme::Linear);

// Fraction of the query's relevant documents found in the top cutoff.
double recall(const std::vector<ScoredDoc>& ranked,
              const std::map<std::string, int>& query_grades, int cutoff,
              int rel_threshold = kDefaultRelThreshold);

struct QueryUtility {
  double mrr = 0.0;
  double ndcg = 0.0;
  double recall = 0.0;
  bool judged = true;  // false when the query is absent from the qrels
};

struct UtilityResult {
  std::map<std::string, QueryUtility> per_query;
  double mean_mrr = 0.0;
  double mean_ndcg = 0.0;
  double mean_recall = 0.0;
  int cutoff = kDefaultUtilityCutoff;
  int mrr_cutoff = kDefaultUtilityCutoff;
  int rel_threshold = kDefaultRelThreshold;
  int unjudged_queries = 0;
};

UtilityResult evaluate_run(const RankedRun& run, const Qrels& qrels, int cutoff,
                           int mrr_cutoff, int rel_threshold,
                           GainScheme gain = GainScheme::Linear);

struct TtestResult {
  double t_stat = 0.0;
  double p_value = 1.0;
  // Zero-variance differences with a non-zero mean get an epsilon variance so
  // the statistic stays finite; flagged for the report.
  bool zero_variance = false;
};

// Two-sided paired t-test over aligned per-query values. All-zero differences
// give p = 1 by convention. Throws on length mismatch or length < 2.
TtestResult paired_ttest(std::span<const double> a, std::span<const double> b);

}  // namespace rankfair
