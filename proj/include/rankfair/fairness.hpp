#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "rankfair/neutrality.hpp"
#include "rankfair/run.hpp"

namespace rankfair {

inline constexpr int kDefaultFairnessCutoff = 10;
inline constexpr int kDefaultBackgroundDepth = 200;

// DCG-style position weight 1 / log2(1 + rank), rank >= 1.
double position_bias(int rank);

// Position-discounted sum of neutrality scores over the top `cutoff`
// positions. Lists shorter than the cutoff contribute only existing
// positions.
double fairr(std::span<const double> omegas_in_rank_order, int cutoff);

// Best FaiRR achievable by reordering the background pool: its scores
// sorted descending, then fairr. Throws on an empty pool.
double ifairr(std::span<const double> background_omegas, int cutoff);

struct QueryFairness {
  double fairr = 0.0;
  double ifairr = 0.0;
  double nfairr = 0.0;
  // An all-biased pool makes IFaiRR zero; every ordering is then equally fair
  // and NFaiRR is defined as 1. Flagged so reports can surface it.
  bool zero_ifairr = false;
};

// FaiRR / IFaiRR for one query. Every doc-id must be present in the table.
QueryFairness nfairr_query(const std::vector<ScoredDoc>& ranked,
                           const NeutralityTable& table,
                           const std::vector<std::string>& background, int cutoff);

struct FairnessResult {
  std::map<std::string, QueryFairness> per_query;
  double aggregate_nfairr = 0.0;  // arithmetic mean of per-query values
  int cutoff = kDefaultFairnessCutoff;
  int zero_ifairr_queries = 0;
};

// Whole-run evaluation; every query in the run needs a background entry.
FairnessResult nfairr_run(const RankedRun& run, const NeutralityTable& table,
                          const BackgroundSet& background, int cutoff);

// Expected FaiRR over all ranking permutations of a document set:
// mean(omega) * sum of position weights up to min(cutoff, |set|).
double set_fairr(std::span<const double> omegas, int cutoff);

// Testing oracle: enumerates every permutation (|set| <= 8) and averages
// FaiRR directly.
double set_fairr_bruteforce(std::span<const double> omegas, int cutoff);

// SetFaiRR normalized by the background pool's IFaiRR; same zero-IFaiRR
// convention as nfairr_query.
double nfairr_set(std::span<const double> set_omegas,
                  std::span<const double> background_omegas, int cutoff);

}  // namespace rankfair
