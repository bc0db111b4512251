#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rankfair/run.hpp"

namespace rankfair {

// Betas at or above this value select purely on fairness. Together with the
// exact beta == 0 case this keeps the F_beta extremes equal to the plain
// argmax over one delta, which the raw formula loses once the other delta
// hits 0 after min-max normalization.
inline constexpr double kFairnessOnlyBeta = 1e6;

// Min-max normalization: (x - min) / (max - min); all zeros when the values
// are constant.
std::vector<double> delta_normalize(std::span<const double> values);

// F_beta combination of a normalized utility delta (dn) and fairness delta
// (df): (1 + b^2) * dn * df / (b^2 * dn + df), with 0 for a zero denominator.
// beta == 0 returns dn, beta >= kFairnessOnlyBeta returns df.
double f_beta(double dn, double df, double beta);

/// Aggregate and per-query metrics of one model variation. The per-query
/// vectors of every variation in a candidate set are aligned to the same
/// query list sorted by id.
struct VariationScore {
  std::string variation_id;
  double aggregate_nfairr = 0.0;
  double aggregate_ndcg = 0.0;
  std::vector<double> nfairr_by_query;
  std::vector<double> ndcg_by_query;
};

struct FoldPick {
  int fold = 0;
  std::string variation_id;
  double heldout_nfairr = 0.0;
  double heldout_ndcg = 0.0;
};

struct TradeoffSelection {
  double beta = 1.0;
  int folds = 1;
  std::vector<FoldPick> picks;
  double mean_heldout_nfairr = 0.0;
  double mean_heldout_ndcg = 0.0;
};

// Per fold: aggregate both metrics on the training queries, min-max
// normalize the deltas across variations, pick the F_beta argmax (ties go to
// the lower variation index) and report the pick's held-out fold means.
// Queries are assigned round-robin in sorted-id order; `shuffle_seed`
// optionally shuffles the assignment deterministically. folds == 1 selects
// and reports on all queries.
TradeoffSelection select_variation(const std::vector<VariationScore>& candidates,
                                   double beta, int folds,
                                   std::optional<std::uint64_t> shuffle_seed = {});

// Moves every judged-relevant document (grade >= rel_threshold) to the top
// of its list, keeping the relative order inside both groups. The score
// column keeps the original positional values so rank monotonicity still
// holds.
RankedRun qrels_oracle_rerank(const RankedRun& run, const Qrels& qrels,
                              int rel_threshold = 1);

/// Candidate manifest: "variation-id<TAB>run-path" per line, '#' comments.
struct ManifestEntry {
  std::string variation_id;
  std::filesystem::path run_path;
};

std::vector<ManifestEntry> parse_manifest(const std::filesystem::path& path);

}  // namespace rankfair
