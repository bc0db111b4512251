#include "rankfair/fairness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rankfair/errors.hpp"

namespace rankfair {

namespace {

double checked_normalize(double fairr_value, double ifairr_value, bool* zero_flag) {
  if (ifairr_value > 0.0) return fairr_value / ifairr_value;
  if (fairr_value == 0.0) {
    if (zero_flag) *zero_flag = true;
    return 1.0;
  }
  throw ValidationError("IFaiRR is zero but FaiRR is positive; the ranked list "
                        "cannot come from the given background pool");
}

}  // namespace

double position_bias(int rank) {
  if (rank < 1) {
    throw ValidationError("rank positions start at 1, got " + std::to_string(rank));
  }
  return 1.0 / std::log2(1.0 + static_cast<double>(rank));
}

double fairr(std::span<const double> omegas_in_rank_order, int cutoff) {
  if (cutoff < 1) {
    throw ValidationError("cutoff must be >= 1, got " + std::to_string(cutoff));
  }
  const std::size_t top =
      std::min(omegas_in_rank_order.size(), static_cast<std::size_t>(cutoff));
  double sum = 0.0;
  for (std::size_t i = 0; i < top; ++i) {
    sum += omegas_in_rank_order[i] * position_bias(static_cast<int>(i) + 1);
  }
  return sum;
}

double ifairr(std::span<const double> background_omegas, int cutoff) {
  if (background_omegas.empty()) {
    throw ValidationError("background document set is empty");
  }
  std::vector<double> sorted(background_omegas.begin(), background_omegas.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  return fairr(sorted, cutoff);
}

QueryFairness nfairr_query(const std::vector<ScoredDoc>& ranked,
                           const NeutralityTable& table,
                           const std::vector<std::string>& background, int cutoff) {
  std::vector<double> list_omegas;
  list_omegas.reserve(ranked.size());
  for (const auto& doc : ranked) list_omegas.push_back(table.at(doc.doc_id));

  std::vector<double> pool_omegas;
  pool_omegas.reserve(background.size());
  for (const auto& id : background) pool_omegas.push_back(table.at(id));

  QueryFairness out;
  out.fairr = fairr(list_omegas, cutoff);
  out.ifairr = ifairr(pool_omegas, cutoff);
  out.nfairr = checked_normalize(out.fairr, out.ifairr, &out.zero_ifairr);
  return out;
}

FairnessResult nfairr_run(const RankedRun& run, const NeutralityTable& table,
                          const BackgroundSet& background, int cutoff) {
  if (run.queries.empty()) {
    throw ValidationError("run '" + run.ranker_tag + "' has no queries");
  }
  FairnessResult result;
  result.cutoff = cutoff;
  double sum = 0.0;
  for (const auto& [qid, ranked] : run.queries) {
    auto bg = background.queries.find(qid);
    if (bg == background.queries.end()) {
      throw ValidationError("query '" + qid + "' has no background document set");
    }
    QueryFairness qf = nfairr_query(ranked, table, bg->second, cutoff);
    if (qf.zero_ifairr) ++result.zero_ifairr_queries;
    sum += qf.nfairr;
    result.per_query.emplace(qid, qf);
  }
  result.aggregate_nfairr = sum / static_cast<double>(result.per_query.size());
  return result;
}

double set_fairr(std::span<const double> omegas, int cutoff) {
  if (omegas.empty()) throw ValidationError("document set is empty");
  if (cutoff < 1) {
    throw ValidationError("cutoff must be >= 1, got " + std::to_string(cutoff));
  }
  const double mean = std::accumulate(omegas.begin(), omegas.end(), 0.0) /
                      static_cast<double>(omegas.size());
  const std::size_t top =
      std::min(omegas.size(), static_cast<std::size_t>(cutoff));
  double weight_sum = 0.0;
  for (std::size_t i = 1; i <= top; ++i) weight_sum += position_bias(static_cast<int>(i));
  return mean * weight_sum;
}

double set_fairr_bruteforce(std::span<const double> omegas, int cutoff) {
  if (omegas.empty()) throw ValidationError("document set is empty");
  if (omegas.size() > 8) {
    throw ValidationError("brute-force permutation oracle is capped at 8 documents, got " +
                          std::to_string(omegas.size()));
  }
  std::vector<std::size_t> order(omegas.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> arranged(omegas.size());
  double sum = 0.0;
  std::size_t permutations = 0;
  do {
    for (std::size_t i = 0; i < order.size(); ++i) arranged[i] = omegas[order[i]];
    sum += fairr(arranged, cutoff);
    ++permutations;
  } while (std::next_permutation(order.begin(), order.end()));
  return sum / static_cast<double>(permutations);
}

double nfairr_set(std::span<const double> set_omegas,
                  std::span<const double> background_omegas, int cutoff) {
  const double numerator = set_fairr(set_omegas, cutoff);
  const double denominator = ifairr(background_omegas, cutoff);
  return checked_normalize(numerator, denominator, nullptr);
}

}  // namespace rankfair
