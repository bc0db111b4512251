#include "rankfair/tradeoff.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "rankfair/errors.hpp"
#include "rankfair/rng.hpp"

namespace rankfair {

std::vector<double> delta_normalize(std::span<const double> values) {
  if (values.empty()) return {};
  const auto [min_it, max_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *min_it;
  const double hi = *max_it;
  std::vector<double> out(values.size(), 0.0);
  if (hi == lo) return out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = (values[i] - lo) / (hi - lo);
  }
  return out;
}

double f_beta(double dn, double df, double beta) {
  if (beta == 0.0) return dn;
  if (beta >= kFairnessOnlyBeta) return df;
  const double b2 = beta * beta;
  const double denom = b2 * dn + df;
  if (denom == 0.0) return 0.0;
  return (1.0 + b2) * dn * df / denom;
}

namespace {

double mean_at(const std::vector<double>& values, const std::vector<std::size_t>& idx) {
  double sum = 0.0;
  for (std::size_t i : idx) sum += values[i];
  return sum / static_cast<double>(idx.size());
}

}  // namespace

TradeoffSelection select_variation(const std::vector<VariationScore>& candidates,
                                   double beta, int folds,
                                   std::optional<std::uint64_t> shuffle_seed) {
  if (candidates.empty()) throw ValidationError("no candidate variations");
  if (folds < 1) throw ValidationError("folds must be >= 1, got " + std::to_string(folds));
  if (!(beta >= 0.0)) throw ValidationError("beta must be >= 0");

  const std::size_t n_queries = candidates.front().nfairr_by_query.size();
  for (const auto& c : candidates) {
    if (c.nfairr_by_query.size() != n_queries || c.ndcg_by_query.size() != n_queries) {
      throw ValidationError("variation '" + c.variation_id +
                            "' is not aligned to the shared query list");
    }
  }
  if (n_queries < static_cast<std::size_t>(folds)) {
    throw ValidationError("cannot split " + std::to_string(n_queries) +
                          " queries into " + std::to_string(folds) + " folds");
  }

  std::vector<std::size_t> order(n_queries);
  std::iota(order.begin(), order.end(), 0);
  if (shuffle_seed) {
    DetRng rng(*shuffle_seed);
    rng.shuffle(order);
  }

  TradeoffSelection selection;
  selection.beta = beta;
  selection.folds = folds;

  for (int fold = 0; fold < folds; ++fold) {
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> held_idx;
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      if (folds == 1 || static_cast<int>(pos % folds) != fold) {
        train_idx.push_back(order[pos]);
      }
      if (folds == 1 || static_cast<int>(pos % folds) == fold) {
        held_idx.push_back(order[pos]);
      }
    }

    std::vector<double> train_ndcg(candidates.size());
    std::vector<double> train_nfairr(candidates.size());
    for (std::size_t v = 0; v < candidates.size(); ++v) {
      train_ndcg[v] = mean_at(candidates[v].ndcg_by_query, train_idx);
      train_nfairr[v] = mean_at(candidates[v].nfairr_by_query, train_idx);
    }
    const std::vector<double> dn = delta_normalize(train_ndcg);
    const std::vector<double> df = delta_normalize(train_nfairr);

    std::size_t best = 0;
    double best_score = f_beta(dn[0], df[0], beta);
    for (std::size_t v = 1; v < candidates.size(); ++v) {
      const double score = f_beta(dn[v], df[v], beta);
      if (score > best_score) {
        best_score = score;
        best = v;
      }
    }

    FoldPick pick;
    pick.fold = fold;
    pick.variation_id = candidates[best].variation_id;
    pick.heldout_nfairr = mean_at(candidates[best].nfairr_by_query, held_idx);
    pick.heldout_ndcg = mean_at(candidates[best].ndcg_by_query, held_idx);
    selection.mean_heldout_nfairr += pick.heldout_nfairr;
    selection.mean_heldout_ndcg += pick.heldout_ndcg;
    selection.picks.push_back(std::move(pick));
  }
  selection.mean_heldout_nfairr /= static_cast<double>(folds);
  selection.mean_heldout_ndcg /= static_cast<double>(folds);
  return selection;
}

RankedRun qrels_oracle_rerank(const RankedRun& run, const Qrels& qrels,
                              int rel_threshold) {
  RankedRun out;
  out.ranker_tag = run.ranker_tag.empty() ? "oracle" : run.ranker_tag + "+qrels";
  for (const auto& [qid, docs] : run.queries) {
    std::vector<ScoredDoc> reordered;
    reordered.reserve(docs.size());
    for (const auto& doc : docs) {
      if (qrels.grade(qid, doc.doc_id) >= rel_threshold) reordered.push_back(doc);
    }
    for (const auto& doc : docs) {
      if (qrels.grade(qid, doc.doc_id) < rel_threshold) reordered.push_back(doc);
    }
    for (std::size_t i = 0; i < reordered.size(); ++i) {
      reordered[i].score = docs[i].score;  // keep the non-increasing score column
    }
    out.queries.emplace(qid, std::move(reordered));
  }
  return out;
}

std::vector<ManifestEntry> parse_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open manifest: " + path.string());
  std::vector<ManifestEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  const auto base = path.parent_path();
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size()) {
      throw ParseError(path.string() + ": manifest line needs 'variation-id<TAB>run-path'",
                       line_no);
    }
    std::filesystem::path run_path(line.substr(tab + 1));
    if (run_path.is_relative()) run_path = base / run_path;
    entries.push_back(ManifestEntry{line.substr(0, tab), std::move(run_path)});
  }
  if (entries.empty()) {
    throw ValidationError("manifest lists no runs: " + path.string());
  }
  return entries;
}

}  // namespace rankfair
