#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "rankfair/adv_model.hpp"
#include "rankfair/lexicon.hpp"
#include "rankfair/run.hpp"

namespace rankfair {

// 1 when the concatenation of document and query text carries the protected
// attribute (omega < 1), else 0.
int protected_label(const std::string& query_text, const std::string& doc_text,
                    const AttributeConfig& cfg);

/// Fixed-order vocabulary backing the bag-of-words features.
struct SynthVocab {
  std::vector<std::string> topics;
  std::vector<std::string> rel_markers;
  std::vector<std::string> fillers;
  std::vector<std::string> female_words;
  std::vector<std::string> male_words;
  std::vector<std::string> all;  // feature order
  std::unordered_map<std::string, int, detail::StringHash, std::equal_to<>> index;

  int size() const { return static_cast<int>(all.size()); }
  Eigen::VectorXd featurize(const std::string& text) const;
};

struct SynthQuery {
  std::string qid;
  std::string text;
  std::vector<std::string> pool;  // candidate doc-ids for ranking
};

struct PairMeta {
  std::string qid;
  std::string pos_id;
  std::string neg_id;
};

/// Desk-scale corpus where relevance-bearing documents carry injected
/// attribute words at the requested rate, together with ground-truth qrels
/// and featurized training pairs.
struct SynthCorpus {
  SynthCorpus(SynthVocab v, AttributeConfig a) : vocab(std::move(v)), attr(std::move(a)) {}

  SynthVocab vocab;
  AttributeConfig attr;  // binary uniform config over the injected words
  std::vector<std::pair<std::string, std::string>> docs;  // (id, text)
  Qrels qrels;
  std::vector<SynthQuery> queries;
  std::vector<AdvDataPoint> pairs;
  std::vector<PairMeta> pair_meta;  // aligned with pairs

  const std::string& doc_text(const std::string& doc_id) const;

 private:
  friend SynthCorpus synth_corpus(int, int, double, std::uint64_t);
  std::unordered_map<std::string, std::size_t, detail::StringHash, std::equal_to<>>
      doc_index_;
};

// Deterministic given the seed. bias_rate is the probability that a relevant
// document gets attribute words injected; negatives stay attribute-free, so
// the fraction of pairs with pos_label == 1 approaches bias_rate.
SynthCorpus synth_corpus(int n_queries, int n_docs_per_query, double bias_rate,
                         std::uint64_t seed);

// Scores every pool document with the model and returns the ranked run for
// the selected queries (ties broken by doc-id so runs are deterministic).
RankedRun rank_pools(const SynthCorpus& corpus, const AdvModel& model,
                     const std::vector<std::size_t>& query_indices,
                     const std::string& ranker_tag);

// Balanced labeled (query, doc) items drawn from the pairs of the selected
// queries: all attribute-carrying positives plus an equal count of clean
// documents.
std::vector<AdvItem> balanced_probe_items(const SynthCorpus& corpus,
                                          const std::vector<std::size_t>& query_indices,
                                          std::uint64_t seed);

}  // namespace rankfair
