#include "rankfair/adv_synth.hpp"

#include <algorithm>

#include "rankfair/errors.hpp"
#include "rankfair/neutrality.hpp"
#include "rankfair/rng.hpp"

namespace rankfair {

int protected_label(const std::string& query_text, const std::string& doc_text,
                    const AttributeConfig& cfg) {
  const double omega = neutrality_text(doc_text + " " + query_text, cfg);
  return omega < 1.0 ? 1 : 0;
}

Eigen::VectorXd SynthVocab::featurize(const std::string& text) const {
  Eigen::VectorXd features = Eigen::VectorXd::Zero(size());
  thread_local std::string lowered;
  thread_local std::vector<std::string_view> views;
  tokenize_into(text, lowered, views);
  for (auto token : views) {
    auto it = index.find(token);
    if (it != index.end()) features(it->second) += 1.0;
  }
  return features;
}

const std::string& SynthCorpus::doc_text(const std::string& doc_id) const {
  auto it = doc_index_.find(doc_id);
  if (it == doc_index_.end()) {
    throw ValidationError("unknown synthetic doc-id '" + doc_id + "'");
  }
  return docs[it->second].second;
}

namespace {

std::vector<std::string> coded_words(const std::string& prefix, int count) {
  std::vector<std::string> words;
  words.reserve(count);
  for (int i = 0; i < count; ++i) {
    std::string suffix;
    suffix += static_cast<char>('a' + i / 26);
    suffix += static_cast<char>('a' + i % 26);
    words.push_back(prefix + suffix);
  }
  return words;
}

SynthVocab make_vocab() {
  SynthVocab v;
  v.topics = coded_words("topic", 12);
  v.rel_markers = coded_words("detail", 4);
  v.fillers = coded_words("filler", 24);
  v.female_words = {"she", "her", "hers", "woman", "women",
                    "girl", "mother", "sister", "daughter", "queen"};
  v.male_words = {"he", "him", "his", "man", "men",
                  "boy", "father", "brother", "son", "king"};
  for (const auto* group : {&v.topics, &v.rel_markers, &v.fillers,
                            &v.female_words, &v.male_words}) {
    for (const auto& w : *group) {
      v.index.emplace(w, static_cast<int>(v.all.size()));
      v.all.push_back(w);
    }
  }
  return v;
}

std::string pad4(int n) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d", n);
  return buf;
}

}  // namespace

SynthCorpus synth_corpus(int n_queries, int n_docs_per_query, double bias_rate,
                         std::uint64_t seed) {
  if (n_queries < 1) throw ValidationError("need at least one query");
  if (n_docs_per_query < 2) throw ValidationError("need at least two documents per query");
  if (!(bias_rate >= 0.0 && bias_rate <= 1.0)) {
    throw ValidationError("bias_rate must lie in [0, 1]");
  }

  SynthVocab vocab_init = make_vocab();
  AttributeConfig attr_init = AttributeConfig::create_uniform(
      {AttributeMember{"female", vocab_init.female_words},
       AttributeMember{"male", vocab_init.male_words}},
      /*tau=*/1);
  SynthCorpus corpus(std::move(vocab_init), std::move(attr_init));

  DetRng rng(seed);
  const auto& vocab = corpus.vocab;
  const int relevant_per_query = std::max(1, n_docs_per_query / 5);

  for (int qi = 0; qi < n_queries; ++qi) {
    SynthQuery query;
    query.qid = "q" + pad4(qi);
    const int topic = static_cast<int>(rng.index(vocab.topics.size()));
    query.text = "about " + vocab.topics[topic];

    for (int di = 0; di < n_docs_per_query; ++di) {
      const bool relevant = di < relevant_per_query;
      std::string text;
      if (relevant) {
        text = vocab.topics[topic] + " " +
               vocab.rel_markers[rng.index(vocab.rel_markers.size())] + " " +
               vocab.topics[topic];
        if (rng.coin(bias_rate)) {
          const auto& gender = rng.coin() ? vocab.female_words : vocab.male_words;
          const int injections = 3 + static_cast<int>(rng.index(3));
          for (int g = 0; g < injections; ++g) {
            text += " " + gender[rng.index(gender.size())];
          }
        }
      } else {
        int other_topic = static_cast<int>(rng.index(vocab.topics.size()));
        if (other_topic == topic) other_topic = (other_topic + 1) % static_cast<int>(vocab.topics.size());
        text = vocab.topics[other_topic];
      }
      const int filler_count = 6 + static_cast<int>(rng.index(6));
      for (int f = 0; f < filler_count; ++f) {
        text += " " + vocab.fillers[rng.index(vocab.fillers.size())];
      }

      std::string doc_id = query.qid + "_d" + pad4(di);
      if (relevant) corpus.qrels.grades[query.qid][doc_id] = 1;
      query.pool.push_back(doc_id);
      corpus.doc_index_.emplace(doc_id, corpus.docs.size());
      corpus.docs.emplace_back(std::move(doc_id), std::move(text));
    }
    corpus.queries.push_back(std::move(query));
  }

  // Pairs: every relevant doc against sampled non-relevant docs of the same
  // query, featurized over the fixed vocabulary with labels from the real
  // neutrality computation.
  const int negatives_per_relevant = 3;
  for (const auto& query : corpus.queries) {
    const Eigen::VectorXd q_feat = vocab.featurize(query.text);
    std::vector<std::string> negatives(query.pool.begin() + relevant_per_query,
                                       query.pool.end());
    for (int r = 0; r < relevant_per_query; ++r) {
      const std::string& pos_id = query.pool[r];
      const std::string& pos_text = corpus.doc_text(pos_id);
      const Eigen::VectorXd pos_feat = vocab.featurize(pos_text);
      const int pos_label = protected_label(query.text, pos_text, corpus.attr);
      for (int k = 0; k < negatives_per_relevant && !negatives.empty(); ++k) {
        const std::string& neg_id = negatives[rng.index(negatives.size())];
        const std::string& neg_text = corpus.doc_text(neg_id);
        AdvDataPoint point;
        point.query = q_feat;
        point.pos = pos_feat;
        point.pos_label = pos_label;
        point.neg = vocab.featurize(neg_text);
        point.neg_label = protected_label(query.text, neg_text, corpus.attr);
        corpus.pairs.push_back(std::move(point));
        corpus.pair_meta.push_back(PairMeta{query.qid, pos_id, neg_id});
      }
    }
  }
  return corpus;
}

RankedRun rank_pools(const SynthCorpus& corpus, const AdvModel& model,
                     const std::vector<std::size_t>& query_indices,
                     const std::string& ranker_tag) {
  RankedRun run;
  run.ranker_tag = ranker_tag;
  for (std::size_t qi : query_indices) {
    const SynthQuery& query = corpus.queries.at(qi);
    const Eigen::VectorXd q_feat = corpus.vocab.featurize(query.text);
    std::vector<ScoredDoc> scored;
    scored.reserve(query.pool.size());
    for (const auto& doc_id : query.pool) {
      const double s =
          model.relevance(q_feat, corpus.vocab.featurize(corpus.doc_text(doc_id)));
      scored.push_back(ScoredDoc{doc_id, s});
    }
    std::sort(scored.begin(), scored.end(), [](const ScoredDoc& a, const ScoredDoc& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.doc_id < b.doc_id;
    });
    run.queries.emplace(query.qid, std::move(scored));
  }
  return run;
}

std::vector<AdvItem> balanced_probe_items(const SynthCorpus& corpus,
                                          const std::vector<std::size_t>& query_indices,
                                          std::uint64_t seed) {
  std::vector<AdvItem> ones;
  std::vector<AdvItem> zeros;
  std::vector<bool> selected(corpus.queries.size(), false);
  for (std::size_t qi : query_indices) selected.at(qi) = true;

  std::unordered_map<std::string, std::size_t, detail::StringHash, std::equal_to<>>
      qid_to_index;
  for (std::size_t i = 0; i < corpus.queries.size(); ++i) {
    qid_to_index.emplace(corpus.queries[i].qid, i);
  }
  for (std::size_t i = 0; i < corpus.pairs.size(); ++i) {
    const auto& meta = corpus.pair_meta[i];
    if (!selected[qid_to_index.at(meta.qid)]) continue;
    const auto& pair = corpus.pairs[i];
    (pair.pos_label == 1 ? ones : zeros)
        .push_back(AdvItem{pair.query, pair.pos, pair.pos_label});
    (pair.neg_label == 1 ? ones : zeros)
        .push_back(AdvItem{pair.query, pair.neg, pair.neg_label});
  }

  DetRng rng(seed);
  rng.shuffle(zeros);
  rng.shuffle(ones);
  const std::size_t keep = std::min(ones.size(), zeros.size());
  std::vector<AdvItem> items;
  items.reserve(2 * keep);
  for (std::size_t i = 0; i < keep; ++i) {
    items.push_back(std::move(ones[i]));
    items.push_back(std::move(zeros[i]));
  }
  return items;
}

}  // namespace rankfair
