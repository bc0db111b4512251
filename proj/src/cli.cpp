#include "rankfair/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "rankfair/adv_synth.hpp"
#include "rankfair/errors.hpp"
#include "rankfair/ingest.hpp"
#include "rankfair/tradeoff.hpp"
#include "rankfair/version.hpp"

namespace rankfair {

namespace {

std::string fmt(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void log_warnings(std::ostream& log, const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) log << "warning: " << w << '\n';
}

// Per-query metric vectors aligned to the sorted query ids of `run`.
struct RunMetrics {
  FairnessResult fairness;
  UtilityResult utility;
};

RunMetrics compute_metrics(const RankedRun& run, const NeutralityTable& table,
                           const BackgroundSet& background, const Qrels& qrels,
                           int cutoff, int mrr_cutoff, int rel_threshold) {
  RunMetrics m;
  m.fairness = nfairr_run(run, table, background, cutoff);
  m.utility = evaluate_run(run, qrels, cutoff, mrr_cutoff, rel_threshold);
  return m;
}

void require_known_queries(const RankedRun& run, const QuerySet& queries) {
  std::vector<std::string> unknown;
  for (const auto& [qid, docs] : run.queries) {
    if (!queries.text_by_id.contains(qid)) unknown.push_back(qid);
  }
  if (!unknown.empty()) {
    std::string joined;
    for (const auto& q : unknown) {
      if (!joined.empty()) joined += ", ";
      joined += q;
    }
    throw ValidationError("run contains query-ids missing from the query set: " + joined);
  }
}

}  // namespace

void cmd_score_neutrality(const ScoreNeutralityOptions& opt, std::ostream& log) {
  const AttributeConfig cfg = load_attribute_config(opt.attribute_config);
  CollectionReader reader(opt.collection);

  std::ofstream out(opt.output, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write neutrality table: " + opt.output.string());
  out << neutrality_table_header(cfg.fingerprint());

  std::string buffer;
  buffer.reserve(1 << 20);
  const CorpusStats stats = score_corpus_stream(
      [&](std::string& id, std::string& text) { return reader.next(id, text); }, cfg,
      [&](std::string_view id, double omega) {
        format_table_row(buffer, id, omega);
        if (buffer.size() >= (1 << 20)) {
          out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
          buffer.clear();
        }
      },
      opt.threads);
  out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
  out.flush();
  if (!out) throw std::runtime_error("failed writing neutrality table: " + opt.output.string());

  log << "scored " << stats.documents << " documents in " << std::fixed
      << std::setprecision(2) << stats.seconds << " s ("
      << static_cast<std::uint64_t>(stats.docs_per_second()) << " docs/s)\n";
}

EvalReport cmd_eval(const EvalOptions& opt, std::ostream& log) {
  const NeutralityTable table = read_neutrality_table(opt.neutrality_table);
  if (opt.attribute_config) {
    const AttributeConfig cfg = load_attribute_config(*opt.attribute_config);
    if (cfg.fingerprint() != table.fingerprint()) {
      throw ValidationError("neutrality table fingerprint " + table.fingerprint() +
                            " does not match attribute config " + cfg.fingerprint() +
                            "; re-score the collection");
    }
  }

  std::vector<std::string> warnings;
  RankedRun run = parse_run(opt.run, &warnings);
  const RankedRun background_run = parse_run(opt.background_run, &warnings);
  const BackgroundSet background =
      derive_background(background_run, opt.background_depth, &warnings);
  const Qrels qrels = parse_qrels(opt.qrels, &warnings);
  const QuerySet queries = parse_queries(opt.queries);
  log_warnings(log, warnings);

  require_known_queries(run, queries);
  if (opt.qrels_oracle) run = qrels_oracle_rerank(run, qrels, opt.rel_threshold);

  const RunMetrics m = compute_metrics(run, table, background, qrels, opt.cutoff,
                                       opt.mrr_cutoff, opt.rel_threshold);

  EvalReport report;
  report.ranker_tag = run.ranker_tag;
  report.tool_version = std::string(kToolVersion);
  report.config_fingerprint = table.fingerprint();
  report.query_set_tag = queries.tag;
  report.cutoff = opt.cutoff;
  report.background_depth = opt.background_depth;
  report.rel_threshold = opt.rel_threshold;

  for (const auto& [qid, docs] : run.queries) {
    QueryEval row;
    row.query_id = qid;
    const QueryFairness& qf = m.fairness.per_query.at(qid);
    row.fairr = qf.fairr;
    row.ifairr = qf.ifairr;
    row.nfairr = qf.nfairr;
    if (qf.zero_ifairr) row.flags.push_back("zero_ifairr");
    const QueryUtility& qu = m.utility.per_query.at(qid);
    row.mrr = qu.mrr;
    row.ndcg = qu.ndcg;
    row.recall = qu.recall;
    if (!qu.judged) row.flags.push_back("no_qrels");
    if (opt.set_fairness) {
      std::vector<double> list_scores;
      list_scores.reserve(docs.size());
      for (const auto& doc : docs) list_scores.push_back(table.at(doc.doc_id));
      std::vector<double> pool_scores;
      for (const auto& id : background.queries.at(qid)) {
        pool_scores.push_back(table.at(id));
      }
      row.set_nfairr = nfairr_set(list_scores, pool_scores, opt.cutoff);
    }
    report.rows.push_back(std::move(row));
  }
  report.aggregates = recompute_aggregates(report.rows);

  if (opt.baseline_report) {
    const EvalReport baseline = parse_report(*opt.baseline_report);
    report.baseline_tag = baseline.ranker_tag;
    std::map<std::string, const QueryEval*> base_rows;
    for (const auto& row : baseline.rows) base_rows.emplace(row.query_id, &row);

    std::vector<double> a_nfairr, b_nfairr, a_mrr, b_mrr, a_ndcg, b_ndcg, a_rec, b_rec;
    for (const auto& row : report.rows) {
      auto it = base_rows.find(row.query_id);
      if (it == base_rows.end()) continue;
      a_nfairr.push_back(row.nfairr);
      b_nfairr.push_back(it->second->nfairr);
      a_mrr.push_back(row.mrr);
      b_mrr.push_back(it->second->mrr);
      a_ndcg.push_back(row.ndcg);
      b_ndcg.push_back(it->second->ndcg);
      a_rec.push_back(row.recall);
      b_rec.push_back(it->second->recall);
    }
    if (a_nfairr.size() < 2) {
      throw ValidationError("baseline report shares fewer than 2 queries with this run");
    }
    auto add = [&](const char* metric, std::span<const double> a, std::span<const double> b) {
      const TtestResult t = paired_ttest(a, b);
      report.significance.push_back(
          SignificanceEntry{metric, t.t_stat, t.p_value, t.p_value < 0.05});
    };
    add("nfairr", a_nfairr, b_nfairr);
    add("mrr", a_mrr, b_mrr);
    add("ndcg", a_ndcg, b_ndcg);
    add("recall", a_rec, b_rec);
  }

  write_report(opt.output, report, opt.format);
  log << "evaluated " << report.aggregates.queries << " queries: NFaiRR@"
      << report.cutoff << "=" << fmt(report.aggregates.nfairr) << " NDCG@"
      << report.cutoff << "=" << fmt(report.aggregates.ndcg) << " MRR="
      << fmt(report.aggregates.mrr) << " Recall=" << fmt(report.aggregates.recall)
      << '\n';
  return report;
}

void cmd_tradeoff(const TradeoffOptions& opt, std::ostream& log) {
  if (opt.betas.empty()) throw ValidationError("at least one beta value is required");
  const NeutralityTable table = read_neutrality_table(opt.neutrality_table);
  std::vector<std::string> warnings;
  const RankedRun background_run = parse_run(opt.background_run, &warnings);
  const BackgroundSet background =
      derive_background(background_run, opt.background_depth, &warnings);
  const Qrels qrels = parse_qrels(opt.qrels, &warnings);
  const QuerySet queries = parse_queries(opt.queries);
  const auto entries = parse_manifest(opt.manifest);
  log_warnings(log, warnings);

  std::vector<std::string> query_ids;
  query_ids.reserve(queries.text_by_id.size());
  for (const auto& [qid, text] : queries.text_by_id) query_ids.push_back(qid);

  std::vector<VariationScore> candidates;
  candidates.reserve(entries.size());
  for (const auto& entry : entries) {
    const RankedRun run = parse_run(entry.run_path, &warnings);
    require_known_queries(run, queries);
    for (const auto& qid : query_ids) {
      if (!run.queries.contains(qid)) {
        throw ValidationError("variation '" + entry.variation_id +
                              "' is missing query '" + qid + "'");
      }
    }
    const RunMetrics m = compute_metrics(run, table, background, qrels, opt.cutoff,
                                         opt.cutoff, opt.rel_threshold);
    VariationScore score;
    score.variation_id = entry.variation_id;
    score.aggregate_nfairr = m.fairness.aggregate_nfairr;
    score.aggregate_ndcg = m.utility.mean_ndcg;
    for (const auto& qid : query_ids) {
      score.nfairr_by_query.push_back(m.fairness.per_query.at(qid).nfairr);
      score.ndcg_by_query.push_back(m.utility.per_query.at(qid).ndcg);
    }
    candidates.push_back(std::move(score));
  }

  std::ofstream out(opt.output, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write selection: " + opt.output.string());
  out << "# rankfair-tradeoff v1\n";
  out << "# folds=" << opt.folds << " cutoff=" << opt.cutoff << " variations="
      << candidates.size() << " queries=" << query_ids.size() << '\n';
  out << "beta\tpicks\tmean_heldout_nfairr\tmean_heldout_ndcg\n";
  for (double beta : opt.betas) {
    const TradeoffSelection sel =
        select_variation(candidates, beta, opt.folds, opt.fold_seed);
    std::string picks;
    for (const auto& pick : sel.picks) {
      if (!picks.empty()) picks += ';';
      picks += pick.variation_id;
    }
    out << fmt(beta) << '\t' << picks << '\t' << fmt(sel.mean_heldout_nfairr) << '\t'
        << fmt(sel.mean_heldout_ndcg) << '\n';
    log << "beta=" << fmt(beta) << " -> " << picks << " (heldout NFaiRR="
        << fmt(sel.mean_heldout_nfairr) << ", NDCG=" << fmt(sel.mean_heldout_ndcg)
        << ")\n";
  }
  if (!out) throw std::runtime_error("failed writing selection: " + opt.output.string());
}

void cmd_sandbox(const SandboxOptions& opt, std::ostream& log) {
  if (!(opt.heldout_fraction > 0.0 && opt.heldout_fraction < 1.0)) {
    throw ValidationError("heldout fraction must lie in (0, 1)");
  }
  std::filesystem::create_directories(opt.out_dir / "runs");
  std::filesystem::create_directories(opt.out_dir / "checkpoints");

  const SynthCorpus corpus = synth_corpus(opt.n_queries, opt.docs_per_query,
                                          opt.bias_rate, opt.train.seed);
  const std::string fingerprint = corpus.attr.fingerprint();

  const std::size_t heldout_count = std::max<std::size_t>(
      1, static_cast<std::size_t>(opt.n_queries * opt.heldout_fraction));
  const std::size_t train_count = corpus.queries.size() - heldout_count;
  if (train_count == 0) throw ValidationError("no training queries left after the split");
  std::vector<std::size_t> heldout_idx;
  for (std::size_t i = train_count; i < corpus.queries.size(); ++i) heldout_idx.push_back(i);

  std::vector<AdvDataPoint> train_pairs;
  {
    std::vector<bool> is_train(corpus.queries.size(), true);
    for (std::size_t i : heldout_idx) is_train[i] = false;
    std::map<std::string, std::size_t> qid_to_idx;
    for (std::size_t i = 0; i < corpus.queries.size(); ++i) {
      qid_to_idx.emplace(corpus.queries[i].qid, i);
    }
    for (std::size_t i = 0; i < corpus.pairs.size(); ++i) {
      if (is_train[qid_to_idx.at(corpus.pair_meta[i].qid)]) {
        train_pairs.push_back(corpus.pairs[i]);
      }
    }
  }

  // Shared evaluation fixtures.
  const NeutralityTable table = score_corpus(corpus.docs, corpus.attr);
  write_neutrality_table(opt.out_dir / "neutrality.tsv", table);
  BackgroundSet background;
  RankedRun background_run;
  background_run.ranker_tag = "pool";
  QuerySet heldout_queries;
  heldout_queries.tag = "synth_heldout";
  Qrels heldout_qrels;
  for (std::size_t qi : heldout_idx) {
    const SynthQuery& q = corpus.queries[qi];
    background.queries[q.qid] = q.pool;
    heldout_queries.text_by_id[q.qid] = q.text;
    auto judged = corpus.qrels.grades.find(q.qid);
    if (judged != corpus.qrels.grades.end()) heldout_qrels.grades[q.qid] = judged->second;
    auto& docs = background_run.queries[q.qid];
    for (std::size_t d = 0; d < q.pool.size(); ++d) {
      docs.push_back(ScoredDoc{q.pool[d], static_cast<double>(q.pool.size() - d)});
    }
  }
  write_run(opt.out_dir / "background.run", background_run);
  write_queries(opt.out_dir / "queries.tsv", heldout_queries);
  write_qrels(opt.out_dir / "qrels.txt", heldout_qrels);
  {
    std::ofstream coll(opt.out_dir / "collection.tsv", std::ios::binary);
    for (const auto& [id, text] : corpus.docs) coll << id << '\t' << text << '\n';
  }

  const std::vector<AdvItem> probe_items =
      balanced_probe_items(corpus, heldout_idx, opt.train.seed + 101);

  log << "corpus: " << corpus.queries.size() << " queries ("
      << heldout_idx.size() << " held out), " << corpus.docs.size() << " documents, "
      << train_pairs.size() << " training pairs\n";

  const AdvModel base = train_utility(train_pairs, opt.train);
  {
    const RankedRun run = rank_pools(corpus, base, heldout_idx, "stage1");
    const FairnessResult f = nfairr_run(run, table, background, opt.cutoff);
    const UtilityResult u =
        evaluate_run(run, heldout_qrels, opt.cutoff, opt.cutoff, 1);
    const double acc = probe_adversary(base, probe_items, opt.train.seed + 202);
    log << "stage1 (utility only): NFaiRR=" << fmt(f.aggregate_nfairr)
        << " NDCG=" << fmt(u.mean_ndcg) << " probe_accuracy=" << fmt(acc) << '\n';
  }

  std::ofstream manifest(opt.out_dir / "manifest.tsv", std::ios::binary);
  std::ofstream summary(opt.out_dir / "summary.tsv", std::ios::binary);
  if (!manifest || !summary) {
    throw std::runtime_error("cannot write sandbox outputs in " + opt.out_dir.string());
  }
  summary << "variation\tlambda\tcheckpoint\tnfairr\tndcg\tmrr\trecall\tprobe_accuracy\n";

  for (double lambda : opt.train.lambda_grid) {
    const std::vector<AdvModel> checkpoints =
        train(train_pairs, opt.train, lambda, &base);
    for (std::size_t k = 0; k < checkpoints.size(); ++k) {
      char id[64];
      std::snprintf(id, sizeof(id), "lam%.2f_ck%02zu", lambda, k + 1);
      const std::string variation_id(id);

      const RankedRun run = rank_pools(corpus, checkpoints[k], heldout_idx, variation_id);
      const auto run_path = opt.out_dir / "runs" / (variation_id + ".run");
      write_run(run_path, run);
      save_model(opt.out_dir / "checkpoints" / (variation_id + ".json"), checkpoints[k],
                 fingerprint);

      const FairnessResult f = nfairr_run(run, table, background, opt.cutoff);
      const UtilityResult u =
          evaluate_run(run, heldout_qrels, opt.cutoff, opt.cutoff, 1);
      const double acc =
          probe_adversary(checkpoints[k], probe_items, opt.train.seed + 202);

      manifest << variation_id << '\t' << ("runs/" + variation_id + ".run") << '\n';
      summary << variation_id << '\t' << fmt(lambda) << '\t' << (k + 1) << '\t'
              << fmt(f.aggregate_nfairr) << '\t' << fmt(u.mean_ndcg) << '\t'
              << fmt(u.mean_mrr) << '\t' << fmt(u.mean_recall) << '\t' << fmt(acc)
              << '\n';
    }
    log << "lambda=" << fmt(lambda) << ": " << checkpoints.size()
        << " checkpoints written\n";
  }
  if (!manifest || !summary) {
    throw std::runtime_error("failed writing sandbox outputs in " + opt.out_dir.string());
  }
}

}  // namespace rankfair
