#include "cli_app.hpp"

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rankfair/cli.hpp"
#include "rankfair/errors.hpp"
#include "rankfair/version.hpp"

namespace rankfair::cli {

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

void add_score_neutrality(CLI::App& app, ScoreNeutralityOptions& opt) {
  auto* cmd = app.add_subcommand(
      "score-neutrality", "Score a collection's per-document neutrality once and "
                          "cache it as a table");
  cmd->add_option("--collection", opt.collection,
                  "UTF-8 TSV collection, one 'doc-id<TAB>text' per line")
      ->required();
  cmd->add_option("--attribute-config", opt.attribute_config,
                  "JSON attribute config (members, wordlists, target, tau)")
      ->required();
  cmd->add_option("--out", opt.output, "Output neutrality table path")->required();
  cmd->add_option("--threads", opt.threads, "Worker threads (output is identical "
                                            "for any value)")
      ->check(CLI::Range(1u, 256u));
}

void add_eval(CLI::App& app, EvalOptions& opt, std::string& format) {
  auto* cmd = app.add_subcommand(
      "eval", "Evaluate one run's fairness (NFaiRR) and utility (MRR/NDCG/Recall)");
  cmd->add_option("--run", opt.run, "TREC run file to evaluate")->required();
  cmd->add_option("--background-run", opt.background_run,
                  "First-stage run supplying the background document sets")
      ->required();
  cmd->add_option("--neutrality-table", opt.neutrality_table,
                  "Table produced by score-neutrality")
      ->required();
  cmd->add_option("--qrels", opt.qrels, "TREC qrels file")->required();
  cmd->add_option("--queries", opt.queries, "Query TSV ('id<TAB>text')")->required();
  cmd->add_option("--out", opt.output, "Output report path")->required();
  cmd->add_option("--attribute-config", opt.attribute_config,
                  "Optional config to verify the table fingerprint against");
  cmd->add_option("--baseline", opt.baseline_report,
                  "Baseline report for two-sided paired t-tests");
  cmd->add_option("--cutoff", opt.cutoff, "Fairness/utility cutoff t")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--mrr-cutoff", opt.mrr_cutoff, "MRR cutoff")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--background-depth", opt.background_depth,
                  "Background pool depth from the first-stage run")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--rel-threshold", opt.rel_threshold,
                  "Minimum grade counting as relevant")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--qrels-oracle", opt.qrels_oracle,
                "Move judged-relevant documents to the top before evaluating");
  cmd->add_flag("--set-fairness", opt.set_fairness,
                "Add ranker-agnostic set fairness over the full run depth");
  cmd->add_option("--format", format, "Report format: tsv or json")
      ->check(CLI::IsMember({"tsv", "json"}));
}

void add_tradeoff(CLI::App& app, TradeoffOptions& opt) {
  auto* cmd = app.add_subcommand(
      "tradeoff", "F_beta fairness-utility model selection over a run manifest");
  cmd->add_option("--manifest", opt.manifest,
                  "TSV manifest: 'variation-id<TAB>run-path' per line")
      ->required();
  cmd->add_option("--background-run", opt.background_run,
                  "First-stage run supplying the background document sets")
      ->required();
  cmd->add_option("--neutrality-table", opt.neutrality_table,
                  "Table produced by score-neutrality")
      ->required();
  cmd->add_option("--qrels", opt.qrels, "TREC qrels file")->required();
  cmd->add_option("--queries", opt.queries, "Query TSV ('id<TAB>text')")->required();
  cmd->add_option("--out", opt.output, "Output selection path")->required();
  cmd->add_option("--beta", opt.betas, "Beta values (0 = utility only, large = "
                                       "fairness only); repeatable");
  cmd->add_option("--folds", opt.folds, "Cross-validation folds over queries")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--cutoff", opt.cutoff, "Fairness/utility cutoff t")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--background-depth", opt.background_depth,
                  "Background pool depth from the first-stage run")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--rel-threshold", opt.rel_threshold,
                  "Minimum grade counting as relevant")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--fold-seed", opt.fold_seed,
                  "Shuffle queries before the round-robin fold split");
}

void add_sandbox(CLI::App& app, SandboxOptions& opt) {
  auto* cmd = app.add_subcommand(
      "sandbox", "Train the adversarial pairwise ranker on a synthetic corpus and "
                 "emit runs, checkpoints and a tradeoff manifest");
  cmd->add_option("--out-dir", opt.out_dir, "Output directory")->required();
  cmd->add_option("--queries", opt.n_queries, "Synthetic query count")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--docs-per-query", opt.docs_per_query, "Pool size per query")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--bias-rate", opt.bias_rate,
                  "Probability a relevant document carries attribute words")
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--heldout-fraction", opt.heldout_fraction,
                  "Fraction of queries held out for evaluation");
  cmd->add_option("--lambda-grid", opt.train.lambda_grid,
                  "GRL scales to train; repeatable");
  cmd->add_option("--checkpoints", opt.train.checkpoint_count,
                  "Checkpoints per lambda, evenly spaced by optimizer step")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--epochs", opt.train.epochs, "Epochs per training stage")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--learning-rate", opt.train.learning_rate, "SGD learning rate")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--margin", opt.train.margin, "Pairwise hinge margin");
  cmd->add_option("--batch-size", opt.train.batch_size, "Minibatch size")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", opt.train.seed, "Seed for every random choice");
  cmd->add_option("--cutoff", opt.cutoff, "Evaluation cutoff t")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("!--no-balanced-sampling", opt.train.balanced_sampling,
                "Disable balanced class resampling");
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Fairness evaluation toolkit for ranked retrieval results"};
  app.set_version_flag("--version", std::string(kToolName) + " " + std::string(kToolVersion));
  app.require_subcommand(1);

  ScoreNeutralityOptions score_opt;
  EvalOptions eval_opt;
  TradeoffOptions tradeoff_opt;
  SandboxOptions sandbox_opt;
  std::string eval_format = "tsv";

  add_score_neutrality(app, score_opt);
  add_eval(app, eval_opt, eval_format);
  add_tradeoff(app, tradeoff_opt);
  add_sandbox(app, sandbox_opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (app.got_subcommand("score-neutrality")) {
      cmd_score_neutrality(score_opt, std::cout);
    } else if (app.got_subcommand("eval")) {
      eval_opt.format = eval_format == "json" ? ReportFormat::Json : ReportFormat::Tsv;
      cmd_eval(eval_opt, std::cout);
    } else if (app.got_subcommand("tradeoff")) {
      cmd_tradeoff(tradeoff_opt, std::cout);
    } else if (app.got_subcommand("sandbox")) {
      cmd_sandbox(sandbox_opt, std::cout);
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}

}  // namespace rankfair::cli
