#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <vector>

#include "rankfair/adv_train.hpp"
#include "rankfair/report.hpp"

namespace rankfair {

struct ScoreNeutralityOptions {
  std::filesystem::path collection;
  std::filesystem::path attribute_config;
  std::filesystem::path output;
  unsigned threads = 1;
};

// Streams the collection once and writes the neutrality table; prints
// throughput statistics to `log`.
void cmd_score_neutrality(const ScoreNeutralityOptions& opt, std::ostream& log);

struct EvalOptions {
  std::filesystem::path run;
  std::filesystem::path background_run;
  std::filesystem::path neutrality_table;
  std::filesystem::path qrels;
  std::filesystem::path queries;
  std::filesystem::path output;
  std::optional<std::filesystem::path> attribute_config;  // fingerprint check
  std::optional<std::filesystem::path> baseline_report;
  int cutoff = kDefaultFairnessCutoff;
  int mrr_cutoff = kDefaultUtilityCutoff;
  int background_depth = kDefaultBackgroundDepth;
  int rel_threshold = kDefaultRelThreshold;
  bool qrels_oracle = false;  // move judged-relevant docs to the top first
  bool set_fairness = false;  // add ranker-agnostic per-query scores
  ReportFormat format = ReportFormat::Tsv;
};

EvalReport cmd_eval(const EvalOptions& opt, std::ostream& log);

struct TradeoffOptions {
  std::filesystem::path manifest;
  std::filesystem::path background_run;
  std::filesystem::path neutrality_table;
  std::filesystem::path qrels;
  std::filesystem::path queries;
  std::filesystem::path output;
  std::vector<double> betas{1.0};
  int folds = 5;
  int cutoff = kDefaultFairnessCutoff;
  int background_depth = kDefaultBackgroundDepth;
  int rel_threshold = kDefaultRelThreshold;
  std::optional<std::uint64_t> fold_seed;
};

void cmd_tradeoff(const TradeoffOptions& opt, std::ostream& log);

struct SandboxOptions {
  std::filesystem::path out_dir;
  TrainConfig train;
  int n_queries = 160;
  int docs_per_query = 30;
  double bias_rate = 0.21;
  double heldout_fraction = 0.25;
  int cutoff = kDefaultFairnessCutoff;
};

// Synthesizes a corpus, runs the staged adversarial training over the lambda
// grid, evaluates every checkpoint on the held-out queries and writes runs,
// checkpoints, a summary table and a candidate manifest consumable by
// cmd_tradeoff.
void cmd_sandbox(const SandboxOptions& opt, std::ostream& log);

}  // namespace rankfair
