#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rankfair/fairness.hpp"
#include "rankfair/utility.hpp"

namespace rankfair {

struct QueryEval {
  std::string query_id;
  double fairr = 0.0;
  double ifairr = 0.0;
  double nfairr = 0.0;
  std::optional<double> set_nfairr;  // ranker-agnostic score, when requested
  double mrr = 0.0;
  double ndcg = 0.0;
  double recall = 0.0;
  std::vector<std::string> flags;  // e.g. "zero_ifairr", "no_qrels"

  bool operator==(const QueryEval&) const = default;
};

struct SignificanceEntry {
  std::string metric;
  double t_stat = 0.0;
  double p_value = 1.0;
  bool significant = false;  // p < 0.05, two-sided paired t-test

  bool operator==(const SignificanceEntry&) const = default;
};

struct ReportAggregates {
  double nfairr = 0.0;
  std::optional<double> set_nfairr;
  double mrr = 0.0;
  double ndcg = 0.0;
  double recall = 0.0;
  int queries = 0;
  int flagged = 0;

  bool operator==(const ReportAggregates&) const = default;
};

/// Full evaluation of one run: per-query rows plus aggregates, with the
/// provenance needed to audit the numbers (config fingerprint, tool version,
/// cutoffs, optional significance against a named baseline).
struct EvalReport {
  std::string ranker_tag;
  std::string tool_version;
  std::string config_fingerprint;
  std::string query_set_tag;
  int cutoff = kDefaultFairnessCutoff;
  int background_depth = kDefaultBackgroundDepth;
  int rel_threshold = kDefaultRelThreshold;
  std::vector<QueryEval> rows;  // sorted by query_id
  ReportAggregates aggregates;
  std::string baseline_tag;  // empty when no baseline comparison ran
  std::vector<SignificanceEntry> significance;

  bool operator==(const EvalReport&) const = default;
};

// Means and counts over the rows; rows must be non-empty.
ReportAggregates recompute_aggregates(const std::vector<QueryEval>& rows);

enum class ReportFormat { Tsv, Json };

// Deterministic byte output: identical reports serialize identically.
void write_report(std::ostream& out, const EvalReport& report, ReportFormat format);
void write_report(const std::filesystem::path& path, const EvalReport& report,
                  ReportFormat format);

// Reads either format back; parse(write(x)) == x.
EvalReport parse_report(std::istream& in);
EvalReport parse_report(const std::filesystem::path& path);

}  // namespace rankfair
