#pragma once

#include <map>
#include <string>
#include <vector>

namespace rankfair {

struct ScoredDoc {
  std::string doc_id;
  double score = 0.0;

  bool operator==(const ScoredDoc&) const = default;
};

/// One ranker's output: per-query ranked document lists. Within a query,
/// doc-ids are unique and scores non-increasing in rank order.
struct RankedRun {
  std::string ranker_tag;
  std::map<std::string, std::vector<ScoredDoc>> queries;

  bool operator==(const RankedRun&) const = default;
};

/// Per-query candidate pools used for fairness normalization. Doc-ids are
/// stored in first-stage rank order; semantics are set-like.
struct BackgroundSet {
  std::map<std::string, std::vector<std::string>> queries;

  bool operator==(const BackgroundSet&) const = default;
};

/// Relevance judgments: (query-id, doc-id) -> grade >= 0.
struct Qrels {
  std::map<std::string, std::map<std::string, int>> grades;

  int grade(const std::string& query_id, const std::string& doc_id) const {
    auto q = grades.find(query_id);
    if (q == grades.end()) return 0;
    auto d = q->second.find(doc_id);
    return d == q->second.end() ? 0 : d->second;
  }

  bool has_query(const std::string& query_id) const {
    return grades.find(query_id) != grades.end();
  }

  bool operator==(const Qrels&) const = default;
};

/// Query texts keyed by id, with a provenance tag (e.g. the name of a
/// fairness-sensitive subset).
struct QuerySet {
  std::string tag;
  std::map<std::string, std::string> text_by_id;

  bool operator==(const QuerySet&) const = default;
};

}  // namespace rankfair
