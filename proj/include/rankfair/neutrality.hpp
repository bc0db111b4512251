#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rankfair/lexicon.hpp"

namespace rankfair {

/// Per-member occurrence counts of representative words in one document.
struct MagnitudeVector {
  std::vector<long long> counts;

  long long total() const {
    long long t = 0;
    for (long long c : counts) t += c;
    return t;
  }

  bool operator==(const MagnitudeVector&) const = default;
};

MagnitudeVector magnitude(const TokenStream& doc, const AttributeConfig& cfg);

// Document neutrality from precomputed member counts:
//   1                                        if total count <= tau
//   1 - sum_a |count_a / total - target_a|   otherwise, clamped to [0, 1].
// The clamp only matters for skewed targets or more than two members; the
// binary uniform case stays in [0, 1] on its own.
double neutrality_from_counts(const MagnitudeVector& mag, const AttributeConfig& cfg);

double neutrality(const TokenStream& doc, const AttributeConfig& cfg);
double neutrality_text(std::string_view text, const AttributeConfig& cfg);

/// Cached doc-id -> neutrality scores for one corpus and one attribute config.
class NeutralityTable {
 public:
  NeutralityTable() = default;
  explicit NeutralityTable(std::string fingerprint)
      : fingerprint_(std::move(fingerprint)) {}

  // Throws ValidationError on duplicate doc-id or score outside [0,1].
  void add(std::string doc_id, double score);

  // Throws ValidationError naming the id when absent.
  double at(std::string_view doc_id) const;

  bool contains(std::string_view doc_id) const {
    return scores_.find(doc_id) != scores_.end();
  }
  std::size_t size() const { return scores_.size(); }
  const std::string& fingerprint() const { return fingerprint_; }

  const std::unordered_map<std::string, double, detail::StringHash, std::equal_to<>>&
  scores() const {
    return scores_;
  }

  bool operator==(const NeutralityTable& other) const {
    return fingerprint_ == other.fingerprint_ && scores_ == other.scores_;
  }

 private:
  std::unordered_map<std::string, double, detail::StringHash, std::equal_to<>> scores_;
  std::string fingerprint_;
};

struct CorpusStats {
  std::uint64_t documents = 0;
  double seconds = 0.0;
  double docs_per_second() const {
    return seconds > 0.0 ? static_cast<double>(documents) / seconds : 0.0;
  }
};

// Streaming corpus scorer. Pulls (doc-id, text) records until `next` returns
// false, emits (doc-id, omega) rows in input order. Worker threads score
// fixed-size blocks; the merge is sequential by block index, so the output is
// identical for any thread count. Memory stays bounded by the in-flight
// blocks plus the duplicate-id set. Duplicate doc-ids raise ValidationError.
CorpusStats score_corpus_stream(
    const std::function<bool(std::string& doc_id, std::string& text)>& next,
    const AttributeConfig& cfg,
    const std::function<void(std::string_view doc_id, double omega)>& emit,
    unsigned threads = 1);

// In-memory convenience over score_corpus_stream.
NeutralityTable score_corpus(
    const std::vector<std::pair<std::string, std::string>>& docs,
    const AttributeConfig& cfg, unsigned threads = 1);

// Table file: "# rankfair-neutrality v1 fingerprint=<hex>" header followed by
// "doc-id<TAB>score" rows. write_neutrality_table sorts rows by doc-id, so
// equal tables serialize to identical bytes.
void write_neutrality_table(std::ostream& out, const NeutralityTable& table);
void write_neutrality_table(const std::filesystem::path& path,
                            const NeutralityTable& table);
NeutralityTable read_neutrality_table(std::istream& in);
NeutralityTable read_neutrality_table(const std::filesystem::path& path);

// Serializes one row exactly as write_neutrality_table does.
void format_table_row(std::string& out, std::string_view doc_id, double omega);
std::string neutrality_table_header(std::string_view fingerprint);

}  // namespace rankfair
