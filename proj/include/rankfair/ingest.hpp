#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "rankfair/run.hpp"

namespace rankfair {

// Validates that `data` is well-formed UTF-8; returns the byte offset of the
// first invalid byte, or npos when valid.
std::size_t utf8_invalid_at(std::string_view data);

// TREC run file: "qid Q0 docid rank score tag", whitespace-separated. Lines
// are reordered per query by descending score with the stated rank as
// tiebreaker; out-of-order ranks produce a warning, duplicate (qid, docid)
// pairs and malformed lines are errors.
RankedRun parse_run(const std::filesystem::path& path,
                    std::vector<std::string>* warnings = nullptr);

// TREC qrels: "qid 0 docid grade". Duplicate pairs keep the last grade with a
// warning; negative grades are errors.
Qrels parse_qrels(const std::filesystem::path& path,
                  std::vector<std::string>* warnings = nullptr);

// Query file: "id<TAB>text" per line. The tag defaults to the file stem.
QuerySet parse_queries(const std::filesystem::path& path,
                       const std::string& tag = "");

// Per query, the set of the run's top-`depth` doc-ids. Runs shallower than
// `depth` contribute what they have, with a warning.
BackgroundSet derive_background(const RankedRun& run, int depth,
                                std::vector<std::string>* warnings = nullptr);

// Deterministic writers for the same formats (ranks re-numbered from 1).
void write_run(const std::filesystem::path& path, const RankedRun& run);
void write_qrels(const std::filesystem::path& path, const Qrels& qrels);
void write_queries(const std::filesystem::path& path, const QuerySet& queries);

/// Streaming reader for "doc-id<TAB>text" collection files. Holds one line at
/// a time; validates UTF-8 and reports errors with line numbers and byte
/// offsets.
class CollectionReader {
 public:
  explicit CollectionReader(const std::filesystem::path& path);

  // Returns false at end of input. Throws ParseError on malformed lines.
  bool next(std::string& doc_id, std::string& text);

  std::size_t line() const { return line_no_; }

 private:
  std::ifstream in_;
  std::string path_;
  std::string buffer_;
  std::size_t line_no_ = 0;
  std::uint64_t byte_offset_ = 0;
};

}  // namespace rankfair
