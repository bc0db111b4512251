#include "rankfair/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>

#include "rankfair/errors.hpp"

namespace rankfair {

std::size_t utf8_invalid_at(std::string_view data) {
  const auto* p = reinterpret_cast<const unsigned char*>(data.data());
  const std::size_t n = data.size();
  std::size_t i = 0;
  while (i < n) {
    const unsigned char c = p[i];
    if (c < 0x80) {
      ++i;
      continue;
    }
    std::size_t len;
    unsigned cp_min;
    if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp_min = 0x80;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp_min = 0x800;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp_min = 0x10000;
    } else {
      return i;
    }
    if (i + len > n) return i;
    unsigned cp = c & (0xFF >> (len + 1));
    for (std::size_t k = 1; k < len; ++k) {
      if ((p[i + k] & 0xC0) != 0x80) return i;
      cp = (cp << 6) | (p[i + k] & 0x3F);
    }
    if (cp < cp_min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return i;
    i += len;
  }
  return std::string_view::npos;
}

namespace {

void check_utf8_line(std::string_view line, const std::string& path,
                     std::size_t line_no, std::uint64_t line_start_offset) {
  const std::size_t bad = utf8_invalid_at(line);
  if (bad != std::string_view::npos) {
    std::ostringstream os;
    os << path << ": invalid UTF-8 at byte offset " << (line_start_offset + bad);
    throw ParseError(os.str(), line_no);
  }
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

bool parse_double(std::string_view s, double& out) {
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

bool parse_int(std::string_view s, long long& out) {
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

struct LineSource {
  std::ifstream in;
  std::string path;
  std::string buffer;
  std::size_t line_no = 0;
  std::uint64_t offset = 0;

  explicit LineSource(const std::filesystem::path& p)
      : in(p, std::ios::binary), path(p.string()) {
    if (!in) throw ValidationError("cannot open file: " + path);
  }

  bool next(std::string_view& line) {
    if (!std::getline(in, buffer)) return false;
    ++line_no;
    const std::uint64_t start = offset;
    offset += buffer.size() + 1;
    if (!buffer.empty() && buffer.back() == '\r') buffer.pop_back();
    check_utf8_line(buffer, path, line_no, start);
    line = buffer;
    return true;
  }
};

}  // namespace

RankedRun parse_run(const std::filesystem::path& path,
                    std::vector<std::string>* warnings) {
  LineSource src(path);
  RankedRun run;

  struct Entry {
    std::string doc_id;
    long long rank;
    double score;
    std::size_t line_no;
  };
  std::map<std::string, std::vector<Entry>> by_query;

  std::string_view line;
  while (src.next(line)) {
    if (line.empty()) continue;
    auto fields = split_ws(line);
    if (fields.size() != 6) {
      throw ParseError(src.path + ": run line needs 6 fields 'qid Q0 docid rank score tag'",
                       src.line_no);
    }
    Entry e;
    e.doc_id = std::string(fields[2]);
    if (!parse_int(fields[3], e.rank)) {
      throw ParseError(src.path + ": malformed rank '" + std::string(fields[3]) + "'",
                       src.line_no);
    }
    if (!parse_double(fields[4], e.score)) {
      throw ParseError(src.path + ": malformed score '" + std::string(fields[4]) + "'",
                       src.line_no);
    }
    e.line_no = src.line_no;
    if (run.ranker_tag.empty()) run.ranker_tag = std::string(fields[5]);
    by_query[std::string(fields[0])].push_back(std::move(e));
  }

  for (auto& [qid, entries] : by_query) {
    std::set<std::string_view> seen;
    for (const auto& e : entries) {
      if (!seen.insert(e.doc_id).second) {
        throw ParseError(src.path + ": duplicate document '" + e.doc_id +
                             "' for query '" + qid + "'",
                         e.line_no);
      }
    }
    bool ranks_ordered = true;
    for (std::size_t i = 1; i < entries.size(); ++i) {
      if (entries[i].rank <= entries[i - 1].rank) ranks_ordered = false;
    }
    std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.rank < b.rank;
    });
    bool score_reordered = false;
    for (std::size_t i = 1; i < entries.size(); ++i) {
      if (entries[i].line_no < entries[i - 1].line_no) score_reordered = true;
    }
    if ((!ranks_ordered || score_reordered) && warnings) {
      warnings->push_back("query '" + qid + "': ranks out of order, reordered by score");
    }
    auto& docs = run.queries[qid];
    docs.reserve(entries.size());
    for (auto& e : entries) docs.push_back(ScoredDoc{std::move(e.doc_id), e.score});
  }
  return run;
}

Qrels parse_qrels(const std::filesystem::path& path,
                  std::vector<std::string>* warnings) {
  LineSource src(path);
  Qrels qrels;
  std::string_view line;
  while (src.next(line)) {
    if (line.empty()) continue;
    auto fields = split_ws(line);
    if (fields.size() != 4) {
      throw ParseError(src.path + ": qrels line needs 4 fields 'qid 0 docid grade'",
                       src.line_no);
    }
    long long grade;
    if (!parse_int(fields[3], grade)) {
      throw ParseError(src.path + ": malformed grade '" + std::string(fields[3]) + "'",
                       src.line_no);
    }
    if (grade < 0) {
      throw ParseError(src.path + ": negative relevance grade", src.line_no);
    }
    auto& by_doc = qrels.grades[std::string(fields[0])];
    auto [it, inserted] = by_doc.emplace(std::string(fields[2]), static_cast<int>(grade));
    if (!inserted) {
      if (warnings) {
        warnings->push_back("duplicate qrels entry for ('" + std::string(fields[0]) +
                            "', '" + std::string(fields[2]) + "'), keeping grade " +
                            std::to_string(grade));
      }
      it->second = static_cast<int>(grade);
    }
  }
  return qrels;
}

QuerySet parse_queries(const std::filesystem::path& path, const std::string& tag) {
  LineSource src(path);
  QuerySet queries;
  queries.tag = tag.empty() ? path.stem().string() : tag;
  std::string_view line;
  while (src.next(line)) {
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0) {
      throw ParseError(src.path + ": query line needs 'id<TAB>text'", src.line_no);
    }
    std::string qid(line.substr(0, tab));
    std::string text(line.substr(tab + 1));
    if (text.empty()) {
      throw ParseError(src.path + ": query '" + qid + "' has empty text", src.line_no);
    }
    auto [it, inserted] = queries.text_by_id.emplace(std::move(qid), std::move(text));
    if (!inserted) {
      throw ParseError(src.path + ": duplicate query id '" + it->first + "'",
                       src.line_no);
    }
  }
  return queries;
}

BackgroundSet derive_background(const RankedRun& run, int depth,
                                std::vector<std::string>* warnings) {
  if (depth < 1) {
    throw ValidationError("background depth must be >= 1, got " + std::to_string(depth));
  }
  BackgroundSet background;
  for (const auto& [qid, docs] : run.queries) {
    if (docs.empty()) {
      throw ValidationError("query '" + qid + "' has an empty ranked list");
    }
    const std::size_t take = std::min(docs.size(), static_cast<std::size_t>(depth));
    if (take < static_cast<std::size_t>(depth) && warnings) {
      warnings->push_back("query '" + qid + "': run has only " +
                          std::to_string(docs.size()) + " documents for background depth " +
                          std::to_string(depth));
    }
    auto& ids = background.queries[qid];
    ids.reserve(take);
    for (std::size_t i = 0; i < take; ++i) ids.push_back(docs[i].doc_id);
  }
  return background;
}

namespace {

std::string format_score(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path.string());
  return out;
}

}  // namespace

void write_run(const std::filesystem::path& path, const RankedRun& run) {
  auto out = open_out(path);
  const std::string tag = run.ranker_tag.empty() ? "run" : run.ranker_tag;
  for (const auto& [qid, docs] : run.queries) {
    for (std::size_t i = 0; i < docs.size(); ++i) {
      out << qid << " Q0 " << docs[i].doc_id << ' ' << (i + 1) << ' '
          << format_score(docs[i].score) << ' ' << tag << '\n';
    }
  }
  if (!out) throw std::runtime_error("failed writing run: " + path.string());
}

void write_qrels(const std::filesystem::path& path, const Qrels& qrels) {
  auto out = open_out(path);
  for (const auto& [qid, docs] : qrels.grades) {
    for (const auto& [doc_id, grade] : docs) {
      out << qid << " 0 " << doc_id << ' ' << grade << '\n';
    }
  }
  if (!out) throw std::runtime_error("failed writing qrels: " + path.string());
}

void write_queries(const std::filesystem::path& path, const QuerySet& queries) {
  auto out = open_out(path);
  for (const auto& [qid, text] : queries.text_by_id) {
    out << qid << '\t' << text << '\n';
  }
  if (!out) throw std::runtime_error("failed writing queries: " + path.string());
}

CollectionReader::CollectionReader(const std::filesystem::path& path)
    : in_(path, std::ios::binary), path_(path.string()) {
  if (!in_) throw ValidationError("cannot open collection: " + path_);
}

bool CollectionReader::next(std::string& doc_id, std::string& text) {
  while (std::getline(in_, buffer_)) {
    ++line_no_;
    const std::uint64_t start = byte_offset_;
    byte_offset_ += buffer_.size() + 1;
    if (!buffer_.empty() && buffer_.back() == '\r') buffer_.pop_back();
    if (buffer_.empty()) continue;
    check_utf8_line(buffer_, path_, line_no_, start);
    auto tab = buffer_.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw ParseError(path_ + ": collection line needs 'doc-id<TAB>text'", line_no_);
    }
    doc_id.assign(buffer_, 0, tab);
    text.assign(buffer_, tab + 1, buffer_.size() - tab - 1);
    return true;
  }
  return false;
}

}  // namespace rankfair
