#include "rankfair/neutrality.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <deque>
#include <fstream>
#include <future>
#include <sstream>
#include <unordered_set>

#include "rankfair/errors.hpp"

namespace rankfair {

namespace {

constexpr std::string_view kTableMagic = "# rankfair-neutrality v1 fingerprint=";

void append_double(std::string& out, double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

}  // namespace

MagnitudeVector magnitude(const TokenStream& doc, const AttributeConfig& cfg) {
  MagnitudeVector mag;
  mag.counts.assign(cfg.member_count(), 0);
  for (const auto& token : doc.tokens) {
    int m = cfg.member_of(token);
    if (m >= 0) ++mag.counts[static_cast<std::size_t>(m)];
  }
  return mag;
}

double neutrality_from_counts(const MagnitudeVector& mag, const AttributeConfig& cfg) {
  if (mag.counts.size() != cfg.member_count()) {
    throw ValidationError("magnitude vector length does not match attribute config");
  }
  const long long total = mag.total();
  if (total <= cfg.tau()) return 1.0;
  double deviation = 0.0;
  for (std::size_t a = 0; a < mag.counts.size(); ++a) {
    const double share =
        static_cast<double>(mag.counts[a]) / static_cast<double>(total);
    deviation += std::fabs(share - cfg.target()[a]);
  }
  const double omega = 1.0 - deviation;
  return omega < 0.0 ? 0.0 : omega;
}

double neutrality(const TokenStream& doc, const AttributeConfig& cfg) {
  return neutrality_from_counts(magnitude(doc, cfg), cfg);
}

double neutrality_text(std::string_view text, const AttributeConfig& cfg) {
  thread_local std::string lowered;
  thread_local std::vector<std::string_view> views;
  tokenize_into(text, lowered, views);
  MagnitudeVector mag;
  mag.counts.assign(cfg.member_count(), 0);
  for (auto v : views) {
    int m = cfg.member_of(v);
    if (m >= 0) ++mag.counts[static_cast<std::size_t>(m)];
  }
  return neutrality_from_counts(mag, cfg);
}

void NeutralityTable::add(std::string doc_id, double score) {
  if (!(score >= 0.0 && score <= 1.0)) {
    std::ostringstream os;
    os << "neutrality score for '" << doc_id << "' out of range: " << score;
    throw ValidationError(os.str());
  }
  auto [it, inserted] = scores_.emplace(std::move(doc_id), score);
  if (!inserted) {
    throw ValidationError("duplicate doc-id '" + it->first + "' in neutrality table");
  }
}

double NeutralityTable::at(std::string_view doc_id) const {
  auto it = scores_.find(doc_id);
  if (it == scores_.end()) {
    throw ValidationError("doc-id '" + std::string(doc_id) +
                          "' missing from neutrality table");
  }
  return it->second;
}

CorpusStats score_corpus_stream(
    const std::function<bool(std::string& doc_id, std::string& text)>& next,
    const AttributeConfig& cfg,
    const std::function<void(std::string_view doc_id, double omega)>& emit,
    unsigned threads) {
  const auto start = std::chrono::steady_clock::now();
  CorpusStats stats;
  std::unordered_set<std::string> seen;

  auto check_and_emit = [&](const std::string& id, double omega) {
    if (!seen.insert(id).second) {
      throw ValidationError("duplicate doc-id '" + id + "' in collection");
    }
    emit(id, omega);
    ++stats.documents;
  };

  if (threads <= 1) {
    std::string id, text;
    while (next(id, text)) {
      check_and_emit(id, neutrality_text(text, cfg));
    }
  } else {
    using Block = std::vector<std::pair<std::string, std::string>>;
    constexpr std::size_t kBlockDocs = 2048;
    const std::size_t window = static_cast<std::size_t>(threads) * 2;

    struct Scored {
      Block docs;
      std::vector<double> omegas;
    };
    auto score_block = [&cfg](Block block) {
      Scored s;
      s.omegas.reserve(block.size());
      for (const auto& [id, text] : block) {
        s.omegas.push_back(neutrality_text(text, cfg));
      }
      s.docs = std::move(block);
      return s;
    };

    std::deque<std::future<Scored>> in_flight;
    auto drain_one = [&] {
      Scored s = in_flight.front().get();
      in_flight.pop_front();
      for (std::size_t i = 0; i < s.docs.size(); ++i) {
        check_and_emit(s.docs[i].first, s.omegas[i]);
      }
    };

    bool more = true;
    while (more) {
      Block block;
      block.reserve(kBlockDocs);
      std::string id, text;
      while (block.size() < kBlockDocs && (more = next(id, text))) {
        block.emplace_back(std::move(id), std::move(text));
      }
      if (!block.empty()) {
        in_flight.push_back(
            std::async(std::launch::async, score_block, std::move(block)));
      }
      while (in_flight.size() >= window || (!more && !in_flight.empty())) {
        drain_one();
      }
    }
  }

  stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return stats;
}

NeutralityTable score_corpus(
    const std::vector<std::pair<std::string, std::string>>& docs,
    const AttributeConfig& cfg, unsigned threads) {
  NeutralityTable table(cfg.fingerprint());
  std::size_t pos = 0;
  score_corpus_stream(
      [&](std::string& id, std::string& text) {
        if (pos >= docs.size()) return false;
        id = docs[pos].first;
        text = docs[pos].second;
        ++pos;
        return true;
      },
      cfg,
      [&](std::string_view id, double omega) { table.add(std::string(id), omega); },
      threads);
  return table;
}

std::string neutrality_table_header(std::string_view fingerprint) {
  std::string header(kTableMagic);
  header += fingerprint;
  header += '\n';
  return header;
}

void format_table_row(std::string& out, std::string_view doc_id, double omega) {
  out.append(doc_id);
  out.push_back('\t');
  append_double(out, omega);
  out.push_back('\n');
}

void write_neutrality_table(std::ostream& out, const NeutralityTable& table) {
  out << neutrality_table_header(table.fingerprint());
  std::vector<const std::string*> ids;
  ids.reserve(table.size());
  for (const auto& [id, score] : table.scores()) ids.push_back(&id);
  std::sort(ids.begin(), ids.end(),
            [](const std::string* a, const std::string* b) { return *a < *b; });
  std::string row;
  for (const std::string* id : ids) {
    row.clear();
    format_table_row(row, *id, table.scores().find(*id)->second);
    out << row;
  }
}

void write_neutrality_table(const std::filesystem::path& path,
                            const NeutralityTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write neutrality table: " + path.string());
  write_neutrality_table(out, table);
  if (!out) throw std::runtime_error("failed writing neutrality table: " + path.string());
}

NeutralityTable read_neutrality_table(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("neutrality table is empty");
  if (!line.starts_with(kTableMagic)) {
    throw ParseError("neutrality table missing header", 1);
  }
  NeutralityTable table(line.substr(kTableMagic.size()));
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw ParseError("neutrality table row needs 'doc-id<TAB>score'", line_no);
    }
    double score = 0.0;
    const char* first = line.data() + tab + 1;
    const char* last = line.data() + line.size();
    auto res = std::from_chars(first, last, score);
    if (res.ec != std::errc() || res.ptr != last) {
      throw ParseError("neutrality table row has a malformed score", line_no);
    }
    try {
      table.add(line.substr(0, tab), score);
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return table;
}

NeutralityTable read_neutrality_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open neutrality table: " + path.string());
  return read_neutrality_table(in);
}

}  // namespace rankfair
