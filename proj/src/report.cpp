#include "rankfair/report.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rankfair/errors.hpp"

namespace rankfair {

namespace {

constexpr std::string_view kTsvMagic = "# rankfair-report v1";

std::string fmt(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string fmt_opt(const std::optional<double>& v) {
  return v ? fmt(*v) : std::string("-");
}

double parse_num(std::string_view s, std::size_t line_no) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ParseError("report: malformed number '" + std::string(s) + "'", line_no);
  }
  return v;
}

std::optional<double> parse_opt(std::string_view s, std::size_t line_no) {
  if (s == "-") return std::nullopt;
  return parse_num(s, line_no);
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

std::string join_flags(const std::vector<std::string>& flags) {
  if (flags.empty()) return "-";
  std::string out;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (i) out += ';';
    out += flags[i];
  }
  return out;
}

std::vector<std::string> split_flags(std::string_view field) {
  std::vector<std::string> flags;
  if (field == "-") return flags;
  std::size_t start = 0;
  while (start <= field.size()) {
    auto semi = field.find(';', start);
    if (semi == std::string_view::npos) {
      flags.emplace_back(field.substr(start));
      break;
    }
    flags.emplace_back(field.substr(start, semi - start));
    start = semi + 1;
  }
  return flags;
}

void write_tsv(std::ostream& out, const EvalReport& r) {
  out << kTsvMagic << '\n';
  out << "# ranker=" << r.ranker_tag << '\n';
  out << "# version=" << r.tool_version << '\n';
  out << "# fingerprint=" << r.config_fingerprint << '\n';
  out << "# query_set=" << r.query_set_tag << '\n';
  out << "# cutoff=" << r.cutoff << '\n';
  out << "# background_depth=" << r.background_depth << '\n';
  out << "# rel_threshold=" << r.rel_threshold << '\n';
  out << "# queries=" << r.aggregates.queries << '\n';
  out << "# flagged=" << r.aggregates.flagged << '\n';
  out << "# baseline=" << (r.baseline_tag.empty() ? "-" : r.baseline_tag) << '\n';
  for (const auto& s : r.significance) {
    out << "# significance\t" << s.metric << '\t' << fmt(s.t_stat) << '\t'
        << fmt(s.p_value) << '\t' << (s.significant ? 1 : 0) << '\n';
  }
  out << "query_id\tfairr\tifairr\tnfairr\tset_nfairr\tmrr\tndcg\trecall\tflags\n";
  for (const auto& row : r.rows) {
    out << row.query_id << '\t' << fmt(row.fairr) << '\t' << fmt(row.ifairr) << '\t'
        << fmt(row.nfairr) << '\t' << fmt_opt(row.set_nfairr) << '\t' << fmt(row.mrr)
        << '\t' << fmt(row.ndcg) << '\t' << fmt(row.recall) << '\t'
        << join_flags(row.flags) << '\n';
  }
  out << "#aggregate\t-\t-\t" << fmt(r.aggregates.nfairr) << '\t'
      << fmt_opt(r.aggregates.set_nfairr) << '\t' << fmt(r.aggregates.mrr) << '\t'
      << fmt(r.aggregates.ndcg) << '\t' << fmt(r.aggregates.recall) << "\t-\n";
}

EvalReport parse_tsv(std::istream& in) {
  EvalReport r;
  std::string line;
  std::size_t line_no = 1;  // the magic line was already consumed
  bool saw_header = false;
  bool saw_aggregate = false;

  auto header_value = [&](std::string_view l, std::string_view key) -> std::optional<std::string> {
    std::string prefix = "# " + std::string(key) + "=";
    if (l.starts_with(prefix)) return std::string(l.substr(prefix.size()));
    return std::nullopt;
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    if (line.starts_with("#aggregate\t")) {
      auto f = split_tabs(line);
      if (f.size() != 9) throw ParseError("report: malformed aggregate row", line_no);
      r.aggregates.nfairr = parse_num(f[3], line_no);
      r.aggregates.set_nfairr = parse_opt(f[4], line_no);
      r.aggregates.mrr = parse_num(f[5], line_no);
      r.aggregates.ndcg = parse_num(f[6], line_no);
      r.aggregates.recall = parse_num(f[7], line_no);
      saw_aggregate = true;
      continue;
    }
    if (line.starts_with("# significance\t")) {
      auto f = split_tabs(line);
      if (f.size() != 5) throw ParseError("report: malformed significance row", line_no);
      SignificanceEntry s;
      s.metric = std::string(f[1]);
      s.t_stat = parse_num(f[2], line_no);
      s.p_value = parse_num(f[3], line_no);
      s.significant = f[4] == "1";
      r.significance.push_back(std::move(s));
      continue;
    }
    if (line.starts_with("# ")) {
      if (auto v = header_value(line, "ranker")) r.ranker_tag = *v;
      else if (auto v2 = header_value(line, "version")) r.tool_version = *v2;
      else if (auto v3 = header_value(line, "fingerprint")) r.config_fingerprint = *v3;
      else if (auto v4 = header_value(line, "query_set")) r.query_set_tag = *v4;
      else if (auto v5 = header_value(line, "cutoff")) r.cutoff = std::stoi(*v5);
      else if (auto v6 = header_value(line, "background_depth")) r.background_depth = std::stoi(*v6);
      else if (auto v7 = header_value(line, "rel_threshold")) r.rel_threshold = std::stoi(*v7);
      else if (auto v8 = header_value(line, "queries")) r.aggregates.queries = std::stoi(*v8);
      else if (auto v9 = header_value(line, "flagged")) r.aggregates.flagged = std::stoi(*v9);
      else if (auto v10 = header_value(line, "baseline")) r.baseline_tag = *v10 == "-" ? "" : *v10;
      else throw ParseError("report: unknown header line '" + line + "'", line_no);
      continue;
    }
    if (line.starts_with("query_id\t")) {
      saw_header = true;
      continue;
    }
    if (!saw_header) throw ParseError("report: row before column header", line_no);
    auto f = split_tabs(line);
    if (f.size() != 9) throw ParseError("report: row needs 9 columns", line_no);
    QueryEval row;
    row.query_id = std::string(f[0]);
    row.fairr = parse_num(f[1], line_no);
    row.ifairr = parse_num(f[2], line_no);
    row.nfairr = parse_num(f[3], line_no);
    row.set_nfairr = parse_opt(f[4], line_no);
    row.mrr = parse_num(f[5], line_no);
    row.ndcg = parse_num(f[6], line_no);
    row.recall = parse_num(f[7], line_no);
    row.flags = split_flags(f[8]);
    r.rows.push_back(std::move(row));
  }
  if (!saw_aggregate) throw ParseError("report: missing aggregate row");
  return r;
}

nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json j;
  j["format"] = "rankfair-report";
  j["format_version"] = 1;
  j["ranker"] = r.ranker_tag;
  j["version"] = r.tool_version;
  j["fingerprint"] = r.config_fingerprint;
  j["query_set"] = r.query_set_tag;
  j["cutoff"] = r.cutoff;
  j["background_depth"] = r.background_depth;
  j["rel_threshold"] = r.rel_threshold;
  j["baseline"] = r.baseline_tag;
  j["significance"] = nlohmann::json::array();
  for (const auto& s : r.significance) {
    j["significance"].push_back({{"metric", s.metric},
                                 {"t_stat", s.t_stat},
                                 {"p_value", s.p_value},
                                 {"significant", s.significant}});
  }
  j["rows"] = nlohmann::json::array();
  for (const auto& row : r.rows) {
    nlohmann::json jr{{"query_id", row.query_id}, {"fairr", row.fairr},
                      {"ifairr", row.ifairr},     {"nfairr", row.nfairr},
                      {"mrr", row.mrr},           {"ndcg", row.ndcg},
                      {"recall", row.recall},     {"flags", row.flags}};
    if (row.set_nfairr) jr["set_nfairr"] = *row.set_nfairr;
    j["rows"].push_back(std::move(jr));
  }
  nlohmann::json agg{{"nfairr", r.aggregates.nfairr},
                     {"mrr", r.aggregates.mrr},
                     {"ndcg", r.aggregates.ndcg},
                     {"recall", r.aggregates.recall},
                     {"queries", r.aggregates.queries},
                     {"flagged", r.aggregates.flagged}};
  if (r.aggregates.set_nfairr) agg["set_nfairr"] = *r.aggregates.set_nfairr;
  j["aggregates"] = std::move(agg);
  return j;
}

EvalReport from_json(const nlohmann::json& j) {
  EvalReport r;
  r.ranker_tag = j.at("ranker").get<std::string>();
  r.tool_version = j.at("version").get<std::string>();
  r.config_fingerprint = j.at("fingerprint").get<std::string>();
  r.query_set_tag = j.at("query_set").get<std::string>();
  r.cutoff = j.at("cutoff").get<int>();
  r.background_depth = j.at("background_depth").get<int>();
  r.rel_threshold = j.at("rel_threshold").get<int>();
  r.baseline_tag = j.at("baseline").get<std::string>();
  for (const auto& s : j.at("significance")) {
    r.significance.push_back(SignificanceEntry{
        s.at("metric").get<std::string>(), s.at("t_stat").get<double>(),
        s.at("p_value").get<double>(), s.at("significant").get<bool>()});
  }
  for (const auto& jr : j.at("rows")) {
    QueryEval row;
    row.query_id = jr.at("query_id").get<std::string>();
    row.fairr = jr.at("fairr").get<double>();
    row.ifairr = jr.at("ifairr").get<double>();
    row.nfairr = jr.at("nfairr").get<double>();
    if (jr.contains("set_nfairr")) row.set_nfairr = jr["set_nfairr"].get<double>();
    row.mrr = jr.at("mrr").get<double>();
    row.ndcg = jr.at("ndcg").get<double>();
    row.recall = jr.at("recall").get<double>();
    row.flags = jr.at("flags").get<std::vector<std::string>>();
    r.rows.push_back(std::move(row));
  }
  const auto& agg = j.at("aggregates");
  r.aggregates.nfairr = agg.at("nfairr").get<double>();
  if (agg.contains("set_nfairr")) r.aggregates.set_nfairr = agg["set_nfairr"].get<double>();
  r.aggregates.mrr = agg.at("mrr").get<double>();
  r.aggregates.ndcg = agg.at("ndcg").get<double>();
  r.aggregates.recall = agg.at("recall").get<double>();
  r.aggregates.queries = agg.at("queries").get<int>();
  r.aggregates.flagged = agg.at("flagged").get<int>();
  return r;
}

}  // namespace

ReportAggregates recompute_aggregates(const std::vector<QueryEval>& rows) {
  if (rows.empty()) throw ValidationError("report has no per-query rows");
  ReportAggregates agg;
  double set_sum = 0.0;
  bool all_set = true;
  for (const auto& row : rows) {
    agg.nfairr += row.nfairr;
    agg.mrr += row.mrr;
    agg.ndcg += row.ndcg;
    agg.recall += row.recall;
    if (!row.flags.empty()) ++agg.flagged;
    if (row.set_nfairr) {
      set_sum += *row.set_nfairr;
    } else {
      all_set = false;
    }
  }
  const double n = static_cast<double>(rows.size());
  agg.queries = static_cast<int>(rows.size());
  agg.nfairr /= n;
  agg.mrr /= n;
  agg.ndcg /= n;
  agg.recall /= n;
  if (all_set) agg.set_nfairr = set_sum / n;
  return agg;
}

void write_report(std::ostream& out, const EvalReport& report, ReportFormat format) {
  if (format == ReportFormat::Tsv) {
    write_tsv(out, report);
  } else {
    out << to_json(report).dump(2) << '\n';
  }
}

void write_report(const std::filesystem::path& path, const EvalReport& report,
                  ReportFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write report: " + path.string());
  write_report(out, report, format);
  if (!out) throw std::runtime_error("failed writing report: " + path.string());
}

EvalReport parse_report(std::istream& in) {
  std::string first;
  if (!std::getline(in, first)) throw ParseError("report is empty");
  if (!first.empty() && first.back() == '\r') first.pop_back();
  if (first == kTsvMagic) return parse_tsv(in);

  // JSON: rewind is not possible on a generic istream, so re-assemble.
  std::ostringstream rest;
  rest << first << '\n' << in.rdbuf();
  try {
    return from_json(nlohmann::json::parse(rest.str()));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("report: ") + e.what());
  }
}

EvalReport parse_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open report: " + path.string());
  return parse_report(in);
}

}  // namespace rankfair
