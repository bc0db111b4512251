#include "rankfair/lexicon.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rankfair/errors.hpp"

namespace rankfair {

namespace {

struct ByteTables {
  std::array<unsigned char, 256> lower{};
  std::array<bool, 256> token_char{};

  ByteTables() {
    for (int c = 0; c < 256; ++c) {
      lower[c] = static_cast<unsigned char>(c);
      token_char[c] = false;
    }
    for (int c = 'A'; c <= 'Z'; ++c) lower[c] = static_cast<unsigned char>(c - 'A' + 'a');
    for (int c = 'a'; c <= 'z'; ++c) token_char[c] = true;
    for (int c = 'A'; c <= 'Z'; ++c) token_char[c] = true;
    for (int c = '0'; c <= '9'; ++c) token_char[c] = true;
    for (int c = 0x80; c < 256; ++c) token_char[c] = true;
  }
};

const ByteTables& tables() {
  static const ByteTables t;
  return t;
}

constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void fnv_mix(std::uint64_t& h, std::string_view s) {
  for (unsigned char c : s) {
    h ^= c;
    h *= kFnvPrime;
  }
  h ^= 0xff;  // field separator
  h *= kFnvPrime;
}

}  // namespace

void tokenize_into(std::string_view text, std::string& lowered,
                   std::vector<std::string_view>& out) {
  const auto& t = tables();
  lowered.resize(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    lowered[i] = static_cast<char>(t.lower[static_cast<unsigned char>(text[i])]);
  }
  out.clear();
  std::size_t i = 0;
  const std::size_t n = lowered.size();
  while (i < n) {
    while (i < n && !t.token_char[static_cast<unsigned char>(lowered[i])]) ++i;
    std::size_t start = i;
    while (i < n && t.token_char[static_cast<unsigned char>(lowered[i])]) ++i;
    if (i > start) out.push_back(std::string_view(lowered).substr(start, i - start));
  }
}

TokenStream tokenize(std::string_view text) {
  std::string lowered;
  std::vector<std::string_view> views;
  tokenize_into(text, lowered, views);
  TokenStream ts;
  ts.tokens.reserve(views.size());
  for (auto v : views) ts.tokens.emplace_back(v);
  return ts;
}

AttributeConfig AttributeConfig::create(std::vector<AttributeMember> members,
                                        std::vector<double> target, int tau) {
  if (members.size() < 2) {
    throw ValidationError("attribute config needs at least 2 members, got " +
                          std::to_string(members.size()));
  }
  if (tau < 0) {
    throw ValidationError("tau must be non-negative, got " + std::to_string(tau));
  }
  if (target.size() != members.size()) {
    throw ValidationError("target distribution has " + std::to_string(target.size()) +
                          " entries for " + std::to_string(members.size()) + " members");
  }
  double sum = 0.0;
  for (double j : target) {
    if (!(j >= 0.0 && j <= 1.0)) {
      throw ValidationError("target entries must lie in [0,1]");
    }
    sum += j;
  }
  if (std::fabs(sum - 1.0) > 1e-9) {
    std::ostringstream os;
    os << "target distribution must sum to 1, got " << sum;
    throw ValidationError(os.str());
  }

  AttributeConfig cfg;
  cfg.tau_ = tau;
  cfg.target_ = std::move(target);
  cfg.members_ = std::move(members);

  for (std::size_t m = 0; m < cfg.members_.size(); ++m) {
    auto& member = cfg.members_[m];
    for (auto& w : member.words) {
      for (auto& ch : w) ch = static_cast<char>(tables().lower[static_cast<unsigned char>(ch)]);
    }
    std::sort(member.words.begin(), member.words.end());
    member.words.erase(std::unique(member.words.begin(), member.words.end()),
                       member.words.end());
    if (member.words.empty()) {
      throw ValidationError("member '" + member.name + "' has an empty word list");
    }
    for (const auto& w : member.words) {
      auto [it, inserted] = cfg.word_to_member_.emplace(w, static_cast<int>(m));
      if (!inserted) {
        throw ValidationError("word '" + w + "' appears in members '" +
                              cfg.members_[it->second].name + "' and '" + member.name +
                              "'");
      }
    }
  }

  std::uint64_t h = kFnvOffset;
  for (std::size_t m = 0; m < cfg.members_.size(); ++m) {
    fnv_mix(h, cfg.members_[m].name);
    for (const auto& w : cfg.members_[m].words) fnv_mix(h, w);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", cfg.target_[m]);
    fnv_mix(h, buf);
  }
  fnv_mix(h, std::to_string(cfg.tau_));
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  cfg.fingerprint_ = hex;
  return cfg;
}

AttributeConfig AttributeConfig::create_uniform(std::vector<AttributeMember> members,
                                                int tau) {
  const std::size_t n = members.size();
  if (n == 0) throw ValidationError("attribute config needs at least 2 members, got 0");
  std::vector<double> target(n, 1.0 / static_cast<double>(n));
  return create(std::move(members), std::move(target), tau);
}

std::vector<std::string> load_wordlist(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open word list: " + path.string());
  std::vector<std::string> words;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    TokenStream ts = tokenize(line);
    if (ts.tokens.size() > 1) {
      throw ParseError("word list " + path.string() + " has multiple tokens on one line",
                       line_no);
    }
    if (!ts.tokens.empty()) words.push_back(std::move(ts.tokens[0]));
  }
  std::sort(words.begin(), words.end());
  words.erase(std::unique(words.begin(), words.end()), words.end());
  if (words.empty()) {
    throw ValidationError("word list is empty: " + path.string());
  }
  return words;
}

AttributeConfig load_wordlists(
    const std::vector<std::pair<std::string, std::filesystem::path>>& member_files,
    std::vector<double> target, int tau) {
  std::vector<AttributeMember> members;
  members.reserve(member_files.size());
  for (const auto& [name, path] : member_files) {
    members.push_back(AttributeMember{name, load_wordlist(path)});
  }
  if (target.empty()) return AttributeConfig::create_uniform(std::move(members), tau);
  return AttributeConfig::create(std::move(members), std::move(target), tau);
}

AttributeConfig load_attribute_config(const std::filesystem::path& json_path) {
  std::ifstream in(json_path);
  if (!in) throw ValidationError("cannot open attribute config: " + json_path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("attribute config " + json_path.string() + ": " + e.what());
  }

  const auto base = json_path.parent_path();
  auto resolve = [&base](const std::string& p) {
    std::filesystem::path fp(p);
    return fp.is_absolute() ? fp : base / fp;
  };

  try {
    if (!doc.contains("members") || !doc["members"].is_array()) {
      throw ValidationError("attribute config needs a 'members' array");
    }
    std::vector<AttributeMember> members;
    for (const auto& m : doc["members"]) {
      members.push_back(AttributeMember{
          m.at("name").get<std::string>(),
          load_wordlist(resolve(m.at("wordlist").get<std::string>()))});
    }
    int tau = doc.value("tau", 1);
    std::vector<double> target;
    if (doc.contains("target")) target = doc["target"].get<std::vector<double>>();

    if (doc.contains("names")) {
      const auto& names = doc["names"];
      std::vector<SsaRecord> records;
      for (const auto& f : names.at("files")) {
        append_ssa_records(resolve(f.get<std::string>()), records);
      }
      NameLists lists = build_name_lists(records, names.value("min_ratio", 0.75));
      for (auto it = names.at("assign").begin(); it != names.at("assign").end(); ++it) {
        const std::string& member_name = it.key();
        const std::string tag = it.value().get<std::string>();
        auto member = std::find_if(members.begin(), members.end(),
                                   [&](const AttributeMember& m) { return m.name == member_name; });
        if (member == members.end()) {
          throw ValidationError("names.assign references unknown member '" + member_name + "'");
        }
        const auto& extra = (tag == "F") ? lists.female : lists.male;
        member->words.insert(member->words.end(), extra.begin(), extra.end());
      }
    }

    if (target.empty()) return AttributeConfig::create_uniform(std::move(members), tau);
    return AttributeConfig::create(std::move(members), std::move(target), tau);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("attribute config " + json_path.string() + ": " + e.what());
  }
}

void append_ssa_records(const std::filesystem::path& path,
                        std::vector<SsaRecord>& records) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open names file: " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto c1 = line.find(',');
    auto c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
      throw ParseError("names file " + path.string() + ": expected 'name,G,count'", line_no);
    }
    SsaRecord rec;
    rec.name = line.substr(0, c1);
    for (auto& ch : rec.name) ch = static_cast<char>(tables().lower[static_cast<unsigned char>(ch)]);
    std::string tag = line.substr(c1 + 1, c2 - c1 - 1);
    if (tag != "F" && tag != "M" && tag != "f" && tag != "m") {
      throw ParseError("names file " + path.string() + ": gender tag must be F or M", line_no);
    }
    rec.tag = static_cast<char>(std::toupper(static_cast<unsigned char>(tag[0])));
    const char* first = line.data() + c2 + 1;
    const char* last = line.data() + line.size();
    auto res = std::from_chars(first, last, rec.count);
    if (res.ec != std::errc() || res.ptr != last || rec.count <= 0) {
      throw ParseError("names file " + path.string() + ": count must be a positive integer",
                       line_no);
    }
    records.push_back(std::move(rec));
  }
}

std::vector<SsaRecord> load_ssa_records(const std::filesystem::path& path) {
  std::vector<SsaRecord> records;
  append_ssa_records(path, records);
  return records;
}

NameLists build_name_lists(const std::vector<SsaRecord>& records, double min_ratio) {
  if (!(min_ratio > 0.5 && min_ratio <= 1.0)) {
    throw ValidationError("min_ratio must lie in (0.5, 1]");
  }
  struct Counts {
    long long f = 0;
    long long m = 0;
  };
  std::map<std::string, Counts> by_name;
  for (const auto& rec : records) {
    auto& c = by_name[rec.name];
    if (rec.tag == 'F') {
      c.f += rec.count;
    } else {
      c.m += rec.count;
    }
  }

  // (total count, name) per qualifying tag; sorted most frequent first.
  using Entry = std::pair<long long, std::string>;
  std::vector<Entry> female, male;
  for (const auto& [name, c] : by_name) {
    const long long total = c.f + c.m;
    if (total <= 0) continue;
    const double f_ratio = static_cast<double>(c.f) / static_cast<double>(total);
    if (f_ratio >= min_ratio) {
      female.emplace_back(total, name);
    } else if (1.0 - f_ratio >= min_ratio) {
      male.emplace_back(total, name);
    }
  }
  auto by_count_desc = [](const Entry& a, const Entry& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  };
  std::sort(female.begin(), female.end(), by_count_desc);
  std::sort(male.begin(), male.end(), by_count_desc);

  const std::size_t keep = std::min(female.size(), male.size());
  NameLists out;
  out.female.reserve(keep);
  out.male.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) out.female.push_back(female[i].second);
  for (std::size_t i = 0; i < keep; ++i) out.male.push_back(male[i].second);
  std::sort(out.female.begin(), out.female.end());
  std::sort(out.male.begin(), out.male.end());
  return out;
}

}  // namespace rankfair
