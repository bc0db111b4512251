#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace rankfair {

/// Lowercased word tokens of one piece of text.
struct TokenStream {
  std::vector<std::string> tokens;

  bool operator==(const TokenStream&) const = default;
};

// Tokenization rule used everywhere a text is matched against representative
// words: ASCII letters are folded to lowercase, ASCII alphanumerics and all
// bytes >= 0x80 (multi-byte UTF-8 sequences pass through unchanged) are token
// characters, every other byte separates tokens. Empty tokens are dropped.
TokenStream tokenize(std::string_view text);

// Allocation-free variant for hot loops: `lowered` is reused as the backing
// buffer, `out` receives views into it.
void tokenize_into(std::string_view text, std::string& lowered,
                   std::vector<std::string_view>& out);

/// One member of a protected attribute with its representative words.
struct AttributeMember {
  std::string name;
  std::vector<std::string> words;  // lowercase, sorted, unique
};

namespace detail {
struct StringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const noexcept {
    return std::hash<std::string_view>{}(s);
  }
};
}  // namespace detail

/// A protected attribute: ordered members, target distribution and the
/// neutrality threshold tau. Immutable after construction; safe to share
/// across threads.
class AttributeConfig {
 public:
  // Validates: >= 2 members, non-empty lowercase word sets with no word in
  // two members, target entries in [0,1] summing to 1 (tolerance 1e-9),
  // tau >= 0. Throws ValidationError otherwise.
  static AttributeConfig create(std::vector<AttributeMember> members,
                                std::vector<double> target, int tau);

  // Uniform target distribution over the given members.
  static AttributeConfig create_uniform(std::vector<AttributeMember> members,
                                        int tau);

  const std::vector<AttributeMember>& members() const { return members_; }
  const std::vector<double>& target() const { return target_; }
  int tau() const { return tau_; }
  std::size_t member_count() const { return members_.size(); }

  // Index of the member whose word set contains `token`, or -1.
  int member_of(std::string_view token) const {
    auto it = word_to_member_.find(token);
    return it == word_to_member_.end() ? -1 : it->second;
  }

  // Stable 64-bit hex digest over members, words, target and tau. Used to
  // detect stale neutrality tables.
  const std::string& fingerprint() const { return fingerprint_; }

 private:
  AttributeConfig() = default;

  std::vector<AttributeMember> members_;
  std::vector<double> target_;
  int tau_ = 1;
  std::string fingerprint_;
  std::unordered_map<std::string, int, detail::StringHash, std::equal_to<>>
      word_to_member_;
};

// One token per line, '#' starts a comment, blank lines ignored. Words are
// lowercased and deduplicated. Throws ValidationError if the list ends up
// empty and ParseError for unreadable files.
std::vector<std::string> load_wordlist(const std::filesystem::path& path);

// Builds a config from per-member word-list files. `target` empty means
// uniform. Cross-member overlap is a ValidationError naming the word.
AttributeConfig load_wordlists(
    const std::vector<std::pair<std::string, std::filesystem::path>>& member_files,
    std::vector<double> target, int tau);

// Attribute config file: a small JSON document naming member -> wordlist
// path, the target distribution and tau, with optional census-name
// enrichment. Relative wordlist paths resolve against the config file.
//
//   {
//     "tau": 1,
//     "members": [ {"name": "female", "wordlist": "female.txt"},
//                  {"name": "male",   "wordlist": "male.txt"} ],
//     "target": [0.5, 0.5],                 // optional, default uniform
//     "names": {                            // optional
//       "files": ["yob2000.txt"],
//       "min_ratio": 0.75,
//       "assign": {"female": "F", "male": "M"}
//     }
//   }
AttributeConfig load_attribute_config(const std::filesystem::path& json_path);

/// One census-style name frequency record.
struct SsaRecord {
  std::string name;
  char tag = 0;  // 'F' or 'M'
  long long count = 0;
};

// Comma-separated "name,G,count" lines; files for several years concatenate.
std::vector<SsaRecord> load_ssa_records(const std::filesystem::path& path);
void append_ssa_records(const std::filesystem::path& path,
                        std::vector<SsaRecord>& records);

/// Equal-sized, disjoint name sets per binary tag.
struct NameLists {
  std::vector<std::string> female;
  std::vector<std::string> male;
};

// Aggregates counts per (name, tag); a name qualifies for tag g iff
// count_g / (count_F + count_M) >= min_ratio. The larger qualifying set is
// truncated to the smaller one's size keeping the highest-total-count names
// (ties broken by name). Names are lowercased. min_ratio must be in (0.5, 1].
NameLists build_name_lists(const std::vector<SsaRecord>& records,
                           double min_ratio);

}  // namespace rankfair
