#include <doctest.h>

#include <algorithm>
#include <set>

#include "helpers.hpp"
#include "rankfair/errors.hpp"
#include "rankfair/lexicon.hpp"
#include "rankfair/rng.hpp"

using namespace rankfair;

TEST_CASE("tokenize lowercases and splits on non-alphanumerics") {
  CHECK(tokenize("She is a Governor.").tokens ==
        std::vector<std::string>{"she", "is", "a", "governor"});
  CHECK(tokenize("").tokens.empty());
  CHECK(tokenize("mother-in-law").tokens ==
        std::vector<std::string>{"mother", "in", "law"});
  CHECK(tokenize("  \t\n ").tokens.empty());
  CHECK(tokenize("a1b2, c3!").tokens == std::vector<std::string>{"a1b2", "c3"});
}

TEST_CASE("tokenize keeps multi-byte UTF-8 letters intact") {
  auto ts = tokenize("Caf\xc3\xa9 und M\xc3\xa4dchen!");
  CHECK(ts.tokens == std::vector<std::string>{"caf\xc3\xa9", "und", "m\xc3\xa4dchen"});
}

TEST_CASE("tokenize is idempotent on its own space-joined output") {
  DetRng rng(42);
  const std::string charset =
      "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 .,;:'\"-!?/()";
  for (int round = 0; round < 200; ++round) {
    std::string text;
    const int len = static_cast<int>(rng.index(60));
    for (int i = 0; i < len; ++i) text += charset[rng.index(charset.size())];
    const TokenStream once = tokenize(text);
    std::string joined;
    for (const auto& t : once.tokens) {
      if (!joined.empty()) joined += ' ';
      joined += t;
    }
    CHECK(tokenize(joined).tokens == once.tokens);
  }
}

TEST_CASE("load_wordlist reads one token per line with comments") {
  testutil::TempDir tmp;
  auto path = testutil::write_file(tmp.file("words.txt"),
                                   "# header\nShe\nher \n\nHER\n  hers # trailing\n");
  auto words = load_wordlist(path);
  CHECK(words == std::vector<std::string>{"her", "hers", "she"});

  testutil::write_file(tmp.file("bad.txt"), "two words\n");
  CHECK_THROWS_AS(load_wordlist(tmp.file("bad.txt")), ParseError);
  testutil::write_file(tmp.file("empty.txt"), "# nothing\n\n");
  CHECK_THROWS_AS(load_wordlist(tmp.file("empty.txt")), ValidationError);
  CHECK_THROWS_AS(load_wordlist(tmp.file("missing.txt")), ValidationError);
}

TEST_CASE("load_wordlists builds a config and rejects overlaps") {
  testutil::TempDir tmp;
  auto female = testutil::write_file(tmp.file("f.txt"), "she\nher\n");
  auto male = testutil::write_file(tmp.file("m.txt"), "he\nhim\n");
  auto cfg = load_wordlists({{"female", female}, {"male", male}}, {0.5, 0.5}, 1);
  CHECK(cfg.member_count() == 2);
  CHECK(cfg.tau() == 1);
  CHECK(cfg.member_of("she") == 0);
  CHECK(cfg.member_of("him") == 1);
  CHECK(cfg.member_of("nurse") == -1);

  auto overlapping = testutil::write_file(tmp.file("m2.txt"), "he\nshe\n");
  CHECK_THROWS_WITH_AS(
      static_cast<void>(load_wordlists({{"female", female}, {"male", overlapping}}, {}, 1)),
      doctest::Contains("'she'"), ValidationError);
}

TEST_CASE("a 158-line word list yields 158 representative words") {
  testutil::TempDir tmp;
  std::string f_lines;
  std::string m_lines;
  for (int i = 0; i < 158; ++i) {
    f_lines += "fword" + std::to_string(i) + "\n";
    m_lines += "mword" + std::to_string(i) + "\n";
  }
  auto cfg = load_wordlists({{"female", testutil::write_file(tmp.file("f.txt"), f_lines)},
                             {"male", testutil::write_file(tmp.file("m.txt"), m_lines)}},
                            {}, 1);
  CHECK(cfg.members()[0].words.size() == 158);
  CHECK(cfg.members()[1].words.size() == 158);
}

TEST_CASE("attribute config invariants") {
  auto member = [](const std::string& name, std::vector<std::string> words) {
    return AttributeMember{name, std::move(words)};
  };
  CHECK_THROWS_AS(AttributeConfig::create({member("only", {"a"})}, {1.0}, 1),
                  ValidationError);
  CHECK_THROWS_AS(AttributeConfig::create({member("f", {"a"}), member("m", {"b"})},
                                          {0.6, 0.6}, 1),
                  ValidationError);
  CHECK_THROWS_AS(AttributeConfig::create({member("f", {"a"}), member("m", {"b"})},
                                          {1.5, -0.5}, 1),
                  ValidationError);
  CHECK_THROWS_AS(AttributeConfig::create({member("f", {"a"}), member("m", {"b"})},
                                          {0.5, 0.5}, -1),
                  ValidationError);
  CHECK_THROWS_AS(AttributeConfig::create({member("f", {}), member("m", {"b"})},
                                          {0.5, 0.5}, 1),
                  ValidationError);

  auto cfg = AttributeConfig::create({member("f", {"a"}), member("m", {"b"})},
                                     {0.25, 0.75}, 2);
  CHECK(cfg.target() == std::vector<double>{0.25, 0.75});
}

TEST_CASE("fingerprint tracks config content") {
  auto a = testutil::gender_config(1);
  auto b = testutil::gender_config(1);
  auto c = testutil::gender_config(0);
  CHECK(a.fingerprint() == b.fingerprint());
  CHECK(a.fingerprint() != c.fingerprint());
  CHECK(a.fingerprint().size() == 16);
}

TEST_CASE("build_name_lists qualification and truncation") {
  std::vector<SsaRecord> records{{"Anna", 'F', 900}, {"anna", 'M', 100},
                                 {"alex", 'F', 60},  {"alex", 'M', 40},
                                 {"mary", 'F', 500}, {"lisa", 'F', 300},
                                 {"john", 'M', 800}, {"paul", 'M', 200}};
  auto lists = build_name_lists(records, 0.75);
  // anna: 0.9 female; alex: 0.6 best, excluded. 3 female vs 2 male
  // qualifiers, truncated to 2 keeping the highest totals.
  CHECK(lists.female == std::vector<std::string>{"anna", "mary"});
  CHECK(lists.male == std::vector<std::string>{"john", "paul"});

  CHECK(build_name_lists({}, 0.75).female.empty());
  CHECK_THROWS_AS(build_name_lists(records, 0.5), ValidationError);
  CHECK_THROWS_AS(build_name_lists(records, 1.5), ValidationError);
}

TEST_CASE("name lists are disjoint and equal-sized on random input") {
  DetRng rng(7);
  for (int round = 0; round < 50; ++round) {
    std::vector<SsaRecord> records;
    const int n = 1 + static_cast<int>(rng.index(40));
    for (int i = 0; i < n; ++i) {
      SsaRecord rec;
      rec.name = "name" + std::to_string(rng.index(25));
      rec.tag = rng.coin() ? 'F' : 'M';
      rec.count = 1 + static_cast<long long>(rng.index(1000));
      records.push_back(rec);
    }
    auto lists = build_name_lists(records, 0.75);
    CHECK(lists.female.size() == lists.male.size());
    std::set<std::string> female(lists.female.begin(), lists.female.end());
    for (const auto& name : lists.male) CHECK(!female.contains(name));
  }
}

TEST_CASE("ssa records parse and aggregate across files") {
  testutil::TempDir tmp;
  auto y1 = testutil::write_file(tmp.file("yob2000.txt"), "Emma,F,100\nNoah,M,90\n");
  auto y2 = testutil::write_file(tmp.file("yob2001.txt"), "Emma,F,50\nEmma,M,10\n");
  std::vector<SsaRecord> records = load_ssa_records(y1);
  append_ssa_records(y2, records);
  auto lists = build_name_lists(records, 0.75);
  CHECK(lists.female == std::vector<std::string>{"emma"});  // 150 / 160 >= 0.75
  CHECK(lists.male == std::vector<std::string>{"noah"});

  testutil::write_file(tmp.file("bad.txt"), "Emma,X,3\n");
  CHECK_THROWS_AS(load_ssa_records(tmp.file("bad.txt")), ParseError);
  testutil::write_file(tmp.file("bad2.txt"), "Emma,F,-3\n");
  CHECK_THROWS_AS(load_ssa_records(tmp.file("bad2.txt")), ParseError);
}

TEST_CASE("load_attribute_config reads JSON with optional name enrichment") {
  testutil::TempDir tmp;
  testutil::write_file(tmp.file("f.txt"), "she\nher\n");
  testutil::write_file(tmp.file("m.txt"), "he\nhim\n");
  testutil::write_file(tmp.file("names.csv"), "Emma,F,900\nEmma,M,10\nNoah,M,800\n");
  testutil::write_file(tmp.file("attr.json"), R"({
    "tau": 1,
    "members": [
      {"name": "female", "wordlist": "f.txt"},
      {"name": "male", "wordlist": "m.txt"}
    ],
    "names": {"files": ["names.csv"], "min_ratio": 0.75,
              "assign": {"female": "F", "male": "M"}}
  })");
  auto cfg = load_attribute_config(tmp.file("attr.json"));
  CHECK(cfg.member_of("emma") == 0);
  CHECK(cfg.member_of("noah") == 1);
  CHECK(cfg.member_of("she") == 0);
  CHECK(cfg.target() == std::vector<double>{0.5, 0.5});

  testutil::write_file(tmp.file("broken.json"), "{ not json");
  CHECK_THROWS_AS(load_attribute_config(tmp.file("broken.json")), ParseError);
}
