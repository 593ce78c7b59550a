#include "zsl/textprep.hpp"

#include <fstream>
#include <random>

#include "doctest.h"

#include "test_support.hpp"
#include "zsl/error.hpp"

using namespace zsl;

TEST_CASE("preprocess lowercases and strips punctuation") {
  CHECK(preprocess("Suicide RISK: high!!") ==
        std::vector<std::string>{"suicide", "risk", "high"});
}

TEST_CASE("preprocess drops tokens containing digits and splits on punctuation") {
  CHECK(preprocess("denies SI/HI 2x daily") ==
        std::vector<std::string>{"denies", "si", "hi", "daily"});
}

TEST_CASE("preprocess splits known concatenations") {
  SplitLexicon lexicon({"suicidal", "homicidal"});
  CHECK(preprocess("suicidalhomicidal", lexicon) ==
        std::vector<std::string>{"suicidal", "homicidal"});
}

TEST_CASE("preprocess keeps tokens that do not fully decompose") {
  SplitLexicon lexicon({"suicidal", "homicidal"});
  CHECK(preprocess("suicidalhomicid", lexicon) ==
        std::vector<std::string>{"suicidalhomicid"});
  // Greedy longest-prefix, no backtracking.
  SplitLexicon greedy({"abcd", "abcde", "efg"});
  CHECK(preprocess("abcdefg", greedy) ==
        std::vector<std::string>{"abcdefg"});
  SplitLexicon ok({"abcde", "fg"});
  CHECK(preprocess("abcdefg", ok) == std::vector<std::string>{"abcde", "fg"});
}

TEST_CASE("preprocess folds accented characters and treats the rest as breaks") {
  CHECK(preprocess("café, naïve") == std::vector<std::string>{"cafe", "naive"});
  CHECK(preprocess("a\xE2\x80\x94" "b") ==  // em dash
        std::vector<std::string>{"a", "b"});
}

TEST_CASE("preprocess of degenerate input yields empty sequence") {
  CHECK(preprocess("").empty());
  CHECK(preprocess("123 456 !!").empty());
}

TEST_CASE("corpus lexicon splitting is applied on the second pass") {
  Corpus corpus;
  corpus.name = "c";
  Document a;
  a.id = "a";
  a.text = "patient is suicidal and homicidal";
  Document b;
  b.id = "b";
  b.text = "marked suicidalhomicidal today";
  corpus.documents = {a, b};
  preprocess_corpus(corpus);
  CHECK(corpus.documents[1].tokens ==
        std::vector<std::string>{"marked", "suicidal", "homicidal", "today"});
}

namespace {

std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out += ' ';
    out += tokens[i];
  }
  return out;
}

std::string random_text(std::mt19937_64& rng) {
  static const std::string alphabet =
      "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 "
      ".,;:!?/()-_'#\t\n\xc3\xa9";  // includes a UTF-8 e-acute
  std::uniform_int_distribution<std::size_t> len(0, 80);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::string s;
  const std::size_t n = len(rng);
  for (std::size_t i = 0; i < n; ++i) s.push_back(alphabet[pick(rng)]);
  return s;
}

std::size_t count_letter_runs(const std::string& s) {
  std::size_t runs = 0;
  bool in_run = false;
  for (unsigned char c : s) {
    const bool letter = std::isalpha(c);
    if (letter && !in_run) ++runs;
    in_run = letter;
  }
  return runs;
}

}  // namespace

TEST_CASE("preprocess fuzz: letters-only tokens, idempotence, count bound") {
  std::mt19937_64 rng(20240809);
  SplitLexicon lexicon({"risk", "high", "flag", "riskhigh", "suicidal",
                        "homicidal", "watch"});
  for (int iter = 0; iter < 500; ++iter) {
    const std::string text = random_text(rng);
    const auto tokens = preprocess(text, lexicon);
    for (const auto& tok : tokens) {
      CHECK(!tok.empty());
      for (char c : tok) {
        CHECK(c >= 'a');
        CHECK(c <= 'z');
      }
    }
    // Re-preprocessing the joined output reproduces it.
    CHECK(preprocess(join(tokens), lexicon) == tokens);
    // Without lexicon splits the token count is bounded by the maximal
    // letter runs; each applied split only adds the extra parts.
    const auto unsplit = preprocess(text);
    CHECK(unsplit.size() <= count_letter_runs(text));
    const std::size_t splits_applied = tokens.size() - unsplit.size();
    CHECK(tokens.size() <= count_letter_runs(text) + splits_applied);
  }
}

TEST_CASE("load_corpus reads well-formed records") {
  test::TempDir dir("load");
  {
    std::ofstream out(dir.str("c.jsonl"));
    out << R"({"id":"n1","text":"patient stable","label":0})" << "\n";
    out << R"({"id":"n2","text":"suicide watch"})" << "\n";
  }
  Corpus corpus = load_corpus(dir.str("c.jsonl"), 1);
  CHECK(corpus.size() == 2);
  CHECK(corpus.documents[0].weak_label == 0);  // record label wins
  CHECK(corpus.documents[1].weak_label == 1);  // expected_label fallback
  CHECK(corpus.name == "c");
}

TEST_CASE("load_corpus errors name the path, line, and duplicate id") {
  test::TempDir dir("load-err");
  CHECK_THROWS_WITH_AS(load_corpus(dir.str("missing.jsonl")),
                       doctest::Contains("missing.jsonl"), DataError);
  {
    std::ofstream out(dir.str("dup.jsonl"));
    out << R"({"id":"n1","text":"a"})" << "\n";
    out << R"({"id":"n1","text":"b"})" << "\n";
  }
  CHECK_THROWS_WITH_AS(load_corpus(dir.str("dup.jsonl")),
                       doctest::Contains("n1"), DataError);
  {
    std::ofstream out(dir.str("bad.jsonl"));
    out << R"({"id":"n1","text":"a"})" << "\n";
    out << "{not json\n";
  }
  CHECK_THROWS_WITH_AS(load_corpus(dir.str("bad.jsonl")),
                       doctest::Contains(":2"), DataError);
  {
    std::ofstream out(dir.str("empty.jsonl"));
  }
  CHECK_THROWS_AS(load_corpus(dir.str("empty.jsonl")), DataError);
}

TEST_CASE("contains_base_string matches substrings of tokens") {
  Document doc = test::make_doc("d", {"denies", "suicidal"});
  CHECK(contains_base_string(doc, "suicid"));
  Document other = test::make_doc("d2", {"depression", "anxiety"});
  CHECK_FALSE(contains_base_string(other, "suicid"));
  Document partial = test::make_doc("d3", {"sui"});
  CHECK_FALSE(contains_base_string(partial, "suicid"));
  CHECK_THROWS_AS(contains_base_string(doc, ""), UsageError);
}
