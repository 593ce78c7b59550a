#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "zsl/document.hpp"

namespace zsl {

// Lexicon of known words used to split concatenations such as
// "suicidalhomicidal" -> "suicidal" "homicidal". Splitting is greedy
// longest-prefix and must consume the whole token into at least two
// lexicon words, otherwise the token is kept unsplit.
class SplitLexicon {
 public:
  SplitLexicon() = default;
  explicit SplitLexicon(std::unordered_set<std::string> words);

  static SplitLexicon from_file(const std::string& path);

  bool contains(std::string_view word) const;
  bool empty() const { return words_.empty(); }
  std::size_t size() const { return words_.size(); }
  std::size_t max_word_length() const { return max_len_; }

  // Splits one letters-only token. Returns the fixpoint decomposition:
  // parts that decompose further are split recursively.
  std::vector<std::string> split(const std::string& token) const;

 private:
  std::unordered_set<std::string> words_;
  std::size_t max_len_ = 0;
  std::size_t min_len_ = 0;

  bool decompose(const std::string& token,
                 std::vector<std::string>& parts) const;
};

// Lowercases, folds accented Latin characters to ASCII, removes markup and
// punctuation, splits on non-alphanumeric boundaries, drops tokens that do
// not consist entirely of letters, and splits known concatenations.
std::vector<std::string> preprocess(std::string_view raw,
                                    const SplitLexicon& lexicon = {});

// In-place preprocessing of a whole corpus. When no lexicon is given, one is
// built from the corpus vocabulary (tokens of length >= min_lexicon_len).
void preprocess_corpus(Corpus& corpus,
                       const std::optional<SplitLexicon>& lexicon = std::nullopt,
                       std::size_t min_lexicon_len = 4, int threads = 1);

// Builds the default split lexicon: all first-pass tokens of the corpus
// with length >= min_len.
SplitLexicon build_corpus_lexicon(const Corpus& corpus, std::size_t min_len = 4);

// Loads a corpus from a JSONL file: one record per line with fields
// id (string, required), text (string, required), label (0/1, optional),
// tokens (array of strings, optional: present in preprocessed artifacts).
Corpus load_corpus(const std::string& path,
                   std::optional<int> expected_label = std::nullopt);

// Writes a corpus in the same JSONL format; preprocessed corpora carry
// their token arrays so downstream stages need not re-tokenize.
void save_corpus(const Corpus& corpus, const std::string& path,
                 bool with_tokens = true);

// True iff any token of the (preprocessed) document contains `base` as a
// substring. Empty base is an error.
bool contains_base_string(const Document& doc, std::string_view base);

}  // namespace zsl
