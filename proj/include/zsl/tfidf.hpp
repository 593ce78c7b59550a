#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "zsl/document.hpp"

namespace zsl {

// How the per-document TF-IDF values are averaged into one score per term.
// ContainingDocs divides by the number of documents containing the term;
// AllDocs divides by the corpus size.
enum class TfidfMean { ContainingDocs, AllDocs };

struct TfidfTable {
  std::string corpus_name;
  std::size_t n_docs = 0;
  TfidfMean mean_mode = TfidfMean::ContainingDocs;
  std::unordered_map<std::string, std::size_t> df;
  std::unordered_map<std::string, double> mean_tfidf;

  bool has_term(const std::string& term) const { return df.count(term) > 0; }
};

// Ordered feature list: the positive corpus's top terms that are absent from
// the negative corpus's top terms, ordered by the positive mean TF-IDF
// (descending, ties broken by word ascending).
struct FeatureSet {
  std::vector<std::pair<std::string, double>> features;
  std::size_t n_requested = 0;
};

// Relative term frequency in `doc` weighted by ln(n_docs / df). Terms absent
// from the document score 0. An empty document has no defined relative
// frequency and is an error.
double tfidf_weight(const std::string& term, const Document& doc,
                    const TfidfTable& table);

// Builds document frequencies and mean TF-IDF scores for every vocabulary
// term. Documents must be preprocessed and non-empty. Per-document counting
// runs across `threads`; the reduction is in document order, so results are
// identical for any thread count.
TfidfTable build_tfidf_table(const Corpus& corpus,
                             TfidfMean mode = TfidfMean::ContainingDocs,
                             int threads = 1);

// First min(n, vocab size) terms under (mean_tfidf desc, word asc).
std::vector<std::string> top_n_terms(const TfidfTable& table, std::size_t n);
std::vector<std::pair<std::string, double>> top_n_entries(
    const TfidfTable& table, std::size_t n);

// The feature words: top positive terms not present among the top negative
// terms. Empty result is an error (no discriminative vocabulary).
FeatureSet select_features(
    const std::vector<std::pair<std::string, double>>& top_pos,
    const std::vector<std::string>& top_neg);

}  // namespace zsl
