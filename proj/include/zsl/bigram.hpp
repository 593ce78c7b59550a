#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "zsl/document.hpp"

namespace zsl {

using Bigram = std::pair<std::string, std::string>;

// Bag-of-words comparator features: the k most frequent bigrams of the
// positive corpus that never occur in the negative corpus, ordered by
// (frequency desc, pair asc).
struct BigramFeatureSet {
  std::vector<std::pair<Bigram, std::size_t>> bigrams;
  std::size_t k_requested = 0;

  std::size_t size() const { return bigrams.size(); }
  bool short_of_k() const { return bigrams.size() < k_requested; }
};

// Adjacent token pairs within one document, with occurrence counts.
std::map<Bigram, std::size_t> extract_bigrams(
    const std::vector<std::string>& tokens);

// Top-k positive-corpus bigrams with zero negative-corpus occurrences.
// Fewer than k candidates is not an error; the caller can see the shortfall
// on the returned set.
BigramFeatureSet select_top_unique_bigrams(const Corpus& pos,
                                           const Corpus& neg,
                                           std::size_t k = 163);

// Raw occurrence counts of each feature bigram, in feature order.
std::vector<double> map_document_bigram_counts(
    const std::vector<std::string>& tokens, const BigramFeatureSet& set);

}  // namespace zsl
