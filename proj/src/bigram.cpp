#include "zsl/bigram.hpp"

#include <algorithm>
#include <set>

#include "zsl/error.hpp"

namespace zsl {

std::map<Bigram, std::size_t> extract_bigrams(
    const std::vector<std::string>& tokens) {
  std::map<Bigram, std::size_t> out;
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i)
    ++out[{tokens[i], tokens[i + 1]}];
  return out;
}

BigramFeatureSet select_top_unique_bigrams(const Corpus& pos,
                                           const Corpus& neg, std::size_t k) {
  if (k == 0) throw UsageError("select_top_unique_bigrams: k must be >= 1");
  std::map<Bigram, std::size_t> pos_counts;
  for (const auto& doc : pos.documents)
    for (const auto& [bg, c] : extract_bigrams(doc.tokens))
      pos_counts[bg] += c;
  std::set<Bigram> neg_seen;
  for (const auto& doc : neg.documents)
    for (const auto& [bg, c] : extract_bigrams(doc.tokens))
      neg_seen.insert(bg);

  std::vector<std::pair<Bigram, std::size_t>> candidates;
  for (const auto& [bg, c] : pos_counts)
    if (!neg_seen.count(bg)) candidates.emplace_back(bg, c);
  std::sort(candidates.begin(), candidates.end(),
            [](const auto& a, const auto& b) {
              if (a.second != b.second) return a.second > b.second;
              return a.first < b.first;
            });
  if (candidates.size() > k) candidates.resize(k);

  BigramFeatureSet set;
  set.k_requested = k;
  set.bigrams = std::move(candidates);
  return set;
}

std::vector<double> map_document_bigram_counts(
    const std::vector<std::string>& tokens, const BigramFeatureSet& set) {
  std::vector<double> counts(set.size(), 0.0);
  if (tokens.size() < 2) return counts;
  std::map<Bigram, std::size_t> index;
  for (std::size_t i = 0; i < set.bigrams.size(); ++i)
    index.emplace(set.bigrams[i].first, i);
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    auto it = index.find({tokens[i], tokens[i + 1]});
    if (it != index.end()) counts[it->second] += 1.0;
  }
  return counts;
}

}  // namespace zsl
