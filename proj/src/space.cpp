#include "zsl/space.hpp"

#include <algorithm>

#include <omp.h>

#include "zsl/error.hpp"

namespace zsl {

namespace {

// Read-only lookup structures shared across documents when mapping a corpus.
struct MappingIndex {
  std::unordered_map<std::string, std::size_t> feature_of;
  std::vector<std::unordered_map<std::string, double>> context_sim;

  explicit MappingIndex(const SemanticSpace& space)
      : context_sim(space.size()) {
    feature_of.reserve(space.size());
    for (std::size_t f = 0; f < space.size(); ++f) {
      feature_of.emplace(space.features[f], f);
      auto& sim = context_sim[f];
      sim.reserve(space.contexts[f].neighbors.size());
      for (const auto& [word, s] : space.contexts[f].neighbors)
        sim.emplace(word, s);
    }
  }
};

FeatureVector map_with_index(const std::vector<std::string>& tokens,
                             const SemanticSpace& space,
                             const MappingIndex& index, std::string doc_id) {
  FeatureVector fv;
  fv.doc_id = std::move(doc_id);
  fv.values.assign(space.size(), 0.0);
  if (tokens.empty()) return fv;

  std::vector<std::vector<std::size_t>> occurrences(space.size());
  for (std::size_t pos = 0; pos < tokens.size(); ++pos) {
    auto it = index.feature_of.find(tokens[pos]);
    if (it != index.feature_of.end()) occurrences[it->second].push_back(pos);
  }

  const std::size_t n = tokens.size();
  const std::size_t w = static_cast<std::size_t>(space.window);
  for (std::size_t f = 0; f < space.size(); ++f) {
    if (occurrences[f].empty()) continue;
    const auto& sim = index.context_sim[f];
    const double weight = space.mean_tfidf[f];
    double value = 0.0;
    // One summand per (feature occurrence, in-window context occurrence)
    // pair, accumulated in position order.
    for (std::size_t pos : occurrences[f]) {
      const std::size_t lo = pos >= w ? pos - w : 0;
      const std::size_t hi = std::min(n - 1, pos + w);
      for (std::size_t j = lo; j <= hi; ++j) {
        if (j == pos) continue;
        auto it = sim.find(tokens[j]);
        if (it != sim.end()) value += it->second * weight;
      }
    }
    fv.values[f] = value;
  }
  return fv;
}

}  // namespace

SemanticSpace build_semantic_space(const FeatureSet& features,
                                   const EmbeddingMatrix& emb, std::size_t m,
                                   int window) {
  if (features.features.empty())
    throw DataError("build_semantic_space: feature set is empty");
  if (window < 1) throw UsageError("build_semantic_space: window must be >= 1");

  SemanticSpace space;
  space.window = window;
  space.m = m;
  for (const auto& [word, weight] : features.features) {
    if (!emb.has(word)) {
      space.dropped.push_back(word);
      continue;
    }
    space.features.push_back(word);
    space.mean_tfidf.push_back(weight);
    space.contexts.push_back(top_context_words(word, emb, m));
  }
  if (space.features.empty())
    throw DataError(
        "build_semantic_space: every feature is absent from the embedding "
        "vocabulary");
  return space;
}

FeatureVector map_document(const std::vector<std::string>& tokens,
                           const SemanticSpace& space, std::string doc_id) {
  MappingIndex index(space);
  return map_with_index(tokens, space, index, std::move(doc_id));
}

std::vector<FeatureVector> map_corpus(const Corpus& corpus,
                                      const SemanticSpace& space,
                                      int threads) {
  const MappingIndex index(space);
  std::vector<FeatureVector> out(corpus.documents.size());
  const std::int64_t n = static_cast<std::int64_t>(corpus.documents.size());
#pragma omp parallel for schedule(dynamic, 8) num_threads(std::max(1, threads))
  for (std::int64_t i = 0; i < n; ++i) {
    const auto& doc = corpus.documents[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(i)] =
        map_with_index(doc.tokens, space, index, doc.id);
  }
  return out;
}

}  // namespace zsl
