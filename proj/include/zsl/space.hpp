#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "zsl/document.hpp"
#include "zsl/embedding.hpp"
#include "zsl/tfidf.hpp"

namespace zsl {

// The semantic space: feature words in fixed order (defining the vector
// layout), each with its positive-corpus mean TF-IDF weight and its top-m
// context words with cosine similarities.
struct SemanticSpace {
  std::vector<std::string> features;
  std::vector<double> mean_tfidf;     // parallel to features
  std::vector<ContextSet> contexts;   // parallel to features
  int window = 5;                     // tokens on each side of an occurrence
  std::size_t m = 50;
  std::vector<std::string> dropped;   // features absent from the embedding

  std::size_t size() const { return features.size(); }
};

struct FeatureVector {
  std::string doc_id;
  std::vector<double> values;
};

// Builds the space from the selected features and trained embeddings.
// Features missing from the embedding vocabulary are dropped and recorded;
// dropping all of them is an error.
SemanticSpace build_semantic_space(const FeatureSet& features,
                                   const EmbeddingMatrix& emb,
                                   std::size_t m = 50, int window = 5);

// Maps one document into the space: for each feature occurrence and each
// context-word occurrence within `window` tokens on either side, the
// feature accumulates cosSim(feature, context) * mean_tfidf(feature).
// Every such occurrence pair contributes one summand.
FeatureVector map_document(const std::vector<std::string>& tokens,
                           const SemanticSpace& space,
                           std::string doc_id = {});

// Maps a whole corpus; documents are independent, so the parallel loop is
// bit-identical to the serial one.
std::vector<FeatureVector> map_corpus(const Corpus& corpus,
                                      const SemanticSpace& space,
                                      int threads = 1);

}  // namespace zsl
