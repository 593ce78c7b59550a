#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "zsl/document.hpp"

namespace zsl {

struct SkipgramConfig {
  int dim = 300;
  int window = 5;  // tokens on each side of the center word
  int epochs = 10;
  int negatives = 5;
  int min_count = 5;
  double lr_start = 0.025;
  double lr_end = 1e-4;
  double subsample = 0.0;  // frequent-word subsampling threshold; 0 = off
  std::uint64_t seed = 1;
  int threads = 1;  // >1 uses lock-free shared updates; not bit-reproducible
};

struct EmbeddingMatrix {
  int dim = 0;
  int min_count = 0;
  std::uint64_t seed = 0;
  SkipgramConfig config;
  std::vector<std::string> words;  // row index -> word, frequency-ordered
  std::unordered_map<std::string, std::size_t> vocab;  // word -> row index
  std::vector<double> vectors;  // row-major |vocab| x dim input vectors
  std::vector<double> epoch_loss;  // mean negative-sampling objective

  std::size_t size() const { return words.size(); }
  std::span<const double> row(std::size_t index) const {
    return {vectors.data() + index * static_cast<std::size_t>(dim),
            static_cast<std::size_t>(dim)};
  }
  bool has(const std::string& word) const { return vocab.count(word) > 0; }
};

struct ContextSet {
  std::string feature;
  // (word, cosine similarity), similarity non-increasing, ties by word.
  std::vector<std::pair<std::string, double>> neighbors;
};

// Trains skip-gram embeddings with negative sampling over all
// (center, context) pairs within the window. Single-threaded runs are
// bit-reproducible for a fixed seed.
EmbeddingMatrix train_skipgram(const Corpus& corpus,
                               const SkipgramConfig& config = {});

// dot(u,v) / (|u| |v|), clamped to [-1, 1]. Zero-norm input is an error.
double cosine_similarity(std::span<const double> u, std::span<const double> v);

// The m vocabulary words most similar to `feature` (excluded itself),
// ties broken lexicographically.
ContextSet top_context_words(const std::string& feature,
                             const EmbeddingMatrix& emb, std::size_t m = 50);

}  // namespace zsl
