#include "zsl/space.hpp"

#include <random>
#include <set>

#include "doctest.h"

#include "test_support.hpp"
#include "zsl/error.hpp"

using namespace zsl;

namespace {

SemanticSpace hand_space(
    std::vector<std::string> features, std::vector<double> weights,
    std::vector<std::vector<std::pair<std::string, double>>> contexts,
    int window = 5) {
  SemanticSpace space;
  space.features = std::move(features);
  space.mean_tfidf = std::move(weights);
  space.window = window;
  for (std::size_t f = 0; f < space.features.size(); ++f) {
    ContextSet ctx;
    ctx.feature = space.features[f];
    ctx.neighbors = contexts[f];
    space.contexts.push_back(std::move(ctx));
  }
  return space;
}

// Independent Eq. 2 enumerator with the same fixed summation order as the
// implementation contract: features in order, occurrences in position
// order, window positions left to right.
std::vector<double> oracle_map(const std::vector<std::string>& tokens,
                               const SemanticSpace& space) {
  std::vector<double> values(space.size(), 0.0);
  const long w = space.window;
  for (std::size_t f = 0; f < space.size(); ++f) {
    double v = 0.0;
    for (long i = 0; i < static_cast<long>(tokens.size()); ++i) {
      if (tokens[static_cast<std::size_t>(i)] != space.features[f]) continue;
      for (long j = i - w; j <= i + w; ++j) {
        if (j < 0 || j >= static_cast<long>(tokens.size()) || j == i)
          continue;
        for (const auto& [word, sim] : space.contexts[f].neighbors) {
          if (tokens[static_cast<std::size_t>(j)] == word) {
            v += sim * space.mean_tfidf[f];
            break;
          }
        }
      }
    }
    values[f] = v;
  }
  return values;
}

std::vector<std::string> random_tokens(std::mt19937_64& rng,
                                       const std::vector<std::string>& pool,
                                       std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len(0, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::vector<std::string> tokens(len(rng));
  for (auto& t : tokens) t = pool[pick(rng)];
  return tokens;
}

SemanticSpace random_space(std::mt19937_64& rng,
                           const std::vector<std::string>& pool) {
  std::uniform_int_distribution<std::size_t> n_features(1, 6);
  std::uniform_int_distribution<std::size_t> n_ctx(1, 8);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::uniform_real_distribution<double> sim(-1.0, 1.0);
  std::uniform_real_distribution<double> weight(0.0, 2.0);
  std::uniform_int_distribution<int> window(1, 7);

  const std::size_t nf = n_features(rng);
  std::vector<std::string> features;
  std::vector<double> weights;
  std::vector<std::vector<std::pair<std::string, double>>> contexts;
  std::set<std::string> used;
  while (features.size() < nf) {
    const std::string w = pool[pick(rng)];
    if (!used.insert(w).second) continue;
    features.push_back(w);
    weights.push_back(weight(rng));
    std::vector<std::pair<std::string, double>> ctx;
    std::set<std::string> ctx_used;
    const std::size_t nc = n_ctx(rng);
    while (ctx.size() < nc) {
      const std::string c = pool[pick(rng)];
      if (c == w || !ctx_used.insert(c).second) continue;
      ctx.emplace_back(c, sim(rng));
    }
    contexts.push_back(std::move(ctx));
  }
  return hand_space(std::move(features), std::move(weights),
                    std::move(contexts), window(rng));
}

}  // namespace

TEST_CASE("map_document reproduces the worked window example") {
  // Feature "pattern" with weight 0.5 and contexts internalizing/fitful.
  SemanticSpace space = hand_space(
      {"pattern"}, {0.5},
      {{{"internalizing", 0.8}, {"fitful", 0.7}}});
  std::vector<std::string> tokens = {"sleep", "internalizing", "pattern",
                                     "fitful", "behavior"};
  FeatureVector fv = map_document(tokens, space, "d");
  REQUIRE(fv.values.size() == 1);
  CHECK(fv.values[0] == doctest::Approx((0.8 + 0.7) * 0.5).epsilon(1e-12));
}

TEST_CASE("map_document counts every occurrence pair") {
  SemanticSpace space = hand_space({"f"}, {0.5}, {{{"c", 0.8}}});
  // Two occurrences of f, each with one in-window occurrence of c.
  std::vector<std::string> tokens = {"f", "c", "x", "x", "x", "x",
                                     "x", "x", "c", "f"};
  FeatureVector fv = map_document(tokens, space, "d");
  CHECK(fv.values[0] == doctest::Approx(2 * 0.8 * 0.5).epsilon(1e-12));
}

TEST_CASE("map_document zero cases") {
  SemanticSpace space = hand_space({"f"}, {1.0}, {{{"c", 0.9}}});
  SUBCASE("document without the feature is all zero") {
    FeatureVector fv = map_document({"a", "b", "c"}, space, "d");
    CHECK(fv.values == std::vector<double>{0.0});
  }
  SUBCASE("empty token list") {
    FeatureVector fv = map_document({}, space, "d");
    CHECK(fv.values == std::vector<double>{0.0});
  }
  SUBCASE("feature present but no context in window") {
    FeatureVector fv = map_document({"f", "x", "y"}, space, "d");
    CHECK(fv.values == std::vector<double>{0.0});
  }
}

TEST_CASE("map_document equals the enumeration oracle exactly") {
  std::mt19937_64 rng(101);
  const auto pool = test::word_pool(25);
  for (int iter = 0; iter < 100; ++iter) {
    SemanticSpace space = random_space(rng, pool);
    const auto tokens = random_tokens(rng, pool, 60);
    FeatureVector fv = map_document(tokens, space, "d");
    const auto expected = oracle_map(tokens, space);
    REQUIRE(fv.values.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i)
      CHECK(fv.values[i] == expected[i]);  // same summation order: exact
  }
}

TEST_CASE("edits outside every feature window leave the value unchanged") {
  std::mt19937_64 rng(102);
  const auto pool = test::word_pool(25);
  SemanticSpace space = hand_space({"f"}, {0.7},
                                   {{{"c", 0.6}, {"d", -0.4}}}, 3);
  for (int iter = 0; iter < 50; ++iter) {
    std::vector<std::string> tokens = random_tokens(rng, pool, 40);
    tokens.push_back("f");  // occurrence at the end
    for (auto& t : tokens)
      if (t == "f" && &t != &tokens.back()) t = "x";
    FeatureVector before = map_document(tokens, space, "d");
    // Mutate a position more than `window` away from the occurrence.
    if (tokens.size() > 5) {
      tokens[0] = "c";
      tokens[1] = "d";
      FeatureVector after = map_document(tokens, space, "d");
      CHECK(after.values[0] == before.values[0]);
    }
  }
}

TEST_CASE("mapping is additive across a neutral gap") {
  SemanticSpace space = hand_space({"f", "g"}, {0.5, 1.5},
                                   {{{"c", 0.8}}, {{"d", 0.3}}}, 5);
  std::vector<std::string> doc1 = {"f", "c", "d", "g"};
  std::vector<std::string> doc2 = {"g", "d", "x", "f", "c", "c"};
  std::vector<std::string> joined = doc1;
  for (int i = 0; i < 10; ++i) joined.push_back("pad");  // 2 * window
  joined.insert(joined.end(), doc2.begin(), doc2.end());

  FeatureVector a = map_document(doc1, space, "a");
  FeatureVector b = map_document(doc2, space, "b");
  FeatureVector ab = map_document(joined, space, "ab");
  for (std::size_t i = 0; i < ab.values.size(); ++i)
    CHECK(ab.values[i] == doctest::Approx(a.values[i] + b.values[i])
                              .epsilon(1e-12));
}

TEST_CASE("build_semantic_space drops missing features with a record") {
  EmbeddingMatrix emb;
  emb.dim = 2;
  emb.words = {"flag", "overdose", "risk"};
  emb.vocab = {{"flag", 0}, {"overdose", 1}, {"risk", 2}};
  emb.vectors = {1.0, 0.1, 0.9, 0.2, 0.0, 1.0};

  FeatureSet features;
  features.features = {{"flag", 0.9}, {"ghost", 0.8}, {"overdose", 0.7}};
  SemanticSpace space = build_semantic_space(features, emb, 2, 5);
  CHECK(space.features == std::vector<std::string>{"flag", "overdose"});
  CHECK(space.dropped == std::vector<std::string>{"ghost"});
  CHECK(space.contexts[0].neighbors.size() == 2);

  SUBCASE("empty feature set is an error") {
    FeatureSet empty;
    CHECK_THROWS_AS(build_semantic_space(empty, emb, 2, 5), DataError);
  }
  SUBCASE("all features missing is an error") {
    FeatureSet ghosts;
    ghosts.features = {{"ghost", 0.8}, {"phantom", 0.1}};
    CHECK_THROWS_AS(build_semantic_space(ghosts, emb, 2, 5), DataError);
  }
}

TEST_CASE("map_corpus is identical across thread counts") {
  std::mt19937_64 rng(103);
  const auto pool = test::word_pool(25);
  SemanticSpace space = random_space(rng, pool);
  std::vector<std::vector<std::string>> docs;
  for (int i = 0; i < 50; ++i) docs.push_back(random_tokens(rng, pool, 60));
  Corpus corpus = test::make_corpus("par", std::move(docs));

  auto serial = map_corpus(corpus, space, 1);
  auto parallel = map_corpus(corpus, space, 8);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].doc_id == parallel[i].doc_id);
    CHECK(serial[i].values == parallel[i].values);
  }
}
