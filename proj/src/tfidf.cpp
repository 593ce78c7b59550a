#include "zsl/tfidf.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include <omp.h>

#include "zsl/error.hpp"

namespace zsl {

double tfidf_weight(const std::string& term, const Document& doc,
                    const TfidfTable& table) {
  if (doc.tokens.empty())
    throw DataError("tfidf_weight: document \"" + doc.id +
                    "\" is empty; relative frequency undefined");
  std::size_t count = 0;
  for (const auto& tok : doc.tokens)
    if (tok == term) ++count;
  if (count == 0) return 0.0;
  auto it = table.df.find(term);
  if (it == table.df.end())
    throw DataError("tfidf_weight: term \"" + term +
                    "\" not in table for corpus " + table.corpus_name);
  double tf = static_cast<double>(count) /
              static_cast<double>(doc.tokens.size());
  return tf * std::log(static_cast<double>(table.n_docs) /
                       static_cast<double>(it->second));
}

TfidfTable build_tfidf_table(const Corpus& corpus, TfidfMean mode,
                             int threads) {
  const std::size_t n = corpus.documents.size();
  if (n == 0) throw DataError("build_tfidf_table: corpus is empty");

  std::string empty_ids;
  for (const auto& doc : corpus.documents) {
    if (doc.tokens.empty()) {
      if (!empty_ids.empty()) empty_ids += ", ";
      empty_ids += doc.id;
    }
  }
  if (!empty_ids.empty())
    throw DataError("build_tfidf_table: empty documents: " + empty_ids);

  // Parallel map: per-document term counts. The reduce below walks documents
  // in order, so the result does not depend on the thread count.
  std::vector<std::unordered_map<std::string, std::size_t>> counts(n);
#pragma omp parallel for schedule(dynamic, 16) num_threads(std::max(1, threads))
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
    auto& m = counts[static_cast<std::size_t>(i)];
    for (const auto& tok : corpus.documents[static_cast<std::size_t>(i)].tokens)
      ++m[tok];
  }

  TfidfTable table;
  table.corpus_name = corpus.name;
  table.n_docs = n;
  table.mean_mode = mode;
  for (const auto& m : counts)
    for (const auto& [term, c] : m) ++table.df[term];

  // Second pass accumulates per-document TF-IDF values in document order.
  std::unordered_map<std::string, double> sums;
  sums.reserve(table.df.size());
  const double dn = static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double len =
        static_cast<double>(corpus.documents[i].tokens.size());
    for (const auto& [term, c] : counts[i]) {
      double tf = static_cast<double>(c) / len;
      sums[term] += tf * std::log(dn / static_cast<double>(table.df[term]));
    }
  }
  for (const auto& [term, sum] : sums) {
    double denom = mode == TfidfMean::ContainingDocs
                       ? static_cast<double>(table.df[term])
                       : dn;
    table.mean_tfidf[term] = sum / denom;
  }
  return table;
}

std::vector<std::pair<std::string, double>> top_n_entries(
    const TfidfTable& table, std::size_t n) {
  if (n == 0) throw UsageError("top_n_entries: n must be >= 1");
  std::vector<std::pair<std::string, double>> entries(
      table.mean_tfidf.begin(), table.mean_tfidf.end());
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (entries.size() > n) entries.resize(n);
  return entries;
}

std::vector<std::string> top_n_terms(const TfidfTable& table, std::size_t n) {
  auto entries = top_n_entries(table, n);
  std::vector<std::string> words;
  words.reserve(entries.size());
  for (auto& [w, s] : entries) words.push_back(std::move(w));
  return words;
}

FeatureSet select_features(
    const std::vector<std::pair<std::string, double>>& top_pos,
    const std::vector<std::string>& top_neg) {
  std::unordered_set<std::string> neg(top_neg.begin(), top_neg.end());
  FeatureSet fs;
  fs.n_requested = top_pos.size();
  for (const auto& [word, score] : top_pos) {
    if (!neg.count(word)) fs.features.emplace_back(word, score);
  }
  if (fs.features.empty())
    throw DataError(
        "select_features: no features left after excluding the negative "
        "corpus's top terms");
  return fs;
}

}  // namespace zsl
