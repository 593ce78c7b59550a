#include "zsl/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <omp.h>

#include "zsl/error.hpp"
#include "zsl/rng.hpp"

namespace zsl {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct VocabBuild {
  std::vector<std::string> words;
  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::size_t> counts;
  std::vector<std::vector<int>> docs;  // documents as vocab indices
  std::size_t total_tokens = 0;        // in-vocab token occurrences
};

VocabBuild build_vocab(const Corpus& corpus, int min_count) {
  if (corpus.documents.empty())
    throw DataError("train_skipgram: corpus is empty");
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& doc : corpus.documents)
    for (const auto& tok : doc.tokens) ++counts[tok];

  std::vector<std::pair<std::string, std::size_t>> kept;
  for (const auto& [w, c] : counts)
    if (c >= static_cast<std::size_t>(min_count)) kept.emplace_back(w, c);
  if (kept.empty())
    throw DataError("train_skipgram: vocabulary empty after min_count=" +
                    std::to_string(min_count) + " filtering");
  // Frequency-descending, word-ascending: a deterministic row order.
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  VocabBuild v;
  v.words.reserve(kept.size());
  v.counts.reserve(kept.size());
  for (auto& [w, c] : kept) {
    v.index.emplace(w, v.words.size());
    v.words.push_back(std::move(w));
    v.counts.push_back(c);
  }
  v.docs.reserve(corpus.documents.size());
  for (const auto& doc : corpus.documents) {
    std::vector<int> ids;
    ids.reserve(doc.tokens.size());
    for (const auto& tok : doc.tokens) {
      auto it = v.index.find(tok);
      if (it != v.index.end()) ids.push_back(static_cast<int>(it->second));
    }
    v.total_tokens += ids.size();
    v.docs.push_back(std::move(ids));
  }
  return v;
}

// Cumulative unigram^(3/4) weights for negative sampling by binary search.
std::vector<double> noise_cdf(const std::vector<std::size_t>& counts) {
  std::vector<double> cdf(counts.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    acc += std::pow(static_cast<double>(counts[i]), 0.75);
    cdf[i] = acc;
  }
  return cdf;
}

inline int sample_noise(const std::vector<double>& cdf, Rng& rng) {
  std::uniform_real_distribution<double> uni(0.0, cdf.back());
  auto it = std::upper_bound(cdf.begin(), cdf.end(), uni(rng));
  if (it == cdf.end()) --it;
  return static_cast<int>(it - cdf.begin());
}

struct EpochStats {
  double loss_sum = 0.0;
  std::size_t pairs = 0;
};

// Processes one document: for every (center, context) pair within the
// window, one positive update and `negatives` noise updates.
void train_document(const std::vector<int>& doc, std::vector<double>& in,
                    std::vector<double>& out, const SkipgramConfig& cfg,
                    const std::vector<double>& cdf,
                    const std::vector<std::size_t>& counts,
                    std::size_t total_tokens, double& lr_progress,
                    double lr_step, Rng& rng, EpochStats& stats) {
  const std::size_t dim = static_cast<std::size_t>(cfg.dim);
  std::vector<double> grad_in(dim);
  std::vector<int> kept;
  const std::vector<int>* seq = &doc;
  if (cfg.subsample > 0.0) {
    kept.reserve(doc.size());
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int id : doc) {
      double f = static_cast<double>(counts[static_cast<std::size_t>(id)]);
      double thr = cfg.subsample * static_cast<double>(total_tokens);
      double keep = (std::sqrt(f / thr) + 1.0) * thr / f;
      if (keep >= 1.0 || uni(rng) < keep) kept.push_back(id);
    }
    seq = &kept;
  }
  const auto& s = *seq;
  const int n = static_cast<int>(s.size());
  for (int i = 0; i < n; ++i) {
    const double lr = lr_progress;
    lr_progress = std::max(cfg.lr_end, lr_progress - lr_step);
    const int center = s[static_cast<std::size_t>(i)];
    double* u = in.data() + static_cast<std::size_t>(center) * dim;
    const int lo = std::max(0, i - cfg.window);
    const int hi = std::min(n - 1, i + cfg.window);
    for (int j = lo; j <= hi; ++j) {
      if (j == i) continue;
      const int target = s[static_cast<std::size_t>(j)];
      std::fill(grad_in.begin(), grad_in.end(), 0.0);
      double pair_loss = 0.0;
      for (int k = 0; k <= cfg.negatives; ++k) {
        int word;
        double label;
        if (k == 0) {
          word = target;
          label = 1.0;
        } else {
          word = sample_noise(cdf, rng);
          if (word == target) continue;
          label = 0.0;
        }
        double* v = out.data() + static_cast<std::size_t>(word) * dim;
        double f = 0.0;
        for (std::size_t d = 0; d < dim; ++d) f += u[d] * v[d];
        const double p = sigmoid(f);
        const double g = (label - p) * lr;
        for (std::size_t d = 0; d < dim; ++d) {
          grad_in[d] += g * v[d];
          v[d] += g * u[d];
        }
        pair_loss += label > 0.5 ? -std::log(std::max(p, 1e-12))
                                 : -std::log(std::max(1.0 - p, 1e-12));
      }
      for (std::size_t d = 0; d < dim; ++d) u[d] += grad_in[d];
      stats.loss_sum += pair_loss;
      ++stats.pairs;
    }
  }
}

}  // namespace

EmbeddingMatrix train_skipgram(const Corpus& corpus,
                               const SkipgramConfig& cfg) {
  if (cfg.dim < 2) throw UsageError("train_skipgram: dim must be >= 2");
  if (cfg.epochs < 1) throw UsageError("train_skipgram: epochs must be >= 1");
  if (cfg.window < 1) throw UsageError("train_skipgram: window must be >= 1");

  VocabBuild v = build_vocab(corpus, cfg.min_count);
  const std::size_t dim = static_cast<std::size_t>(cfg.dim);
  const std::size_t rows = v.words.size();

  std::vector<double> in(rows * dim);
  std::vector<double> out(rows * dim, 0.0);
  {
    Rng rng = make_rng(cfg.seed, "skipgram-init");
    std::uniform_real_distribution<double> uni(-0.5 / cfg.dim, 0.5 / cfg.dim);
    for (auto& x : in) x = uni(rng);
  }

  const std::vector<double> cdf = noise_cdf(v.counts);
  const double total_units =
      static_cast<double>(v.total_tokens) * cfg.epochs;
  const double lr_step =
      total_units > 0 ? (cfg.lr_start - cfg.lr_end) / total_units : 0.0;

  EmbeddingMatrix emb;
  emb.dim = cfg.dim;
  emb.min_count = cfg.min_count;
  emb.seed = cfg.seed;
  emb.config = cfg;
  emb.words = v.words;
  emb.vocab = v.index;

  double lr_progress = cfg.lr_start;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    EpochStats stats;
    if (cfg.threads <= 1) {
      Rng rng = make_rng(cfg.seed, "skipgram-epoch",
                         static_cast<std::uint64_t>(epoch));
      for (const auto& doc : v.docs)
        train_document(doc, in, out, cfg, cdf, v.counts, v.total_tokens,
                       lr_progress, lr_step, rng, stats);
    } else {
      // Lock-free shared updates across documents. Fast, but not
      // bit-reproducible; deterministic runs use threads == 1.
      const std::int64_t ndocs = static_cast<std::int64_t>(v.docs.size());
      double loss_sum = 0.0;
      std::int64_t pairs = 0;
      const double epoch_start_lr = lr_progress;
#pragma omp parallel for schedule(dynamic, 8) num_threads(cfg.threads) \
    reduction(+ : loss_sum, pairs)
      for (std::int64_t d = 0; d < ndocs; ++d) {
        EpochStats local;
        Rng rng = make_rng(cfg.seed, "skipgram-doc",
                           static_cast<std::uint64_t>(epoch) * 1000003ULL +
                               static_cast<std::uint64_t>(d));
        double local_lr = epoch_start_lr;
        train_document(v.docs[static_cast<std::size_t>(d)], in, out, cfg, cdf,
                       v.counts, v.total_tokens, local_lr, lr_step, rng,
                       local);
        loss_sum += local.loss_sum;
        pairs += local.pairs;
      }
      stats.loss_sum = loss_sum;
      stats.pairs = static_cast<std::size_t>(pairs);
      lr_progress = std::max(
          cfg.lr_end, epoch_start_lr - lr_step * static_cast<double>(
                                           v.total_tokens));
    }
    emb.epoch_loss.push_back(
        stats.pairs > 0 ? stats.loss_sum / static_cast<double>(stats.pairs)
                        : 0.0);
  }

  for (double x : in)
    if (!std::isfinite(x))
      throw NumericError("train_skipgram: non-finite embedding entry");
  emb.vectors = std::move(in);
  return emb;
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size())
    throw DataError("cosine_similarity: dimension mismatch (" +
                    std::to_string(u.size()) + " vs " +
                    std::to_string(v.size()) + ")");
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0)
    throw NumericError("cosine_similarity: zero-norm input");
  double c = dot / (std::sqrt(nu) * std::sqrt(nv));
  return std::clamp(c, -1.0, 1.0);
}

ContextSet top_context_words(const std::string& feature,
                             const EmbeddingMatrix& emb, std::size_t m) {
  if (m == 0) throw UsageError("top_context_words: m must be >= 1");
  auto it = emb.vocab.find(feature);
  if (it == emb.vocab.end())
    throw DataError("top_context_words: feature \"" + feature +
                    "\" not in embedding vocabulary");
  const std::size_t self = it->second;
  const auto u = emb.row(self);

  std::vector<std::pair<std::string, double>> sims;
  sims.reserve(emb.size() - 1);
  for (std::size_t r = 0; r < emb.size(); ++r) {
    if (r == self) continue;
    sims.emplace_back(emb.words[r], cosine_similarity(u, emb.row(r)));
  }
  std::sort(sims.begin(), sims.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (sims.size() > m) sims.resize(m);
  return ContextSet{feature, std::move(sims)};
}

}  // namespace zsl
