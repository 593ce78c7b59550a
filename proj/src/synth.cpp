#include "zsl/synth.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include <omp.h>

#include "zsl/error.hpp"
#include "zsl/rng.hpp"

namespace zsl {

namespace {

std::string base26(std::size_t value, std::size_t width) {
  std::string s(width, 'a');
  for (std::size_t i = width; i-- > 0;) {
    s[i] = static_cast<char>('a' + value % 26);
    value /= 26;
  }
  return s;
}

const char* role_tag(SynthRole role) {
  switch (role) {
    case SynthRole::TrainPos: return "trp";
    case SynthRole::TrainNeg: return "trn";
    case SynthRole::TestPos: return "tsp";
    case SynthRole::TestNeg: return "tsn";
  }
  return "unk";
}

bool is_positive_role(SynthRole role) {
  return role == SynthRole::TrainPos || role == SynthRole::TestPos;
}

std::size_t words_per_topic(const SynthConfig& cfg) {
  return cfg.shared_vocab_size / cfg.topics;
}

void validate(const SynthConfig& cfg) {
  if (cfg.train_pos_docs == 0 || cfg.train_neg_docs == 0 ||
      cfg.test_pos_docs == 0 || cfg.test_neg_docs == 0)
    throw UsageError("synth: corpus sizes must be >= 1");
  if (cfg.doc_len_min < 2 || cfg.doc_len_max < cfg.doc_len_min)
    throw UsageError("synth: invalid document length range");
  if (cfg.doc_len_min <= cfg.signal_gap_max + 1)
    throw UsageError("synth: doc_len_min must exceed signal_gap_max + 1");
  if (cfg.topics == 0) throw UsageError("synth: topics must be >= 1");
  if (cfg.shared_vocab_size < 2 * cfg.topics)
    throw UsageError("synth: shared_vocab_size too small for the topic count");
  if (cfg.signal_terms == 0 || cfg.context_terms_per_signal == 0)
    throw UsageError("synth: signal and context term counts must be >= 1");
  if (cfg.signal_density < 0.0 || cfg.confounder_rate < 0.0 ||
      cfg.confounder_rate > 1.0 || cfg.topic_mix < 0.0 || cfg.topic_mix > 1.0)
    throw UsageError("synth: rates out of range");
  if (cfg.signal_gap_max == 0)
    throw UsageError("synth: signal_gap_max must be >= 1");
  const std::size_t band = (words_per_topic(cfg) + 1) / 2;
  if (cfg.context_terms_per_signal > band)
    throw UsageError(
        "synth: context terms per signal exceed the frequent half of a "
        "topic block");
  if (cfg.base_token.empty())
    throw UsageError("synth: base_token must be non-empty");
}

struct Generator {
  const SynthConfig& cfg;
  std::size_t wpt;
  std::vector<double> zipf_cdf;              // within one topic block
  std::vector<std::vector<std::size_t>> ctx_of;  // signal -> vocab indices

  explicit Generator(const SynthConfig& config)
      : cfg(config), wpt(words_per_topic(config)) {
    zipf_cdf.resize(wpt);
    double acc = 0.0;
    for (std::size_t r = 0; r < wpt; ++r) {
      acc += std::pow(static_cast<double>(r + 1), -cfg.zipf_exponent);
      zipf_cdf[r] = acc;
    }
    // Designated context words: a seeded draw from the frequent half of the
    // signal term's home block.
    const std::size_t band = (wpt + 1) / 2;
    ctx_of.resize(cfg.signal_terms);
    for (std::size_t s = 0; s < cfg.signal_terms; ++s) {
      std::vector<std::size_t> ranks(band);
      for (std::size_t i = 0; i < band; ++i) ranks[i] = i;
      Rng rng = make_rng(cfg.seed, "synth-ctx-assign", s);
      std::shuffle(ranks.begin(), ranks.end(), rng);
      const std::size_t topic = home_topic(cfg, s);
      for (std::size_t c = 0; c < cfg.context_terms_per_signal; ++c)
        ctx_of[s].push_back(topic * wpt + ranks[c]);
    }
  }

  std::size_t sample_block_rank(Rng& rng) const {
    std::uniform_real_distribution<double> uni(0.0, zipf_cdf.back());
    auto it = std::upper_bound(zipf_cdf.begin(), zipf_cdf.end(), uni(rng));
    if (it == zipf_cdf.end()) --it;
    return static_cast<std::size_t>(it - zipf_cdf.begin());
  }

  std::string sample_background(std::size_t doc_topic, Rng& rng) const {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::size_t topic = doc_topic;
    if (uni(rng) >= cfg.topic_mix) {
      std::uniform_int_distribution<std::size_t> any(0, cfg.topics - 1);
      topic = any(rng);
    }
    return background_word(topic * wpt + sample_block_rank(rng));
  }

  Document make_document(SynthRole role, std::size_t index) const {
    Rng rng = make_rng(cfg.seed, role_tag(role), index);
    std::uniform_int_distribution<std::size_t> len_dist(cfg.doc_len_min,
                                                        cfg.doc_len_max);
    const std::size_t len = len_dist(rng);

    // Positive documents are about one signal concept; its home topic is
    // the document topic. Negative documents get a uniform topic.
    std::size_t doc_topic;
    std::size_t signal = 0;
    bool has_signal_concept = false;
    if (is_positive_role(role)) {
      std::uniform_int_distribution<std::size_t> sig_dist(
          0, cfg.signal_terms - 1);
      signal = sig_dist(rng);
      doc_topic = home_topic(cfg, signal);
      has_signal_concept = true;
    } else {
      std::uniform_int_distribution<std::size_t> any(0, cfg.topics - 1);
      doc_topic = any(rng);
    }

    std::vector<std::string> tokens(len);
    for (auto& t : tokens) t = sample_background(doc_topic, rng);
    std::vector<bool> planted(len, false);

    if (has_signal_concept && cfg.signal_density > 0.0) {
      std::poisson_distribution<int> events_dist(cfg.signal_density);
      const int events = events_dist(rng);
      std::uniform_int_distribution<std::size_t> ctx_dist(
          0, cfg.context_terms_per_signal - 1);
      std::uniform_int_distribution<std::size_t> gap_dist(1,
                                                          cfg.signal_gap_max);
      std::uniform_int_distribution<int> dir_dist(0, 1);
      std::uniform_int_distribution<std::size_t> pos_dist(
          cfg.signal_gap_max, len - 1 - cfg.signal_gap_max);
      for (int e = 0; e < events; ++e) {
        const std::size_t c = ctx_of[signal][ctx_dist(rng)];
        const std::size_t gap = gap_dist(rng);
        const bool ctx_after = dir_dist(rng) == 1;
        for (int attempt = 0; attempt < 10; ++attempt) {
          const std::size_t p = pos_dist(rng);
          const std::size_t q = ctx_after ? p + gap : p - gap;
          if (planted[p] || planted[q]) continue;
          tokens[p] = signal_word(signal);
          tokens[q] = background_word(c);
          planted[p] = planted[q] = true;
          break;
        }
      }
    }

    std::uniform_real_distribution<double> uni(0.0, 1.0);
    if (uni(rng) < expected_base_rate(cfg, role)) {
      std::uniform_int_distribution<std::size_t> pos_dist(0, len - 1);
      bool placed = false;
      for (int attempt = 0; attempt < 20 && !placed; ++attempt) {
        const std::size_t p = pos_dist(rng);
        if (planted[p]) continue;
        tokens[p] = cfg.base_token;
        planted[p] = true;
        placed = true;
      }
      for (std::size_t p = 0; p < len && !placed; ++p) {
        if (planted[p]) continue;
        tokens[p] = cfg.base_token;
        planted[p] = true;
        placed = true;
      }
    }

    Document doc;
    doc.id = std::string(role_tag(role)) + "-" + base26(index, 5);
    doc.weak_label = is_positive_role(role) ? 1 : 0;
    doc.tokens = std::move(tokens);
    std::string text;
    for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
      if (i > 0) text += ' ';
      text += doc.tokens[i];
    }
    doc.text = std::move(text);
    return doc;
  }
};

Corpus make_corpus(const Generator& gen, SynthRole role, std::size_t n_docs,
                   int threads) {
  Corpus corpus;
  corpus.name = role_tag(role);
  corpus.label = is_positive_role(role) ? 1 : 0;
  corpus.documents.resize(n_docs);
#pragma omp parallel for schedule(dynamic, 32) num_threads(std::max(1, threads))
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(n_docs); ++i) {
    corpus.documents[static_cast<std::size_t>(i)] =
        gen.make_document(role, static_cast<std::size_t>(i));
  }
  return corpus;
}

}  // namespace

std::string background_word(std::size_t index) {
  return "bg" + base26(index, 4);
}

std::string signal_word(std::size_t index) {
  return "sig" + base26(index, 3);
}

std::size_t home_topic(const SynthConfig& config, std::size_t signal_index) {
  return signal_index % config.topics;
}

std::vector<std::string> designated_contexts(const SynthConfig& config,
                                             std::size_t signal_index) {
  validate(config);
  Generator gen(config);
  std::vector<std::string> words;
  for (std::size_t idx : gen.ctx_of.at(signal_index))
    words.push_back(background_word(idx));
  return words;
}

double expected_base_rate(const SynthConfig& config, SynthRole role) {
  switch (role) {
    case SynthRole::TrainPos:
      return 1.0;
    case SynthRole::TestPos:
      // Close to the negative rate so keyword presence cannot separate the
      // test sets on its own.
      return std::min(1.0, config.confounder_rate + 0.1);
    case SynthRole::TrainNeg:
    case SynthRole::TestNeg:
      return config.confounder_rate;
  }
  return 0.0;
}

SynthCorpora generate_labeled_corpora(const SynthConfig& config,
                                      int threads) {
  validate(config);
  Generator gen(config);
  SynthCorpora out;
  out.train_pos = make_corpus(gen, SynthRole::TrainPos,
                              config.train_pos_docs, threads);
  out.train_neg = make_corpus(gen, SynthRole::TrainNeg,
                              config.train_neg_docs, threads);
  out.test_pos =
      make_corpus(gen, SynthRole::TestPos, config.test_pos_docs, threads);
  out.test_neg =
      make_corpus(gen, SynthRole::TestNeg, config.test_neg_docs, threads);
  return out;
}

CorpusAudit audit_corpus(const Corpus& corpus, const SynthConfig& config,
                         SynthRole role) {
  validate(config);
  Generator gen(config);

  std::unordered_map<std::string, std::size_t> signal_index;
  for (std::size_t s = 0; s < config.signal_terms; ++s)
    signal_index.emplace(signal_word(s), s);
  std::vector<std::unordered_set<std::string>> ctx_words(config.signal_terms);
  for (std::size_t s = 0; s < config.signal_terms; ++s)
    for (std::size_t idx : gen.ctx_of[s])
      ctx_words[s].insert(background_word(idx));

  CorpusAudit audit;
  audit.corpus_name = corpus.name;
  audit.n_docs = corpus.documents.size();

  std::size_t events = 0;
  std::size_t base_docs = 0;
  std::unordered_set<std::string> seen_background;
  const std::size_t gap = config.signal_gap_max;
  for (const auto& doc : corpus.documents) {
    bool has_base = false;
    const auto& toks = doc.tokens;
    for (std::size_t i = 0; i < toks.size(); ++i) {
      if (toks[i] == config.base_token) has_base = true;
      if (toks[i].rfind("bg", 0) == 0) seen_background.insert(toks[i]);
      auto it = signal_index.find(toks[i]);
      if (it == signal_index.end()) continue;
      // One event per signal occurrence with a designated context word
      // within the placement distance.
      const auto& ctx = ctx_words[it->second];
      const std::size_t lo = i >= gap ? i - gap : 0;
      const std::size_t hi = std::min(toks.size() - 1, i + gap);
      for (std::size_t j = lo; j <= hi; ++j) {
        if (j == i) continue;
        if (ctx.count(toks[j])) {
          ++events;
          break;
        }
      }
    }
    if (has_base) ++base_docs;
  }

  const double n = static_cast<double>(audit.n_docs);
  audit.realized_signal_events = events;
  audit.mean_signal_events_per_doc = static_cast<double>(events) / n;
  audit.expected_signal_events =
      is_positive_role(role) ? config.signal_density : 0.0;
  audit.signal_tolerance =
      3.0 * std::sqrt(std::max(config.signal_density, 1e-9) / n);
  audit.signal_within_3sigma =
      std::abs(audit.mean_signal_events_per_doc -
               audit.expected_signal_events) <= audit.signal_tolerance;

  audit.base_token_doc_rate = static_cast<double>(base_docs) / n;
  audit.expected_base_rate = expected_base_rate(config, role);
  const double r = audit.expected_base_rate;
  audit.base_rate_tolerance =
      3.0 * std::sqrt(std::max(r * (1.0 - r), 1e-9) / n);
  audit.base_within_3sigma =
      std::abs(audit.base_token_doc_rate - r) <= audit.base_rate_tolerance;

  audit.vocab_coverage =
      static_cast<double>(seen_background.size()) /
      static_cast<double>(words_per_topic(config) * config.topics);
  return audit;
}

}  // namespace zsl
