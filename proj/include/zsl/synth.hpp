#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "zsl/document.hpp"

namespace zsl {

// Synthetic four-corpus benchmark: two weakly-labeled training corpora and
// two test corpora with ground truth.
//
// Background text is topic-structured: the vocabulary is cut into topic
// blocks and every document draws most tokens from its own topic, the rest
// globally. Flat unstructured backgrounds give skip-gram a collapsed
// geometry (all vectors near-parallel), which starves the semantic space of
// usable neighborhoods; topical structure is also what real note corpora
// look like.
//
// Each positive document is about one signal term (its "event concept"):
// the term is planted signal_density times on average, each time with one
// of its designated context words a few tokens away. Negative documents
// never contain signal terms. The base token appears in every positive
// training document and, at confounder_rate, in negative documents, so
// keyword presence alone is non-discriminative on the test sets.
struct SynthConfig {
  std::uint64_t seed = 42;
  std::size_t train_pos_docs = 2000;
  std::size_t train_neg_docs = 2000;
  std::size_t test_pos_docs = 500;
  std::size_t test_neg_docs = 500;
  std::size_t doc_len_min = 40;
  std::size_t doc_len_max = 80;
  std::size_t shared_vocab_size = 1200;
  std::size_t topics = 24;
  double topic_mix = 0.85;  // fraction of tokens drawn from the home topic
  std::size_t signal_terms = 150;
  std::size_t context_terms_per_signal = 5;
  double signal_density = 3.0;     // expected planted events per positive doc
  std::size_t signal_gap_max = 4;  // context placed 1..gap_max tokens away
  double confounder_rate = 0.5;    // base-token rate in negative documents
  std::string base_token = "suicidal";
  double zipf_exponent = 0.5;      // within-topic frequency profile
};

enum class SynthRole { TrainPos, TrainNeg, TestPos, TestNeg };

struct SynthCorpora {
  Corpus train_pos, train_neg, test_pos, test_neg;
};

// Deterministic per seed: documents are generated in parallel from
// per-document derived seeds, so output is identical for any thread count.
SynthCorpora generate_labeled_corpora(const SynthConfig& config,
                                      int threads = 1);

struct CorpusAudit {
  std::string corpus_name;
  std::size_t n_docs = 0;
  std::size_t realized_signal_events = 0;
  double mean_signal_events_per_doc = 0.0;
  double expected_signal_events = 0.0;
  double signal_tolerance = 0.0;  // 3 sigma on the mean
  bool signal_within_3sigma = true;
  double base_token_doc_rate = 0.0;
  double expected_base_rate = 0.0;
  double base_rate_tolerance = 0.0;  // 3 sigma
  bool base_within_3sigma = true;
  double vocab_coverage = 0.0;  // distinct background words seen / vocab size
};

// Recounts planted structure directly from the documents and verifies the
// realized rates against the configured expectations.
CorpusAudit audit_corpus(const Corpus& corpus, const SynthConfig& config,
                         SynthRole role);

// Expected base-token document rate for each corpus role.
double expected_base_rate(const SynthConfig& config, SynthRole role);

// Vocabulary helpers (also used by audits and tests).
std::string background_word(std::size_t index);  // index in [0, vocab)
std::string signal_word(std::size_t index);
std::size_t home_topic(const SynthConfig& config, std::size_t signal_index);
// Designated context words of one signal term under this config; all come
// from the frequent half of the term's home-topic block.
std::vector<std::string> designated_contexts(const SynthConfig& config,
                                             std::size_t signal_index);

}  // namespace zsl
