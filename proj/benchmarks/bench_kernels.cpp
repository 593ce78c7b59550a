// Compares the serial and OpenMP paths of the corpus-level kernels:
// preprocessing, TF-IDF table construction, document mapping, prediction,
// and skip-gram training (whose threaded mode is the one non-bit-exact
// kernel). The bit-stable kernels are also checked for exact agreement
// between the two paths.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include <omp.h>

#include "zsl/embedding.hpp"
#include "zsl/mlp.hpp"
#include "zsl/space.hpp"
#include "zsl/synth.hpp"
#include "zsl/textprep.hpp"
#include "zsl/tfidf.hpp"

using namespace zsl;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Row {
  const char* kernel;
  double serial_s;
  double parallel_s;
  bool identical;
};

void print_table(const std::vector<Row>& rows, int threads) {
  std::printf("\n%-22s %12s %12s %9s %10s\n", "kernel", "serial(s)",
              (std::to_string(threads) + " threads(s)").c_str(), "speedup",
              "identical");
  for (const auto& r : rows) {
    std::printf("%-22s %12.3f %12.3f %8.2fx %10s\n", r.kernel, r.serial_s,
                r.parallel_s, r.serial_s / r.parallel_s,
                r.identical ? "yes" : "n/a");
  }
}

}  // namespace

int main(int argc, char** argv) {
  const int threads = argc > 1 ? std::atoi(argv[1]) : omp_get_max_threads();
  std::printf("generating benchmark corpus...\n");

  SynthConfig synth;
  synth.train_pos_docs = 4000;
  synth.train_neg_docs = 4000;
  synth.test_pos_docs = 1000;
  synth.test_neg_docs = 1000;
  SynthCorpora corpora = generate_labeled_corpora(synth, threads);

  std::vector<Row> rows;

  {
    Corpus serial_corpus = corpora.train_pos;
    Corpus parallel_corpus = corpora.train_pos;
    auto t0 = Clock::now();
    preprocess_corpus(serial_corpus, std::nullopt, 4, 1);
    const double ts = seconds_since(t0);
    t0 = Clock::now();
    preprocess_corpus(parallel_corpus, std::nullopt, 4, threads);
    const double tp = seconds_since(t0);
    bool same = true;
    for (std::size_t i = 0; i < serial_corpus.size(); ++i)
      same &= serial_corpus.documents[i].tokens ==
              parallel_corpus.documents[i].tokens;
    rows.push_back({"preprocess", ts, tp, same});
    corpora.train_pos = std::move(serial_corpus);
  }
  preprocess_corpus(corpora.train_neg, std::nullopt, 4, threads);
  preprocess_corpus(corpora.test_pos, std::nullopt, 4, threads);

  TfidfTable table_serial, table_parallel;
  {
    auto t0 = Clock::now();
    table_serial =
        build_tfidf_table(corpora.train_pos, TfidfMean::ContainingDocs, 1);
    const double ts = seconds_since(t0);
    t0 = Clock::now();
    table_parallel = build_tfidf_table(corpora.train_pos,
                                       TfidfMean::ContainingDocs, threads);
    const double tp = seconds_since(t0);
    bool same = table_serial.mean_tfidf == table_parallel.mean_tfidf &&
                table_serial.df == table_parallel.df;
    rows.push_back({"tfidf table", ts, tp, same});
  }

  // A small embedding gives the mapping kernel a realistic space.
  SkipgramConfig sg;
  sg.dim = 50;
  sg.epochs = 2;
  sg.seed = 9;
  EmbeddingMatrix serial_emb, parallel_emb;
  {
    auto t0 = Clock::now();
    sg.threads = 1;
    serial_emb = train_skipgram(corpora.train_pos, sg);
    const double ts = seconds_since(t0);
    t0 = Clock::now();
    sg.threads = threads;
    parallel_emb = train_skipgram(corpora.train_pos, sg);
    const double tp = seconds_since(t0);
    // The threaded mode trades bit-exactness for speed, so no equality
    // column here; epoch losses must still be in the same ballpark.
    std::printf("skip-gram epoch-2 loss: serial %.4f, %d threads %.4f\n",
                serial_emb.epoch_loss.back(), threads,
                parallel_emb.epoch_loss.back());
    rows.push_back({"skip-gram (hogwild)", ts, tp, false});
  }

  {
    TfidfTable neg_table =
        build_tfidf_table(corpora.train_neg, TfidfMean::ContainingDocs,
                          threads);
    FeatureSet features = select_features(
        top_n_entries(table_parallel, 1000), top_n_terms(neg_table, 1000));
    SemanticSpace space = build_semantic_space(features, serial_emb, 50, 5);

    auto t0 = Clock::now();
    auto serial_vecs = map_corpus(corpora.train_pos, space, 1);
    const double ts = seconds_since(t0);
    t0 = Clock::now();
    auto parallel_vecs = map_corpus(corpora.train_pos, space, threads);
    const double tp = seconds_since(t0);
    bool same = serial_vecs.size() == parallel_vecs.size();
    for (std::size_t i = 0; same && i < serial_vecs.size(); ++i)
      same &= serial_vecs[i].values == parallel_vecs[i].values;
    rows.push_back({"semantic-space map", ts, tp, same});

    MlpModel model = init_model(space.size(), 77);
    auto t1 = Clock::now();
    auto serial_probs = predict(model, serial_vecs, 1);
    const double ps = seconds_since(t1);
    t1 = Clock::now();
    auto parallel_probs = predict(model, serial_vecs, threads);
    const double pp = seconds_since(t1);
    rows.push_back({"predict", ps, pp, serial_probs == parallel_probs});
  }

  print_table(rows, threads);
  return 0;
}
