// zslc: train and apply contextual zero-shot document classifiers.
//
// Subcommands cover the individual pipeline stages (prep, features, embed,
// space, map, train, classify, eval, triage, baseline-features,
// baseline-map), the synthetic benchmark generator (synth), and the
// config-driven end-to-end runner (run).

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "zsl/artifacts.hpp"
#include "zsl/config.hpp"
#include "zsl/digest.hpp"
#include "zsl/error.hpp"
#include "zsl/pipeline.hpp"
#include "zsl/synth.hpp"
#include "zsl/textprep.hpp"
#include "zsl/version.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonOpts {
  std::uint64_t seed = 1;
  int threads = 1;
};

std::string replace_extension(const std::string& path,
                              const std::string& ext) {
  fs::path p(path);
  p.replace_extension(ext);
  return p.string();
}

void add_prep(CLI::App& app, const CommonOpts& common) {
  auto* cmd = app.add_subcommand("prep", "Tokenize and normalize a corpus");
  auto in = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  auto lexicon = std::make_shared<std::string>();
  auto min_len = std::make_shared<std::size_t>(4);
  cmd->add_option("--in", *in, "Input corpus (JSONL)")->required();
  cmd->add_option("--out", *out, "Output corpus with tokens")->required();
  cmd->add_option("--lexicon", *lexicon,
                  "Split-lexicon file (one word per line)");
  cmd->add_option("--min-lexicon-len", *min_len,
                  "Minimum word length for the default corpus lexicon");
  cmd->callback([=, &common] {
    zsl::Corpus corpus = zsl::load_corpus(*in);
    std::optional<zsl::SplitLexicon> lex;
    if (!lexicon->empty()) lex = zsl::SplitLexicon::from_file(*lexicon);
    zsl::preprocess_corpus(corpus, lex, *min_len, common.threads);
    zsl::save_corpus(corpus, *out);
    std::cerr << "prep: " << corpus.size() << " documents -> " << *out
              << "\n";
  });
}

void add_features(CLI::App& app, const CommonOpts& common) {
  auto* cmd = app.add_subcommand(
      "features", "Select feature words by mean TF-IDF set difference");
  auto pos = std::make_shared<std::string>();
  auto neg = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  auto n = std::make_shared<std::size_t>(1000);
  auto mean = std::make_shared<std::string>("containing");
  cmd->add_option("--pos", *pos, "Positive corpus (preprocessed)")
      ->required();
  cmd->add_option("--neg", *neg, "Negative corpus (preprocessed)")
      ->required();
  cmd->add_option("--n", *n, "Top-n cutoff per corpus");
  cmd->add_option("--mean", *mean,
                  "TF-IDF averaging: containing | all")
      ->check(CLI::IsMember({"containing", "all"}));
  cmd->add_option("--out", *out, "Feature file")->required();
  cmd->callback([=, &common] {
    zsl::Corpus cp = zsl::load_corpus(*pos, 1);
    zsl::Corpus cn = zsl::load_corpus(*neg, 0);
    const zsl::TfidfMean mode = *mean == "all"
                                    ? zsl::TfidfMean::AllDocs
                                    : zsl::TfidfMean::ContainingDocs;
    auto pos_table = zsl::build_tfidf_table(cp, mode, common.threads);
    auto neg_table = zsl::build_tfidf_table(cn, mode, common.threads);
    auto features = zsl::select_features(zsl::top_n_entries(pos_table, *n),
                                         zsl::top_n_terms(neg_table, *n));
    zsl::save_features(features, *out);
    std::cerr << "features: " << features.features.size() << " of top-" << *n
              << " retained -> " << *out << "\n";
  });
}

void add_embed(CLI::App& app, const CommonOpts& common) {
  auto* cmd = app.add_subcommand("embed", "Train skip-gram word embeddings");
  auto corpus = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  auto cfg = std::make_shared<zsl::SkipgramConfig>();
  cmd->add_option("--corpus", *corpus, "Training corpus (preprocessed)")
      ->required();
  cmd->add_option("--dim", cfg->dim, "Vector dimensionality");
  cmd->add_option("--window", cfg->window, "Context window per side");
  cmd->add_option("--epochs", cfg->epochs, "Training epochs");
  cmd->add_option("--negatives", cfg->negatives, "Negative samples per pair");
  cmd->add_option("--min-count", cfg->min_count, "Vocabulary frequency floor");
  cmd->add_option("--lr-start", cfg->lr_start, "Initial learning rate");
  cmd->add_option("--lr-end", cfg->lr_end, "Final learning rate");
  cmd->add_option("--subsample", cfg->subsample,
                  "Frequent-word subsampling threshold (0 = off)");
  cmd->add_option("--out", *out, "Embedding file")->required();
  cmd->callback([=, &common] {
    cfg->seed = common.seed;
    cfg->threads = common.threads;
    if (cfg->threads > 1)
      std::cerr << "embed: threads > 1 trades bit-exact reproducibility for "
                   "speed\n";
    zsl::Corpus c = zsl::load_corpus(*corpus);
    auto emb = zsl::train_skipgram(c, *cfg);
    zsl::save_embedding(emb, *out);
    std::cerr << "embed: |vocab|=" << emb.size() << " dim=" << emb.dim
              << " -> " << *out << "\n";
  });
}

void add_space(CLI::App& app, const CommonOpts&) {
  auto* cmd = app.add_subcommand(
      "space", "Assemble the semantic space from features and embeddings");
  auto features = std::make_shared<std::string>();
  auto emb = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  auto m = std::make_shared<std::size_t>(50);
  auto window = std::make_shared<int>(5);
  cmd->add_option("--features", *features, "Feature file")->required();
  cmd->add_option("--emb", *emb, "Embedding file")->required();
  cmd->add_option("--m", *m, "Context words per feature");
  cmd->add_option("--window", *window, "Mapping window per side");
  cmd->add_option("--out", *out, "Space file")->required();
  cmd->callback([=] {
    auto fs_ = zsl::load_features(*features);
    auto e = zsl::load_embedding(*emb);
    auto space = zsl::build_semantic_space(fs_, e, *m, *window);
    for (const auto& word : space.dropped)
      std::cerr << "space: warning: feature \"" << word
                << "\" absent from embedding vocabulary, dropped\n";
    zsl::save_space(space, *out);
    std::cerr << "space: " << space.size() << " features -> " << *out << "\n";
  });
}

void add_map(CLI::App& app, const CommonOpts& common) {
  auto* cmd =
      app.add_subcommand("map", "Map a corpus into the semantic space");
  auto space = std::make_shared<std::string>();
  auto corpus = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  cmd->add_option("--space", *space, "Space file")->required();
  cmd->add_option("--corpus", *corpus, "Corpus (preprocessed)")->required();
  cmd->add_option("--out", *out, "Vectors file")->required();
  cmd->callback([=, &common] {
    auto sp = zsl::load_space(*space);
    auto c = zsl::load_corpus(*corpus);
    auto vectors = zsl::map_corpus(c, sp, common.threads);
    zsl::save_vectors(vectors, *out);
    std::cerr << "map: " << vectors.size() << " vectors of dim " << sp.size()
              << " -> " << *out << "\n";
  });
}

void add_train(CLI::App& app, const CommonOpts& common) {
  auto* cmd = app.add_subcommand("train", "Train the neural classifier");
  auto pos = std::make_shared<std::string>();
  auto neg = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  auto cfg = std::make_shared<zsl::TrainConfig>();
  auto hidden = std::make_shared<std::vector<std::size_t>>();
  cmd->add_option("--pos", *pos, "Positive vectors file (label 1)")
      ->required();
  cmd->add_option("--neg", *neg, "Negative vectors file (label 0)")
      ->required();
  cmd->add_option("--batch-size", cfg->batch_size, "Mini-batch size");
  cmd->add_option("--max-epochs", cfg->max_epochs, "Epoch cap");
  cmd->add_option("--patience", cfg->patience,
                  "Early-stop patience on validation loss");
  cmd->add_option("--hidden", *hidden, "Hidden layer sizes");
  cmd->add_option("--dropout", cfg->dropout, "Hidden dropout rate");
  cmd->add_option("--lr", cfg->adam.lr, "Adam learning rate");
  cmd->add_option("--beta1", cfg->adam.beta1, "Adam beta1");
  cmd->add_option("--beta2", cfg->adam.beta2, "Adam beta2");
  cmd->add_option("--epsilon", cfg->adam.epsilon, "Adam epsilon");
  cmd->add_option("--out", *out, "Model file")->required();
  cmd->callback([=, &common] {
    if (!hidden->empty()) cfg->hidden = *hidden;
    cfg->threads = common.threads;
    auto pv = zsl::load_vectors(*pos);
    auto nv = zsl::load_vectors(*neg);
    auto result = zsl::train(pv, nv, *cfg, common.seed);
    zsl::save_model(result.model, &result.run, *out);
    std::cerr << "train: best epoch " << result.run.best_epoch + 1 << " of "
              << result.run.train_loss.size();
    if (result.run.test_auc)
      std::cerr << ", internal test AUC " << *result.run.test_auc;
    std::cerr << " -> " << *out << "\n";
  });
}

void add_classify(CLI::App& app, const CommonOpts& common) {
  auto* cmd = app.add_subcommand("classify", "Score vectors with a model");
  auto model = std::make_shared<std::string>();
  auto vectors = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  cmd->add_option("--model", *model, "Model file")->required();
  cmd->add_option("--vectors", *vectors, "Vectors file")->required();
  cmd->add_option("--out", *out, "Probabilities file")->required();
  cmd->callback([=, &common] {
    auto m = zsl::load_model(*model);
    auto v = zsl::load_vectors(*vectors);
    auto probs = zsl::predict(m.model, v, common.threads);
    zsl::ProbsFile pf;
    for (const auto& fv : v) pf.doc_ids.push_back(fv.doc_id);
    pf.probs = probs;
    zsl::save_probs(pf, *out);
    std::cerr << "classify: " << probs.size() << " probabilities -> " << *out
              << "\n";
  });
}

void add_eval(CLI::App& app, const CommonOpts&) {
  auto* cmd = app.add_subcommand(
      "eval", "Threshold sweep and AUC against ground-truth labels");
  auto probs = std::make_shared<std::string>();
  auto labels = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  auto table = std::make_shared<std::string>();
  auto taus = std::make_shared<std::vector<double>>(zsl::kDefaultTaus);
  cmd->add_option("--probs", *probs, "Probabilities file")->required();
  cmd->add_option("--labels", *labels, "Labels file")->required();
  cmd->add_option("--taus", *taus, "Probability thresholds")->delimiter(',');
  cmd->add_option("--out", *out, "Report file (JSON)")->required();
  cmd->add_option("--table", *table, "Report table (TSV); defaults beside --out");
  cmd->callback([=] {
    auto pf = zsl::load_probs(*probs);
    auto lf = zsl::load_labels(*labels);
    if (pf.doc_ids != lf.doc_ids)
      throw zsl::DataError("eval: probs and labels cover different documents");
    zsl::EvalReport report;
    report.metrics = zsl::threshold_sweep(pf.probs, lf.labels, *taus);
    try {
      report.roc["all"] = zsl::roc_points(pf.probs, lf.labels);
    } catch (const zsl::DataError&) {
    }
    const std::string table_path =
        table->empty() ? replace_extension(*out, ".tsv") : *table;
    zsl::save_report(report, *out, table_path);
    std::cerr << "eval: report -> " << *out << "\n";
  });
}

void add_triage(CLI::App& app, const CommonOpts&) {
  auto* cmd = app.add_subcommand(
      "triage",
      "List documents containing the base string with probability >= tau");
  auto corpus = std::make_shared<std::string>();
  auto probs = std::make_shared<std::string>();
  auto base = std::make_shared<std::string>("suicid");
  auto tau = std::make_shared<double>(0.90);
  cmd->add_option("--corpus", *corpus, "Corpus (preprocessed)")->required();
  cmd->add_option("--probs", *probs, "Probabilities file")->required();
  cmd->add_option("--base", *base, "Base string");
  cmd->add_option("--tau", *tau, "Probability threshold");
  cmd->callback([=] {
    auto c = zsl::load_corpus(*corpus);
    auto pf = zsl::load_probs(*probs);
    std::vector<std::string> ids;
    for (const auto& doc : c.documents) ids.push_back(doc.id);
    if (pf.doc_ids != ids)
      throw zsl::DataError(
          "triage: probabilities are not aligned with the corpus");
    auto hits = zsl::triage_query(c, pf.probs, *base, *tau);
    for (const auto& [id, p] : hits) std::cout << id << '\t' << p << '\n';
    std::cerr << "triage: " << hits.size() << " documents with base \""
              << *base << "\" at tau >= " << *tau << "\n";
  });
}

void add_baseline_features(CLI::App& app, const CommonOpts&) {
  auto* cmd = app.add_subcommand(
      "baseline-features",
      "Select the most frequent positive-only bigrams");
  auto pos = std::make_shared<std::string>();
  auto neg = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  auto k = std::make_shared<std::size_t>(163);
  cmd->add_option("--pos", *pos, "Positive corpus (preprocessed)")
      ->required();
  cmd->add_option("--neg", *neg, "Negative corpus (preprocessed)")
      ->required();
  cmd->add_option("--k", *k, "Number of bigrams");
  cmd->add_option("--out", *out, "Bigram feature file")->required();
  cmd->callback([=] {
    auto cp = zsl::load_corpus(*pos, 1);
    auto cn = zsl::load_corpus(*neg, 0);
    auto set = zsl::select_top_unique_bigrams(cp, cn, *k);
    if (set.short_of_k())
      std::cerr << "baseline-features: warning: only " << set.size()
                << " unique bigrams available (requested " << *k << ")\n";
    zsl::save_bigram_features(set, *out);
    std::cerr << "baseline-features: " << set.size() << " bigrams -> " << *out
              << "\n";
  });
}

void add_baseline_map(CLI::App& app, const CommonOpts&) {
  auto* cmd = app.add_subcommand(
      "baseline-map", "Map a corpus to bigram count vectors");
  auto features = std::make_shared<std::string>();
  auto corpus = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  cmd->add_option("--features", *features, "Bigram feature file")->required();
  cmd->add_option("--corpus", *corpus, "Corpus (preprocessed)")->required();
  cmd->add_option("--out", *out, "Vectors file")->required();
  cmd->callback([=] {
    auto set = zsl::load_bigram_features(*features);
    auto c = zsl::load_corpus(*corpus);
    std::vector<zsl::FeatureVector> vectors;
    vectors.reserve(c.size());
    for (const auto& doc : c.documents) {
      zsl::FeatureVector v;
      v.doc_id = doc.id;
      v.values = zsl::map_document_bigram_counts(doc.tokens, set);
      vectors.push_back(std::move(v));
    }
    zsl::save_vectors(vectors, *out);
    std::cerr << "baseline-map: " << vectors.size() << " vectors -> " << *out
              << "\n";
  });
}

void add_synth(CLI::App& app, const CommonOpts& common) {
  auto* cmd = app.add_subcommand(
      "synth", "Generate the synthetic four-corpus benchmark");
  auto config = std::make_shared<std::string>();
  auto out_dir = std::make_shared<std::string>("synth-out");
  cmd->add_option("--config", *config, "Synth config (INI, [synth] section)");
  cmd->add_option("--out-dir", *out_dir, "Output directory")->required();
  cmd->callback([=, &common] {
    zsl::SynthConfig cfg;
    if (!config->empty()) cfg = zsl::synth_config_from_file(*config);
    auto corpora = zsl::generate_labeled_corpora(cfg, common.threads);
    fs::create_directories(*out_dir);
    const std::vector<std::pair<const zsl::Corpus*, zsl::SynthRole>> parts = {
        {&corpora.train_pos, zsl::SynthRole::TrainPos},
        {&corpora.train_neg, zsl::SynthRole::TrainNeg},
        {&corpora.test_pos, zsl::SynthRole::TestPos},
        {&corpora.test_neg, zsl::SynthRole::TestNeg}};
    nlohmann::json audits = nlohmann::json::array();
    for (const auto& [corpus, role] : parts) {
      const std::string path = *out_dir + "/" + corpus->name + ".jsonl";
      zsl::save_corpus(*corpus, path, /*with_tokens=*/false);
      zsl::LabelsFile labels;
      for (const auto& doc : corpus->documents) {
        labels.doc_ids.push_back(doc.id);
        labels.labels.push_back(*doc.weak_label);
      }
      zsl::save_labels(labels, *out_dir + "/labels_" + corpus->name + ".json");
      auto audit = zsl::audit_corpus(*corpus, cfg, role);
      audits.push_back(
          {{"corpus", audit.corpus_name},
           {"n_docs", audit.n_docs},
           {"realized_signal_events", audit.realized_signal_events},
           {"mean_signal_events_per_doc", audit.mean_signal_events_per_doc},
           {"expected_signal_events", audit.expected_signal_events},
           {"signal_within_3sigma", audit.signal_within_3sigma},
           {"base_token_doc_rate", audit.base_token_doc_rate},
           {"expected_base_rate", audit.expected_base_rate},
           {"base_within_3sigma", audit.base_within_3sigma},
           {"vocab_coverage", audit.vocab_coverage}});
      if (!audit.signal_within_3sigma || !audit.base_within_3sigma)
        std::cerr << "synth: warning: audit outside 3-sigma band for "
                  << audit.corpus_name << "\n";
    }
    std::ofstream audit_out(*out_dir + "/audit.json");
    audit_out << audits.dump(1, '\t') << '\n';
    std::cerr << "synth: corpora, labels, and audit written to " << *out_dir
              << "\n";
  });
}

void add_run(CLI::App& app, CommonOpts& common, CLI::Option* seed_opt,
             CLI::Option* threads_opt, std::string* out_dir_override) {
  auto* cmd = app.add_subcommand(
      "run", "Execute the full pipeline from a config file");
  auto config = std::make_shared<std::string>();
  cmd->add_option("--config", *config, "Pipeline config (INI)")->required();
  cmd->callback([=, &common] {
    zsl::PipelineConfig cfg = zsl::PipelineConfig::from_file(*config);
    if (seed_opt->count() > 0) cfg.seed = common.seed;
    if (threads_opt->count() > 0) cfg.threads = common.threads;
    if (!out_dir_override->empty()) cfg.out_dir = *out_dir_override;
    auto summary = zsl::run_pipeline(cfg);
    std::cout << "manifest: " << summary.manifest_path << "\n";
    std::cout << "report: " << summary.report_path << "\n";
    if (summary.zsl_auc)
      std::cout << "zsl combined test AUC: " << *summary.zsl_auc << "\n";
    if (summary.baseline_report_path) {
      std::cout << "baseline report: " << *summary.baseline_report_path
                << "\n";
      if (summary.baseline_auc)
        std::cout << "baseline combined test AUC: " << *summary.baseline_auc
                  << "\n";
    }
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contextual zero-shot document classification pipeline"};
  app.set_version_flag("--version", zsl::kToolVersion);
  app.require_subcommand(1);
  app.fallthrough();

  CommonOpts common;
  std::string out_dir_override;
  auto* seed_opt = app.add_option("--seed", common.seed, "Master seed");
  auto* threads_opt =
      app.add_option("--threads", common.threads, "Worker thread count");
  app.add_option("--out-dir", out_dir_override,
                 "Output directory override for run");

  add_prep(app, common);
  add_features(app, common);
  add_embed(app, common);
  add_space(app, common);
  add_map(app, common);
  add_train(app, common);
  add_classify(app, common);
  add_eval(app, common);
  add_triage(app, common);
  add_baseline_features(app, common);
  add_baseline_map(app, common);
  add_synth(app, common);
  add_run(app, common, seed_opt, threads_opt, &out_dir_override);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const zsl::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const zsl::NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const zsl::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
