#include "zsl/pipeline.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "zsl/artifacts.hpp"
#include "zsl/digest.hpp"
#include "zsl/error.hpp"
#include "zsl/textprep.hpp"
#include "zsl/version.hpp"

namespace zsl {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

std::map<std::string, std::string> flatten_params(const PipelineConfig& c) {
  std::map<std::string, std::string> p;
  p["features.n"] = std::to_string(c.n_features);
  p["features.tfidf_mean"] =
      c.tfidf_mean == TfidfMean::ContainingDocs ? "containing" : "all";
  p["prep.min_lexicon_len"] = std::to_string(c.min_lexicon_len);
  p["embedding.dim"] = std::to_string(c.dim);
  p["embedding.window"] = std::to_string(c.window);
  p["embedding.epochs"] = std::to_string(c.epochs);
  p["embedding.negatives"] = std::to_string(c.negatives);
  p["embedding.min_count"] = std::to_string(c.min_count);
  p["embedding.lr_start"] = fmt(c.lr_start);
  p["embedding.lr_end"] = fmt(c.lr_end);
  p["embedding.subsample"] = fmt(c.subsample);
  p["embedding.threads"] = std::to_string(c.embed_threads);
  p["space.m"] = std::to_string(c.m);
  p["space.window"] = std::to_string(c.space_window);
  p["mlp.batch_size"] = std::to_string(c.batch_size);
  p["mlp.max_epochs"] = std::to_string(c.max_epochs);
  p["mlp.patience"] = std::to_string(c.patience);
  {
    std::string h;
    for (std::size_t v : c.hidden) {
      if (!h.empty()) h += ",";
      h += std::to_string(v);
    }
    p["mlp.hidden"] = h;
  }
  p["mlp.dropout"] = fmt(c.dropout);
  p["mlp.lr"] = fmt(c.adam.lr);
  p["mlp.beta1"] = fmt(c.adam.beta1);
  p["mlp.beta2"] = fmt(c.adam.beta2);
  p["mlp.epsilon"] = fmt(c.adam.epsilon);
  {
    std::string t;
    for (double v : c.taus) {
      if (!t.empty()) t += ",";
      t += fmt(v);
    }
    p["eval.taus"] = t;
  }
  p["eval.triage_base"] = c.triage_base;
  p["eval.triage_tau"] = fmt(c.triage_tau);
  p["run.seed"] = std::to_string(c.seed);
  p["run.threads"] = std::to_string(c.threads);
  p["run.baseline"] = c.baseline ? "true" : "false";
  p["run.baseline_k"] = std::to_string(c.baseline_k);
  return p;
}

struct StageGuard {
  RunManifest& manifest;
  StageRecord record;

  StageGuard(RunManifest& m, std::string name) : manifest(m) {
    record.name = std::move(name);
  }
  void input(const std::string& label, const std::string& path) {
    record.inputs[label] = sha256_file(path);
  }
  void output(const std::string& label, const std::string& path) {
    record.outputs[label] = sha256_file(path);
  }
  void commit() { manifest.stages.push_back(record); }
};

LabelsFile corpus_labels(const Corpus& corpus, const std::string& what) {
  LabelsFile labels;
  for (const auto& doc : corpus.documents) {
    if (!doc.weak_label)
      throw DataError("pipeline: document \"" + doc.id + "\" in " + what +
                      " has no label; evaluation needs ground truth");
    labels.doc_ids.push_back(doc.id);
    labels.labels.push_back(*doc.weak_label);
  }
  return labels;
}

std::vector<FeatureVector> bigram_map_corpus(const Corpus& corpus,
                                             const BigramFeatureSet& set) {
  std::vector<FeatureVector> out;
  out.reserve(corpus.documents.size());
  for (const auto& doc : corpus.documents) {
    FeatureVector v;
    v.doc_id = doc.id;
    v.values = map_document_bigram_counts(doc.tokens, set);
    out.push_back(std::move(v));
  }
  return out;
}

// Classify + eval for one trained model; shared by the main and baseline
// pipelines.
struct EvalInputs {
  const Corpus* test_pos;
  const Corpus* test_neg;
  std::vector<FeatureVector> test_pos_vecs, test_neg_vecs;
};

EvalReport classify_and_eval(const MlpModel& model, const EvalInputs& in,
                             const PipelineConfig& cfg,
                             const std::string& dir, RunManifest& manifest,
                             const std::string& stage_prefix,
                             std::optional<double>* auc_out) {
  StageGuard classify(manifest, stage_prefix + "classify");
  auto pos_probs = predict(model, in.test_pos_vecs, cfg.threads);
  auto neg_probs = predict(model, in.test_neg_vecs, cfg.threads);
  ProbsFile pos_file, neg_file;
  for (std::size_t i = 0; i < in.test_pos_vecs.size(); ++i)
    pos_file.doc_ids.push_back(in.test_pos_vecs[i].doc_id);
  pos_file.probs = pos_probs;
  for (std::size_t i = 0; i < in.test_neg_vecs.size(); ++i)
    neg_file.doc_ids.push_back(in.test_neg_vecs[i].doc_id);
  neg_file.probs = neg_probs;
  const std::string pos_path = dir + "/probs_" + in.test_pos->name + ".json";
  const std::string neg_path = dir + "/probs_" + in.test_neg->name + ".json";
  save_probs(pos_file, pos_path);
  save_probs(neg_file, neg_path);
  classify.output("probs_test_pos", pos_path);
  classify.output("probs_test_neg", neg_path);
  classify.commit();

  StageGuard eval(manifest, stage_prefix + "eval");
  eval.input("probs_test_pos", pos_path);
  eval.input("probs_test_neg", neg_path);
  auto pos_labels = corpus_labels(*in.test_pos, in.test_pos->name);
  auto neg_labels = corpus_labels(*in.test_neg, in.test_neg->name);

  std::vector<EvalSubset> subsets(2);
  subsets[0].name = in.test_pos->name;
  subsets[0].probs = pos_probs;
  subsets[0].labels = pos_labels.labels;
  subsets[1].name = in.test_neg->name;
  subsets[1].probs = neg_probs;
  subsets[1].labels = neg_labels.labels;

  EvalReport report;
  report.metrics = sweep_subsets(subsets, cfg.taus);
  report.median_neg_prob = median_probability(neg_probs);
  report.triage_base = cfg.triage_base;
  report.triage_tau = cfg.triage_tau;
  report.triage_hits =
      triage_query(*in.test_neg, neg_probs, cfg.triage_base, cfg.triage_tau);
  std::vector<double> pooled_probs = pos_probs;
  pooled_probs.insert(pooled_probs.end(), neg_probs.begin(), neg_probs.end());
  std::vector<int> pooled_labels = pos_labels.labels;
  pooled_labels.insert(pooled_labels.end(), neg_labels.labels.begin(),
                       neg_labels.labels.end());
  try {
    report.roc["combined"] = roc_points(pooled_probs, pooled_labels);
  } catch (const DataError&) {
    // single-class pooled labels: no curve
  }
  const std::string report_json = dir + "/report.json";
  const std::string report_table = dir + "/report.tsv";
  save_report(report, report_json, report_table);
  eval.output("report", report_json);
  eval.output("report_table", report_table);
  eval.commit();
  if (auc_out) *auc_out = report.metrics.combined_auc;
  return report;
}

}  // namespace

std::map<std::string, std::string> RunManifest::digest_map() const {
  std::map<std::string, std::string> out;
  for (const auto& stage : stages) {
    for (const auto& [label, digest] : stage.inputs)
      out[stage.name + "/in/" + label] = digest;
    for (const auto& [label, digest] : stage.outputs)
      out[stage.name + "/out/" + label] = digest;
  }
  return out;
}

void save_manifest(const RunManifest& manifest, const std::string& path) {
  json j;
  j["kind"] = "manifest";
  j["format_version"] = 1;
  j["tool_version"] = manifest.tool_version;
  j["started_at"] = manifest.started_at;
  j["finished_at"] = manifest.finished_at;
  j["seed"] = manifest.seed;
  j["threads"] = manifest.threads;
  j["params"] = manifest.params;
  json stages = json::array();
  for (const auto& s : manifest.stages)
    stages.push_back(
        {{"name", s.name}, {"inputs", s.inputs}, {"outputs", s.outputs}});
  j["stages"] = std::move(stages);
  std::ofstream out(path);
  if (!out) throw DataError("cannot write manifest: " + path);
  out << j.dump(1, '\t') << '\n';
}

RunManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("manifest not readable: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(path + ": parse error at byte " + std::to_string(e.byte) +
                    ": " + e.what());
  }
  RunManifest m;
  m.tool_version = j["tool_version"].get<std::string>();
  m.started_at = j["started_at"].get<std::string>();
  m.finished_at = j["finished_at"].get<std::string>();
  m.seed = j["seed"].get<std::uint64_t>();
  m.threads = j["threads"].get<int>();
  m.params = j["params"].get<std::map<std::string, std::string>>();
  for (const auto& s : j["stages"]) {
    StageRecord rec;
    rec.name = s["name"].get<std::string>();
    rec.inputs = s["inputs"].get<std::map<std::string, std::string>>();
    rec.outputs = s["outputs"].get<std::map<std::string, std::string>>();
    m.stages.push_back(std::move(rec));
  }
  return m;
}

RunSummary run_pipeline(const PipelineConfig& cfg) {
  RunSummary summary;
  RunManifest& manifest = summary.manifest;
  manifest.tool_version = kToolVersion;
  manifest.started_at = now_iso8601();
  manifest.seed = cfg.seed;
  manifest.threads = cfg.threads;
  manifest.params = flatten_params(cfg);

  const std::string dir = cfg.out_dir;
  fs::create_directories(dir);
  fs::create_directories(dir + "/prep");
  fs::create_directories(dir + "/vectors");

  auto run_stage = [&](const std::string& name, auto&& body) {
    try {
      body();
    } catch (const UsageError&) {
      throw;
    } catch (const std::exception& e) {
      throw DataError("pipeline stage \"" + name + "\" failed: " + e.what());
    }
  };

  // prep: load, tokenize, persist the preprocessed corpora.
  Corpus train_pos, train_neg, test_pos, test_neg;
  std::map<std::string, std::string> prep_paths;
  run_stage("prep", [&] {
    StageGuard stage(manifest, "prep");
    stage.input("train_pos", cfg.train_pos);
    stage.input("train_neg", cfg.train_neg);
    stage.input("test_pos", cfg.test_pos);
    stage.input("test_neg", cfg.test_neg);
    std::optional<SplitLexicon> lexicon;
    if (cfg.lexicon_path) {
      lexicon = SplitLexicon::from_file(*cfg.lexicon_path);
      stage.input("lexicon", *cfg.lexicon_path);
    }
    train_pos = load_corpus(cfg.train_pos, 1);
    train_neg = load_corpus(cfg.train_neg, 0);
    test_pos = load_corpus(cfg.test_pos);
    test_neg = load_corpus(cfg.test_neg);
    for (Corpus* c : {&train_pos, &train_neg, &test_pos, &test_neg}) {
      preprocess_corpus(*c, lexicon, cfg.min_lexicon_len, cfg.threads);
      const std::string path = dir + "/prep/" + c->name + ".jsonl";
      save_corpus(*c, path);
      prep_paths[c->name] = path;
      stage.output(c->name, path);
    }
    stage.commit();
  });

  // features: Eq. 1 tables for both training corpora, top-n, set difference.
  FeatureSet features;
  const std::string features_path = dir + "/features.json";
  run_stage("features", [&] {
    StageGuard stage(manifest, "features");
    stage.input("train_pos", prep_paths.at(train_pos.name));
    stage.input("train_neg", prep_paths.at(train_neg.name));
    TfidfTable pos_table =
        build_tfidf_table(train_pos, cfg.tfidf_mean, cfg.threads);
    TfidfTable neg_table =
        build_tfidf_table(train_neg, cfg.tfidf_mean, cfg.threads);
    features = select_features(top_n_entries(pos_table, cfg.n_features),
                               top_n_terms(neg_table, cfg.n_features));
    save_features(features, features_path);
    stage.output("features", features_path);
    stage.commit();
  });

  // embed: skip-gram over the positive training corpus.
  EmbeddingMatrix embedding;
  const std::string embedding_path = dir + "/embedding.json";
  run_stage("embed", [&] {
    StageGuard stage(manifest, "embed");
    stage.input("train_pos", prep_paths.at(train_pos.name));
    SkipgramConfig sg;
    sg.dim = cfg.dim;
    sg.window = cfg.window;
    sg.epochs = cfg.epochs;
    sg.negatives = cfg.negatives;
    sg.min_count = cfg.min_count;
    sg.lr_start = cfg.lr_start;
    sg.lr_end = cfg.lr_end;
    sg.subsample = cfg.subsample;
    sg.seed = derive_seed(cfg.seed, "embed");
    sg.threads = cfg.embed_threads;
    embedding = train_skipgram(train_pos, sg);
    save_embedding(embedding, embedding_path);
    stage.output("embedding", embedding_path);
    stage.commit();
  });

  // space: features + context words + weights.
  SemanticSpace space;
  const std::string space_path = dir + "/space.json";
  run_stage("space", [&] {
    StageGuard stage(manifest, "space");
    stage.input("features", features_path);
    stage.input("embedding", embedding_path);
    space = build_semantic_space(features, embedding, cfg.m,
                                 cfg.space_window);
    save_space(space, space_path);
    stage.output("space", space_path);
    stage.commit();
  });

  // map: every corpus into the space.
  std::vector<FeatureVector> train_pos_vecs, train_neg_vecs;
  EvalInputs eval_inputs;
  eval_inputs.test_pos = &test_pos;
  eval_inputs.test_neg = &test_neg;
  std::map<std::string, std::string> vector_paths;
  run_stage("map", [&] {
    StageGuard stage(manifest, "map");
    stage.input("space", space_path);
    for (Corpus* c : {&train_pos, &train_neg, &test_pos, &test_neg})
      stage.input(c->name, prep_paths.at(c->name));
    train_pos_vecs = map_corpus(train_pos, space, cfg.threads);
    train_neg_vecs = map_corpus(train_neg, space, cfg.threads);
    eval_inputs.test_pos_vecs = map_corpus(test_pos, space, cfg.threads);
    eval_inputs.test_neg_vecs = map_corpus(test_neg, space, cfg.threads);
    const std::vector<
        std::pair<std::string, const std::vector<FeatureVector>*>>
        outputs = {{train_pos.name, &train_pos_vecs},
                   {train_neg.name, &train_neg_vecs},
                   {test_pos.name, &eval_inputs.test_pos_vecs},
                   {test_neg.name, &eval_inputs.test_neg_vecs}};
    for (const auto& [name, vecs] : outputs) {
      const std::string path = dir + "/vectors/" + name + ".json";
      save_vectors(*vecs, path);
      vector_paths[name] = path;
      stage.output(name, path);
    }
    stage.commit();
  });

  // train: the classifier on the mapped training corpora.
  MlpModel model;
  const std::string model_path = dir + "/model.json";
  run_stage("train", [&] {
    StageGuard stage(manifest, "train");
    stage.input("train_pos_vectors", vector_paths.at(train_pos.name));
    stage.input("train_neg_vectors", vector_paths.at(train_neg.name));
    TrainConfig tc;
    tc.batch_size = cfg.batch_size;
    tc.max_epochs = cfg.max_epochs;
    tc.patience = cfg.patience;
    tc.hidden = cfg.hidden;
    tc.dropout = cfg.dropout;
    tc.adam = cfg.adam;
    tc.threads = cfg.threads;
    TrainResult result = train(train_pos_vecs, train_neg_vecs, tc,
                               derive_seed(cfg.seed, "train"));
    model = std::move(result.model);
    save_model(model, &result.run, model_path);
    stage.output("model", model_path);
    stage.commit();
  });

  // classify + eval.
  run_stage("eval", [&] {
    classify_and_eval(model, eval_inputs, cfg, dir, manifest, "",
                      &summary.zsl_auc);
  });
  summary.report_path = dir + "/report.json";

  if (cfg.baseline) {
    const std::string bdir = dir + "/baseline";
    fs::create_directories(bdir);
    BigramFeatureSet bigrams;
    const std::string bigrams_path = bdir + "/bigram_features.json";
    run_stage("baseline-features", [&] {
      StageGuard stage(manifest, "baseline-features");
      stage.input("train_pos", prep_paths.at(train_pos.name));
      stage.input("train_neg", prep_paths.at(train_neg.name));
      bigrams = select_top_unique_bigrams(train_pos, train_neg,
                                          cfg.baseline_k);
      save_bigram_features(bigrams, bigrams_path);
      stage.output("bigram_features", bigrams_path);
      stage.commit();
    });

    std::vector<FeatureVector> bl_train_pos, bl_train_neg;
    EvalInputs bl_inputs;
    bl_inputs.test_pos = &test_pos;
    bl_inputs.test_neg = &test_neg;
    run_stage("baseline-map", [&] {
      StageGuard stage(manifest, "baseline-map");
      stage.input("bigram_features", bigrams_path);
      bl_train_pos = bigram_map_corpus(train_pos, bigrams);
      bl_train_neg = bigram_map_corpus(train_neg, bigrams);
      bl_inputs.test_pos_vecs = bigram_map_corpus(test_pos, bigrams);
      bl_inputs.test_neg_vecs = bigram_map_corpus(test_neg, bigrams);
      const std::vector<
          std::pair<std::string, const std::vector<FeatureVector>*>>
          outputs = {{train_pos.name, &bl_train_pos},
                     {train_neg.name, &bl_train_neg},
                     {test_pos.name, &bl_inputs.test_pos_vecs},
                     {test_neg.name, &bl_inputs.test_neg_vecs}};
      for (const auto& [name, vecs] : outputs) {
        const std::string path = bdir + "/vectors_" + name + ".json";
        save_vectors(*vecs, path);
        stage.output(name, path);
      }
      stage.commit();
    });

    MlpModel bl_model;
    const std::string bl_model_path = bdir + "/model.json";
    run_stage("baseline-train", [&] {
      StageGuard stage(manifest, "baseline-train");
      TrainConfig tc;
      tc.batch_size = cfg.batch_size;
      tc.max_epochs = cfg.max_epochs;
      tc.patience = cfg.patience;
      tc.hidden = cfg.hidden;
      tc.dropout = cfg.dropout;
      tc.adam = cfg.adam;
      tc.threads = cfg.threads;
      TrainResult result = train(bl_train_pos, bl_train_neg, tc,
                                 derive_seed(cfg.seed, "baseline-train"));
      bl_model = std::move(result.model);
      save_model(bl_model, &result.run, bl_model_path);
      stage.output("model", bl_model_path);
      stage.commit();
    });

    run_stage("baseline-eval", [&] {
      classify_and_eval(bl_model, bl_inputs, cfg, bdir, manifest, "baseline-",
                        &summary.baseline_auc);
    });
    summary.baseline_report_path = bdir + "/report.json";
  }

  manifest.finished_at = now_iso8601();
  summary.manifest_path = dir + "/manifest.json";
  save_manifest(manifest, summary.manifest_path);
  return summary;
}

}  // namespace zsl
