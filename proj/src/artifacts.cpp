#include "zsl/artifacts.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

#include "zsl/error.hpp"

namespace zsl {

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

json read_artifact(const std::string& path, const std::string& kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("artifact not readable: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(path + ": parse error at byte " + std::to_string(e.byte) +
                    ": " + e.what());
  }
  if (!j.is_object() || !j.contains("kind") || !j.contains("format_version"))
    throw DataError(path + ": not a recognized artifact file");
  if (j["kind"] != kind)
    throw DataError(path + ": expected kind \"" + kind + "\", found \"" +
                    j["kind"].get<std::string>() + "\"");
  const int version = j["format_version"].get<int>();
  if (version > kFormatVersion)
    throw DataError(path + ": format version " + std::to_string(version) +
                    " is newer than supported version " +
                    std::to_string(kFormatVersion));
  return j;
}

void write_artifact(const json& j, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write artifact: " + path);
  out << j.dump(1, '\t') << '\n';
  if (!out) throw DataError("failed writing artifact: " + path);
}

json envelope(const std::string& kind) {
  return json{{"kind", kind}, {"format_version", kFormatVersion}};
}

json metric_to_json(const std::optional<double>& v) {
  if (!v) return json(kUndefinedMetric);
  return json(*v);
}

std::optional<double> metric_from_json(const json& j) {
  if (j.is_string()) return std::nullopt;
  return j.get<double>();
}

std::string format_metric(const std::optional<double>& v) {
  if (!v) return kUndefinedMetric;
  std::ostringstream out;
  out.precision(6);
  out << *v;
  return out.str();
}

}  // namespace

void save_features(const FeatureSet& features, const std::string& path) {
  json j = envelope("features");
  j["n_requested"] = features.n_requested;
  json items = json::array();
  std::size_t rank = 1;
  for (const auto& [word, score] : features.features) {
    items.push_back({{"word", word}, {"mean_tfidf", score}, {"rank", rank}});
    ++rank;
  }
  j["features"] = std::move(items);
  write_artifact(j, path);
}

FeatureSet load_features(const std::string& path) {
  json j = read_artifact(path, "features");
  FeatureSet fs;
  fs.n_requested = j["n_requested"].get<std::size_t>();
  for (const auto& item : j["features"]) {
    fs.features.emplace_back(item["word"].get<std::string>(),
                             item["mean_tfidf"].get<double>());
  }
  return fs;
}

void save_embedding(const EmbeddingMatrix& emb, const std::string& path) {
  json j = envelope("embedding");
  j["dim"] = emb.dim;
  j["min_count"] = emb.min_count;
  j["seed"] = emb.seed;
  j["hyperparams"] = {{"window", emb.config.window},
                      {"epochs", emb.config.epochs},
                      {"negatives", emb.config.negatives},
                      {"lr_start", emb.config.lr_start},
                      {"lr_end", emb.config.lr_end},
                      {"subsample", emb.config.subsample}};
  j["epoch_loss"] = emb.epoch_loss;
  j["words"] = emb.words;
  json rows = json::array();
  for (std::size_t r = 0; r < emb.size(); ++r) {
    const auto row = emb.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  j["vectors"] = std::move(rows);
  write_artifact(j, path);
}

EmbeddingMatrix load_embedding(const std::string& path) {
  json j = read_artifact(path, "embedding");
  EmbeddingMatrix emb;
  emb.dim = j["dim"].get<int>();
  emb.min_count = j["min_count"].get<int>();
  emb.seed = j["seed"].get<std::uint64_t>();
  emb.config.dim = emb.dim;
  emb.config.min_count = emb.min_count;
  emb.config.seed = emb.seed;
  const auto& h = j["hyperparams"];
  emb.config.window = h["window"].get<int>();
  emb.config.epochs = h["epochs"].get<int>();
  emb.config.negatives = h["negatives"].get<int>();
  emb.config.lr_start = h["lr_start"].get<double>();
  emb.config.lr_end = h["lr_end"].get<double>();
  emb.config.subsample = h["subsample"].get<double>();
  emb.epoch_loss = j["epoch_loss"].get<std::vector<double>>();
  emb.words = j["words"].get<std::vector<std::string>>();
  emb.vectors.reserve(emb.words.size() * static_cast<std::size_t>(emb.dim));
  for (const auto& row : j["vectors"]) {
    if (row.size() != static_cast<std::size_t>(emb.dim))
      throw DataError(path + ": embedding row of wrong dimensionality");
    for (const auto& v : row) emb.vectors.push_back(v.get<double>());
  }
  if (emb.vectors.size() !=
      emb.words.size() * static_cast<std::size_t>(emb.dim))
    throw DataError(path + ": embedding vector count mismatch");
  for (std::size_t r = 0; r < emb.words.size(); ++r)
    emb.vocab.emplace(emb.words[r], r);
  return emb;
}

void save_space(const SemanticSpace& space, const std::string& path) {
  json j = envelope("space");
  j["window"] = space.window;
  j["m"] = space.m;
  j["dropped"] = space.dropped;
  json feats = json::array();
  for (std::size_t f = 0; f < space.size(); ++f) {
    json contexts = json::array();
    for (const auto& [word, sim] : space.contexts[f].neighbors)
      contexts.push_back({{"word", word}, {"sim", sim}});
    feats.push_back({{"word", space.features[f]},
                     {"mean_tfidf", space.mean_tfidf[f]},
                     {"contexts", std::move(contexts)}});
  }
  j["features"] = std::move(feats);
  write_artifact(j, path);
}

SemanticSpace load_space(const std::string& path) {
  json j = read_artifact(path, "space");
  SemanticSpace space;
  space.window = j["window"].get<int>();
  space.m = j["m"].get<std::size_t>();
  space.dropped = j["dropped"].get<std::vector<std::string>>();
  for (const auto& item : j["features"]) {
    space.features.push_back(item["word"].get<std::string>());
    space.mean_tfidf.push_back(item["mean_tfidf"].get<double>());
    ContextSet ctx;
    ctx.feature = space.features.back();
    for (const auto& c : item["contexts"])
      ctx.neighbors.emplace_back(c["word"].get<std::string>(),
                                 c["sim"].get<double>());
    space.contexts.push_back(std::move(ctx));
  }
  return space;
}

void save_vectors(const std::vector<FeatureVector>& vectors,
                  const std::string& path) {
  json j = envelope("vectors");
  j["dim"] = vectors.empty() ? 0 : vectors.front().values.size();
  json items = json::array();
  for (const auto& v : vectors)
    items.push_back({{"doc_id", v.doc_id}, {"values", v.values}});
  j["items"] = std::move(items);
  write_artifact(j, path);
}

std::vector<FeatureVector> load_vectors(const std::string& path) {
  json j = read_artifact(path, "vectors");
  std::vector<FeatureVector> out;
  for (const auto& item : j["items"]) {
    FeatureVector v;
    v.doc_id = item["doc_id"].get<std::string>();
    v.values = item["values"].get<std::vector<double>>();
    out.push_back(std::move(v));
  }
  return out;
}

void save_model(const MlpModel& model, const TrainRun* run,
                const std::string& path) {
  json j = envelope("model");
  j["layout"] = model.layout;
  j["dropout_rate"] = model.dropout_rate;
  j["seed"] = model.seed;
  j["feat_mean"] = model.feat_mean;
  j["feat_scale"] = model.feat_scale;
  json weights = json::array();
  for (const auto& w : model.weights)
    weights.push_back({{"rows", w.rows}, {"cols", w.cols}, {"a", w.a}});
  j["weights"] = std::move(weights);
  j["biases"] = model.biases;
  if (run) {
    json r;
    r["split_train"] = run->split_train;
    r["split_val"] = run->split_val;
    r["batch_size"] = run->batch_size;
    r["max_epochs"] = run->max_epochs;
    r["patience"] = run->patience;
    r["train_loss"] = run->train_loss;
    r["val_loss"] = run->val_loss;
    r["best_epoch"] = run->best_epoch;
    r["n_train"] = run->train_idx.size();
    r["n_val"] = run->val_idx.size();
    r["n_test"] = run->test_idx.size();
    if (run->test_auc) r["test_auc"] = *run->test_auc;
    r["test_accuracy_at_half"] = run->test_accuracy_at_half;
    j["train_run"] = std::move(r);
  }
  write_artifact(j, path);
}

LoadedModel load_model(const std::string& path) {
  json j = read_artifact(path, "model");
  LoadedModel out;
  MlpModel& model = out.model;
  model.layout = j["layout"].get<std::vector<std::size_t>>();
  model.dropout_rate = j["dropout_rate"].get<double>();
  model.seed = j["seed"].get<std::uint64_t>();
  model.feat_mean = j["feat_mean"].get<std::vector<double>>();
  model.feat_scale = j["feat_scale"].get<std::vector<double>>();
  for (const auto& w : j["weights"]) {
    Matrix m(w["rows"].get<std::size_t>(), w["cols"].get<std::size_t>());
    m.a = w["a"].get<std::vector<double>>();
    if (m.a.size() != m.rows * m.cols)
      throw DataError(path + ": weight matrix size mismatch");
    model.weights.push_back(std::move(m));
  }
  model.biases = j["biases"].get<std::vector<std::vector<double>>>();
  if (model.weights.size() + 1 != model.layout.size() ||
      model.biases.size() != model.weights.size())
    throw DataError(path + ": model layout inconsistent with parameters");
  if (j.contains("train_run")) {
    const auto& r = j["train_run"];
    TrainRun run;
    run.split_train = r["split_train"].get<double>();
    run.split_val = r["split_val"].get<double>();
    run.batch_size = r["batch_size"].get<std::size_t>();
    run.max_epochs = r["max_epochs"].get<std::size_t>();
    run.patience = r["patience"].get<std::size_t>();
    run.train_loss = r["train_loss"].get<std::vector<double>>();
    run.val_loss = r["val_loss"].get<std::vector<double>>();
    run.best_epoch = r["best_epoch"].get<std::size_t>();
    if (r.contains("test_auc")) run.test_auc = r["test_auc"].get<double>();
    run.test_accuracy_at_half = r["test_accuracy_at_half"].get<double>();
    out.run = std::move(run);
  }
  return out;
}

void save_probs(const ProbsFile& probs, const std::string& path) {
  if (probs.doc_ids.size() != probs.probs.size())
    throw DataError("save_probs: ids/probs length mismatch");
  json j = envelope("probs");
  j["doc_ids"] = probs.doc_ids;
  j["probs"] = probs.probs;
  write_artifact(j, path);
}

ProbsFile load_probs(const std::string& path) {
  json j = read_artifact(path, "probs");
  ProbsFile out;
  out.doc_ids = j["doc_ids"].get<std::vector<std::string>>();
  out.probs = j["probs"].get<std::vector<double>>();
  if (out.doc_ids.size() != out.probs.size())
    throw DataError(path + ": ids/probs length mismatch");
  return out;
}

void save_labels(const LabelsFile& labels, const std::string& path) {
  if (labels.doc_ids.size() != labels.labels.size())
    throw DataError("save_labels: ids/labels length mismatch");
  json j = envelope("labels");
  j["doc_ids"] = labels.doc_ids;
  j["labels"] = labels.labels;
  write_artifact(j, path);
}

LabelsFile load_labels(const std::string& path) {
  json j = read_artifact(path, "labels");
  LabelsFile out;
  out.doc_ids = j["doc_ids"].get<std::vector<std::string>>();
  out.labels = j["labels"].get<std::vector<int>>();
  if (out.doc_ids.size() != out.labels.size())
    throw DataError(path + ": ids/labels length mismatch");
  for (int y : out.labels)
    if (y != 0 && y != 1)
      throw DataError(path + ": labels must be 0 or 1");
  return out;
}

void save_bigram_features(const BigramFeatureSet& set,
                          const std::string& path) {
  json j = envelope("bigram-features");
  j["k_requested"] = set.k_requested;
  json items = json::array();
  for (const auto& [bg, count] : set.bigrams)
    items.push_back(
        {{"first", bg.first}, {"second", bg.second}, {"count", count}});
  j["bigrams"] = std::move(items);
  write_artifact(j, path);
}

BigramFeatureSet load_bigram_features(const std::string& path) {
  json j = read_artifact(path, "bigram-features");
  BigramFeatureSet set;
  set.k_requested = j["k_requested"].get<std::size_t>();
  for (const auto& item : j["bigrams"]) {
    set.bigrams.emplace_back(
        Bigram{item["first"].get<std::string>(),
               item["second"].get<std::string>()},
        item["count"].get<std::size_t>());
  }
  return set;
}

void save_report(const EvalReport& report, const std::string& json_path,
                 const std::string& table_path) {
  json j = envelope("report");
  json rows = json::array();
  for (const auto& row : report.metrics.rows) {
    rows.push_back({{"subset", row.subset},
                    {"tau", row.tau},
                    {"tp", row.cm.tp},
                    {"fp", row.cm.fp},
                    {"tn", row.cm.tn},
                    {"fn", row.cm.fn},
                    {"sensitivity", metric_to_json(row.sensitivity)},
                    {"specificity", metric_to_json(row.specificity)},
                    {"ppv", metric_to_json(row.ppv)}});
  }
  j["rows"] = std::move(rows);
  json aucs = json::object();
  for (const auto& [name, auc] : report.metrics.subset_auc)
    aucs[name] = metric_to_json(auc);
  j["subset_auc"] = std::move(aucs);
  j["combined_auc"] = metric_to_json(report.metrics.combined_auc);
  if (report.median_neg_prob) j["median_neg_prob"] = *report.median_neg_prob;
  if (!report.triage_base.empty()) {
    json hits = json::array();
    for (const auto& [id, p] : report.triage_hits)
      hits.push_back({{"doc_id", id}, {"prob", p}});
    j["triage"] = {{"base", report.triage_base},
                   {"tau", report.triage_tau},
                   {"hits", std::move(hits)}};
  }
  if (!report.roc.empty()) {
    json roc = json::object();
    for (const auto& [name, points] : report.roc) {
      json pts = json::array();
      for (const auto& [fpr, tpr] : points)
        pts.push_back({{"fpr", fpr}, {"tpr", tpr}});
      roc[name] = std::move(pts);
    }
    j["roc"] = std::move(roc);
  }
  write_artifact(j, json_path);

  std::ofstream table(table_path);
  if (!table) throw DataError("cannot write report table: " + table_path);
  table << "subset\ttau\ttp\tfp\ttn\tfn\tsensitivity\tspecificity\tppv\n";
  for (const auto& row : report.metrics.rows) {
    table << row.subset << '\t' << row.tau << '\t' << row.cm.tp << '\t'
          << row.cm.fp << '\t' << row.cm.tn << '\t' << row.cm.fn << '\t'
          << format_metric(row.sensitivity) << '\t'
          << format_metric(row.specificity) << '\t'
          << format_metric(row.ppv) << '\n';
  }
  table << '\n';
  for (const auto& [name, auc] : report.metrics.subset_auc)
    table << "auc\t" << name << '\t' << format_metric(auc) << '\n';
  table << "auc\tcombined\t" << format_metric(report.metrics.combined_auc)
        << '\n';
  if (report.median_neg_prob)
    table << "median_neg_prob\t" << *report.median_neg_prob << '\n';
  if (!report.triage_base.empty()) {
    table << "triage\tbase=" << report.triage_base
          << "\ttau=" << report.triage_tau
          << "\thits=" << report.triage_hits.size() << '\n';
    for (const auto& [id, p] : report.triage_hits)
      table << "triage_hit\t" << id << '\t' << p << '\n';
  }
  if (!table) throw DataError("failed writing report table: " + table_path);
}

EvalReport load_report(const std::string& json_path) {
  json j = read_artifact(json_path, "report");
  EvalReport report;
  for (const auto& r : j["rows"]) {
    MetricsRow row;
    row.subset = r["subset"].get<std::string>();
    row.tau = r["tau"].get<double>();
    row.cm.tp = r["tp"].get<std::size_t>();
    row.cm.fp = r["fp"].get<std::size_t>();
    row.cm.tn = r["tn"].get<std::size_t>();
    row.cm.fn = r["fn"].get<std::size_t>();
    row.cm.threshold = row.tau;
    row.sensitivity = metric_from_json(r["sensitivity"]);
    row.specificity = metric_from_json(r["specificity"]);
    row.ppv = metric_from_json(r["ppv"]);
    report.metrics.rows.push_back(std::move(row));
  }
  for (const auto& [name, auc] : j["subset_auc"].items())
    report.metrics.subset_auc.emplace_back(name, metric_from_json(auc));
  report.metrics.combined_auc = metric_from_json(j["combined_auc"]);
  if (j.contains("median_neg_prob"))
    report.median_neg_prob = j["median_neg_prob"].get<double>();
  if (j.contains("triage")) {
    report.triage_base = j["triage"]["base"].get<std::string>();
    report.triage_tau = j["triage"]["tau"].get<double>();
    for (const auto& h : j["triage"]["hits"])
      report.triage_hits.emplace_back(h["doc_id"].get<std::string>(),
                                      h["prob"].get<double>());
  }
  if (j.contains("roc")) {
    for (const auto& [name, pts] : j["roc"].items()) {
      auto& points = report.roc[name];
      for (const auto& p : pts)
        points.emplace_back(p["fpr"].get<double>(), p["tpr"].get<double>());
    }
  }
  return report;
}

}  // namespace zsl
