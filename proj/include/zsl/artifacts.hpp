#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "zsl/bigram.hpp"
#include "zsl/embedding.hpp"
#include "zsl/metrics.hpp"
#include "zsl/mlp.hpp"
#include "zsl/space.hpp"
#include "zsl/tfidf.hpp"

namespace zsl {

// Every artifact is a versioned JSON document with a "kind" field. Loading
// a file of the wrong kind or a newer format version is an explicit error,
// and truncated files report the parse position.

void save_features(const FeatureSet& features, const std::string& path);
FeatureSet load_features(const std::string& path);

void save_embedding(const EmbeddingMatrix& emb, const std::string& path);
EmbeddingMatrix load_embedding(const std::string& path);

void save_space(const SemanticSpace& space, const std::string& path);
SemanticSpace load_space(const std::string& path);

void save_vectors(const std::vector<FeatureVector>& vectors,
                  const std::string& path);
std::vector<FeatureVector> load_vectors(const std::string& path);

struct LoadedModel {
  MlpModel model;
  std::optional<TrainRun> run;
};
void save_model(const MlpModel& model, const TrainRun* run,
                const std::string& path);
LoadedModel load_model(const std::string& path);

struct ProbsFile {
  std::vector<std::string> doc_ids;
  std::vector<double> probs;
};
void save_probs(const ProbsFile& probs, const std::string& path);
ProbsFile load_probs(const std::string& path);

struct LabelsFile {
  std::vector<std::string> doc_ids;
  std::vector<int> labels;
};
void save_labels(const LabelsFile& labels, const std::string& path);
LabelsFile load_labels(const std::string& path);

void save_bigram_features(const BigramFeatureSet& set,
                          const std::string& path);
BigramFeatureSet load_bigram_features(const std::string& path);

// Evaluation report: metric rows, per-subset and combined AUC, the median
// probability of the negative test subset, the triage hit list, and ROC
// points for external plotting.
struct EvalReport {
  MetricsReport metrics;
  std::optional<double> median_neg_prob;
  std::string triage_base;
  double triage_tau = 0.90;
  std::vector<std::pair<std::string, double>> triage_hits;
  std::map<std::string, std::vector<std::pair<double, double>>> roc;
};

// The undefined-metric marker used in rendered reports.
inline const char* kUndefinedMetric = "NaN/div by 0";

void save_report(const EvalReport& report, const std::string& json_path,
                 const std::string& table_path);
EvalReport load_report(const std::string& json_path);

}  // namespace zsl
