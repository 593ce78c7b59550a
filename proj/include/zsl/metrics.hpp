#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "zsl/document.hpp"

namespace zsl {

struct ConfusionMatrix {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  double threshold = 0.0;

  std::size_t total() const { return tp + fp + tn + fn; }
};

// One metrics row. A metric is absent exactly when its denominator is zero;
// reports render the absent state as "NaN/div by 0".
struct MetricsRow {
  std::string subset;
  double tau = 0.0;
  ConfusionMatrix cm;
  std::optional<double> sensitivity, specificity, ppv;
};

struct MetricsReport {
  std::vector<MetricsRow> rows;
  // Per-subset AUC; absent when a subset has a single class.
  std::vector<std::pair<std::string, std::optional<double>>> subset_auc;
  std::optional<double> combined_auc;
};

inline const std::vector<double> kDefaultTaus = {0.15, 0.5, 0.85};

// Prediction is positive iff prob >= tau.
ConfusionMatrix confusion_at_threshold(std::span<const double> probs,
                                       std::span<const int> labels,
                                       double tau);

// sensitivity = tp/(tp+fn), specificity = tn/(tn+fp), ppv = tp/(tp+fp);
// zero denominators yield absent values.
MetricsRow classification_metrics(const ConfusionMatrix& cm,
                                  std::string subset = "all");

// Probability that a random positive outscores a random negative, ties
// counted one half. Requires at least one label of each class.
double roc_auc(std::span<const double> probs, std::span<const int> labels);

// One metrics row per threshold plus the AUC, for a single score list.
MetricsReport threshold_sweep(std::span<const double> probs,
                              std::span<const int> labels,
                              const std::vector<double>& taus = kDefaultTaus,
                              const std::string& subset = "all");

struct EvalSubset {
  std::string name;
  std::vector<double> probs;
  std::vector<int> labels;
};

// Rows per subset and per threshold plus combined rows whose confusion
// counts are the sums of the subset counts; combined AUC is computed on the
// pooled scores.
MetricsReport sweep_subsets(const std::vector<EvalSubset>& subsets,
                            const std::vector<double>& taus = kDefaultTaus);

// Middle value (odd length) or mean of the two middle values (even length).
double median_probability(std::span<const double> probs);

// (id, prob) of documents that contain `base` in some token and score at
// least tau, ordered by probability descending (ties by id).
std::vector<std::pair<std::string, double>> triage_query(
    const Corpus& corpus, std::span<const double> probs,
    std::string_view base, double tau = 0.90);

// ROC curve points (fpr, tpr) for plotting, one per distinct threshold.
std::vector<std::pair<double, double>> roc_points(std::span<const double> probs,
                                                  std::span<const int> labels);

}  // namespace zsl
