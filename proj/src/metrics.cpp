#include "zsl/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "zsl/error.hpp"
#include "zsl/textprep.hpp"

namespace zsl {

ConfusionMatrix confusion_at_threshold(std::span<const double> probs,
                                       std::span<const int> labels,
                                       double tau) {
  if (probs.size() != labels.size())
    throw DataError("confusion_at_threshold: " + std::to_string(probs.size()) +
                    " probabilities vs " + std::to_string(labels.size()) +
                    " labels");
  if (probs.empty())
    throw DataError("confusion_at_threshold: empty input");
  ConfusionMatrix cm;
  cm.threshold = tau;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const bool predicted = probs[i] >= tau;
    if (labels[i] == 1)
      predicted ? ++cm.tp : ++cm.fn;
    else
      predicted ? ++cm.fp : ++cm.tn;
  }
  return cm;
}

MetricsRow classification_metrics(const ConfusionMatrix& cm,
                                  std::string subset) {
  MetricsRow row;
  row.subset = std::move(subset);
  row.tau = cm.threshold;
  row.cm = cm;
  const auto ratio = [](std::size_t num,
                        std::size_t den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
  };
  row.sensitivity = ratio(cm.tp, cm.tp + cm.fn);
  row.specificity = ratio(cm.tn, cm.tn + cm.fp);
  row.ppv = ratio(cm.tp, cm.tp + cm.fp);
  return row;
}

double roc_auc(std::span<const double> probs, std::span<const int> labels) {
  if (probs.size() != labels.size())
    throw DataError("roc_auc: probs/labels length mismatch");
  std::size_t n_pos = 0, n_neg = 0;
  for (int y : labels) (y == 1 ? n_pos : n_neg) += 1;
  if (n_pos == 0 || n_neg == 0)
    throw DataError("roc_auc: needs at least one positive and one negative "
                    "label");

  // Mann-Whitney statistic via average ranks; tied scores share the mean of
  // their rank range, which credits each tied pair exactly one half.
  std::vector<std::size_t> order(probs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return probs[a] < probs[b]; });
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && probs[order[j]] == probs[order[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) +
                             static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k)
      if (labels[order[k]] == 1) rank_sum_pos += avg_rank;
    i = j;
  }
  const double u = rank_sum_pos -
                   static_cast<double>(n_pos) *
                       (static_cast<double>(n_pos) + 1.0) / 2.0;
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

MetricsReport threshold_sweep(std::span<const double> probs,
                              std::span<const int> labels,
                              const std::vector<double>& taus,
                              const std::string& subset) {
  MetricsReport report;
  for (double tau : taus) {
    report.rows.push_back(classification_metrics(
        confusion_at_threshold(probs, labels, tau), subset));
  }
  std::optional<double> auc;
  try {
    auc = roc_auc(probs, labels);
  } catch (const DataError&) {
    auc = std::nullopt;  // single-class subset
  }
  report.subset_auc.emplace_back(subset, auc);
  report.combined_auc = auc;
  return report;
}

MetricsReport sweep_subsets(const std::vector<EvalSubset>& subsets,
                            const std::vector<double>& taus) {
  if (subsets.empty()) throw UsageError("sweep_subsets: no subsets given");
  MetricsReport report;
  std::vector<double> pooled_probs;
  std::vector<int> pooled_labels;
  for (double tau : taus) {
    ConfusionMatrix combined;
    combined.threshold = tau;
    for (const auto& s : subsets) {
      ConfusionMatrix cm = confusion_at_threshold(s.probs, s.labels, tau);
      combined.tp += cm.tp;
      combined.fp += cm.fp;
      combined.tn += cm.tn;
      combined.fn += cm.fn;
      report.rows.push_back(classification_metrics(cm, s.name));
    }
    report.rows.push_back(classification_metrics(combined, "combined"));
  }
  for (const auto& s : subsets) {
    pooled_probs.insert(pooled_probs.end(), s.probs.begin(), s.probs.end());
    pooled_labels.insert(pooled_labels.end(), s.labels.begin(),
                         s.labels.end());
    std::optional<double> auc;
    try {
      auc = roc_auc(s.probs, s.labels);
    } catch (const DataError&) {
      auc = std::nullopt;
    }
    report.subset_auc.emplace_back(s.name, auc);
  }
  try {
    report.combined_auc = roc_auc(pooled_probs, pooled_labels);
  } catch (const DataError&) {
    report.combined_auc = std::nullopt;
  }
  return report;
}

double median_probability(std::span<const double> probs) {
  if (probs.empty()) throw DataError("median_probability: empty list");
  std::vector<double> sorted(probs.begin(), probs.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  if (n % 2 == 1) return sorted[n / 2];
  return (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;
}

std::vector<std::pair<std::string, double>> triage_query(
    const Corpus& corpus, std::span<const double> probs,
    std::string_view base, double tau) {
  if (probs.size() != corpus.documents.size())
    throw DataError("triage_query: " + std::to_string(probs.size()) +
                    " probabilities for " +
                    std::to_string(corpus.documents.size()) + " documents");
  std::vector<std::pair<std::string, double>> hits;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] >= tau && contains_base_string(corpus.documents[i], base))
      hits.emplace_back(corpus.documents[i].id, probs[i]);
  }
  std::sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return hits;
}

std::vector<std::pair<double, double>> roc_points(
    std::span<const double> probs, std::span<const int> labels) {
  if (probs.size() != labels.size())
    throw DataError("roc_points: probs/labels length mismatch");
  double n_pos = 0, n_neg = 0;
  for (int y : labels) (y == 1 ? n_pos : n_neg) += 1;
  if (n_pos == 0 || n_neg == 0)
    throw DataError("roc_points: needs both classes");
  std::vector<std::size_t> order(probs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });
  std::vector<std::pair<double, double>> points;
  points.emplace_back(0.0, 0.0);
  double tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && probs[order[j]] == probs[order[i]]) ++j;
    for (std::size_t k = i; k < j; ++k)
      (labels[order[k]] == 1 ? tp : fp) += 1;
    points.emplace_back(fp / n_neg, tp / n_pos);
    i = j;
  }
  return points;
}

}  // namespace zsl
