#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "zsl/config.hpp"

namespace zsl {

struct StageRecord {
  std::string name;
  std::map<std::string, std::string> inputs;   // label -> sha256
  std::map<std::string, std::string> outputs;  // label -> sha256
};

struct RunManifest {
  std::string tool_version;
  std::string started_at, finished_at;  // informational; not digest-compared
  std::uint64_t seed = 0;
  int threads = 1;
  std::map<std::string, std::string> params;  // flattened hyperparameters
  std::vector<StageRecord> stages;

  // Every artifact digest recorded by any stage, keyed "stage/label".
  // Deterministic reruns must reproduce this map exactly.
  std::map<std::string, std::string> digest_map() const;
};

void save_manifest(const RunManifest& manifest, const std::string& path);
RunManifest load_manifest(const std::string& path);

struct RunSummary {
  RunManifest manifest;
  std::string manifest_path;
  std::string report_path;                  // ZSL report (json)
  std::optional<std::string> baseline_report_path;
  std::optional<double> zsl_auc;            // combined test AUC
  std::optional<double> baseline_auc;
};

// Executes prep -> features -> embed -> space -> map -> train -> classify
// -> eval, writing every artifact and the manifest under config.out_dir.
// With config.baseline set, the bigram comparator pipeline runs as well
// (identical network and training, bigram count features).
RunSummary run_pipeline(const PipelineConfig& config);

}  // namespace zsl
