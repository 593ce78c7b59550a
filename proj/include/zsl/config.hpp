#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "zsl/mlp.hpp"
#include "zsl/synth.hpp"
#include "zsl/tfidf.hpp"

namespace zsl {

// Minimal INI reader: [section] headers, key = value lines, '#' or ';'
// comments. Duplicate keys within a section are an error.
struct IniFile {
  std::map<std::string, std::map<std::string, std::string>> sections;

  static IniFile parse_file(const std::string& path);
  static IniFile parse_string(const std::string& text,
                              const std::string& origin);
};

// Full pipeline configuration. Defaults are the published settings
// (n = 1000, m = 50, dim = 300, window = 5, epochs = 10,
// thresholds 0.15/0.5/0.85). Unknown sections or keys are rejected.
struct PipelineConfig {
  // [corpora]
  std::string train_pos, train_neg, test_pos, test_neg;
  // [prep]
  std::optional<std::string> lexicon_path;
  std::size_t min_lexicon_len = 4;
  // [features]
  std::size_t n_features = 1000;
  TfidfMean tfidf_mean = TfidfMean::ContainingDocs;
  // [embedding]
  int dim = 300;
  int window = 5;
  int epochs = 10;
  int negatives = 5;
  int min_count = 5;
  double lr_start = 0.025;
  double lr_end = 1e-4;
  double subsample = 0.0;
  int embed_threads = 1;  // >1 is a non-deterministic speed mode
  // [space]
  std::size_t m = 50;
  int space_window = 5;
  // [mlp]
  std::size_t batch_size = 64;
  std::size_t max_epochs = 100;
  std::size_t patience = 5;
  std::vector<std::size_t> hidden = kDefaultHidden;
  double dropout = 0.5;
  AdamConfig adam;
  // [eval]
  std::vector<double> taus = {0.15, 0.5, 0.85};
  std::string triage_base = "suicid";
  double triage_tau = 0.90;
  // [run]
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out_dir = "run-out";
  bool baseline = false;
  std::size_t baseline_k = 163;

  static PipelineConfig from_ini(const IniFile& ini);
  static PipelineConfig from_file(const std::string& path);
};

// [synth] section of a synth configuration file.
SynthConfig synth_config_from_ini(const IniFile& ini);
SynthConfig synth_config_from_file(const std::string& path);

}  // namespace zsl
