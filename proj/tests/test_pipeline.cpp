#include "zsl/pipeline.hpp"

#include <fstream>

#include "doctest.h"

#include "test_support.hpp"
#include "zsl/artifacts.hpp"
#include "zsl/error.hpp"
#include "zsl/synth.hpp"
#include "zsl/textprep.hpp"

using namespace zsl;

namespace {

SynthConfig tiny_synth() {
  SynthConfig cfg;
  cfg.seed = 11;
  cfg.train_pos_docs = 250;
  cfg.train_neg_docs = 250;
  cfg.test_pos_docs = 80;
  cfg.test_neg_docs = 80;
  cfg.shared_vocab_size = 250;
  cfg.signal_terms = 15;
  cfg.signal_density = 3.0;
  return cfg;
}

// Writes the four corpora and returns a pipeline config pointing at them,
// scaled down for unit-test speed.
PipelineConfig tiny_pipeline(const test::TempDir& dir,
                             const std::string& out_name) {
  SynthCorpora corpora = generate_labeled_corpora(tiny_synth(), 4);
  save_corpus(corpora.train_pos, dir.str("train_pos.jsonl"), false);
  save_corpus(corpora.train_neg, dir.str("train_neg.jsonl"), false);
  save_corpus(corpora.test_pos, dir.str("test_pos.jsonl"), false);
  save_corpus(corpora.test_neg, dir.str("test_neg.jsonl"), false);

  PipelineConfig cfg;
  cfg.train_pos = dir.str("train_pos.jsonl");
  cfg.train_neg = dir.str("train_neg.jsonl");
  cfg.test_pos = dir.str("test_pos.jsonl");
  cfg.test_neg = dir.str("test_neg.jsonl");
  cfg.n_features = 400;
  cfg.dim = 16;
  cfg.epochs = 3;
  cfg.min_count = 5;
  cfg.m = 20;
  cfg.max_epochs = 12;
  cfg.patience = 4;
  cfg.seed = 21;
  cfg.threads = 4;
  cfg.out_dir = dir.str(out_name);
  return cfg;
}

}  // namespace

TEST_CASE("ini parsing rejects malformed input") {
  CHECK_THROWS_AS(IniFile::parse_string("key = 1\n", "t"), UsageError);
  CHECK_THROWS_AS(IniFile::parse_string("[s]\nkey\n", "t"), UsageError);
  CHECK_THROWS_AS(IniFile::parse_string("[s]\nk = 1\nk = 2\n", "t"),
                  UsageError);
  IniFile ok = IniFile::parse_string("# comment\n[s]\nk = v\n", "t");
  CHECK(ok.sections.at("s").at("k") == "v");
}

TEST_CASE("pipeline config: defaults, unknown keys, missing keys") {
  const std::string base =
      "[corpora]\n"
      "train_pos = a.jsonl\n"
      "train_neg = b.jsonl\n"
      "test_pos = c.jsonl\n"
      "test_neg = d.jsonl\n";
  SUBCASE("defaults are the published settings") {
    PipelineConfig cfg =
        PipelineConfig::from_ini(IniFile::parse_string(base, "t"));
    CHECK(cfg.n_features == 1000);
    CHECK(cfg.m == 50);
    CHECK(cfg.dim == 300);
    CHECK(cfg.window == 5);
    CHECK(cfg.epochs == 10);
    CHECK(cfg.taus == std::vector<double>{0.15, 0.5, 0.85});
    CHECK(cfg.hidden == std::vector<std::size_t>{70, 30, 70, 30, 70});
    CHECK(cfg.adam.lr == 0.0012);
    CHECK(cfg.adam.beta1 == 0.92);
    CHECK(cfg.adam.beta2 == 0.9992);
    CHECK(cfg.adam.epsilon == 1e-8);
    CHECK(cfg.triage_tau == 0.90);
    CHECK(cfg.triage_base == "suicid");
  }
  SUBCASE("missing corpus key is named") {
    const std::string missing =
        "[corpora]\ntrain_pos = a\ntest_pos = c\ntest_neg = d\n";
    CHECK_THROWS_WITH_AS(
        PipelineConfig::from_ini(IniFile::parse_string(missing, "t")),
        doctest::Contains("train_neg"), UsageError);
  }
  SUBCASE("unknown keys are named") {
    CHECK_THROWS_WITH_AS(
        PipelineConfig::from_ini(
            IniFile::parse_string(base + "[mlp]\nbatchsize = 3\n", "t")),
        doctest::Contains("batchsize"), UsageError);
  }
  SUBCASE("unknown sections are rejected") {
    CHECK_THROWS_WITH_AS(
        PipelineConfig::from_ini(
            IniFile::parse_string(base + "[mpl]\nbatch_size = 3\n", "t")),
        doctest::Contains("mpl"), UsageError);
  }
  SUBCASE("value overrides apply") {
    PipelineConfig cfg = PipelineConfig::from_ini(IniFile::parse_string(
        base + "[embedding]\ndim = 50\n[run]\nseed = 9\nbaseline = true\n",
        "t"));
    CHECK(cfg.dim == 50);
    CHECK(cfg.seed == 9);
    CHECK(cfg.baseline);
  }
}

TEST_CASE("synth config parsing") {
  SynthConfig cfg = synth_config_from_ini(IniFile::parse_string(
      "[synth]\nseed = 3\nsignal_density = 1.5\nconfounder_rate = 0.25\n",
      "t"));
  CHECK(cfg.seed == 3);
  CHECK(cfg.signal_density == 1.5);
  CHECK(cfg.confounder_rate == 0.25);
  CHECK_THROWS_AS(
      synth_config_from_ini(IniFile::parse_string("[synth]\nsd = 1\n", "t")),
      UsageError);
}

TEST_CASE("pipeline runs end to end and is reproducible") {
  test::TempDir dir("pipe");
  PipelineConfig cfg = tiny_pipeline(dir, "out1");
  RunSummary first = run_pipeline(cfg);

  SUBCASE("manifest lists the eight core stages with digests") {
    REQUIRE(first.manifest.stages.size() == 8);
    const std::vector<std::string> expected = {
        "prep", "features", "embed", "space",
        "map",  "train",    "classify", "eval"};
    for (std::size_t i = 0; i < expected.size(); ++i)
      CHECK(first.manifest.stages[i].name == expected[i]);
    for (const auto& stage : first.manifest.stages) {
      for (const auto& [label, digest] : stage.outputs)
        CHECK(digest.size() == 64);
    }
    RunManifest reloaded = load_manifest(first.manifest_path);
    CHECK(reloaded.digest_map() == first.manifest.digest_map());
    CHECK(reloaded.params == first.manifest.params);
  }

  SUBCASE("identical config and seed reproduce identical digests") {
    PipelineConfig cfg2 = tiny_pipeline(dir, "out2");
    RunSummary second = run_pipeline(cfg2);
    CHECK(first.manifest.digest_map() == second.manifest.digest_map());
    auto probs1 = load_probs(dir.str("out1") + "/probs_test_neg.json");
    auto probs2 = load_probs(dir.str("out2") + "/probs_test_neg.json");
    CHECK(probs1.probs == probs2.probs);
  }

  SUBCASE("report is well-formed") {
    EvalReport report = load_report(first.report_path);
    CHECK(report.metrics.rows.size() == 3 * 3);  // 2 subsets + combined
    CHECK(report.median_neg_prob.has_value());
    CHECK(report.metrics.combined_auc.has_value());
  }

  SUBCASE("rerunning a downstream stage leaves upstream artifacts alone") {
    // Re-map from the saved space and compare with the saved vectors.
    const std::string space_digest =
        first.manifest.digest_map().at("map/in/space");
    SemanticSpace space = load_space(dir.str("out1") + "/space.json");
    Corpus prepped = load_corpus(dir.str("out1") + "/prep/test_pos.jsonl");
    auto remapped = map_corpus(prepped, space, 2);
    auto saved = load_vectors(dir.str("out1") + "/vectors/test_pos.json");
    REQUIRE(remapped.size() == saved.size());
    for (std::size_t i = 0; i < saved.size(); ++i)
      CHECK(remapped[i].values == saved[i].values);
    CHECK(first.manifest.digest_map().at("map/in/space") == space_digest);
  }
}

TEST_CASE("pipeline reports the failing stage") {
  test::TempDir dir("pipefail");
  PipelineConfig cfg = tiny_pipeline(dir, "out");
  cfg.train_neg = dir.str("does-not-exist.jsonl");
  CHECK_THROWS_WITH_AS(run_pipeline(cfg), doctest::Contains("prep"),
                       DataError);
}
