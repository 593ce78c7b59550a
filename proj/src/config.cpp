#include "zsl/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "zsl/error.hpp"

namespace zsl {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Typed accessor over one section that records which keys were consumed so
// misspelled keys fail loudly.
class SectionReader {
 public:
  SectionReader(const IniFile& ini, const std::string& section)
      : section_(section) {
    auto it = ini.sections.find(section);
    if (it != ini.sections.end()) entries_ = &it->second;
  }

  std::optional<std::string> get(const std::string& key) {
    consumed_.insert(key);
    if (!entries_) return std::nullopt;
    auto it = entries_->find(key);
    if (it == entries_->end()) return std::nullopt;
    return it->second;
  }

  std::string require(const std::string& key) {
    auto v = get(key);
    if (!v)
      throw UsageError("config: missing required key \"" + key +
                       "\" in section [" + section_ + "]");
    return *v;
  }

  template <typename T, typename Parser>
  void read(const std::string& key, T& out, Parser parse) {
    auto v = get(key);
    if (!v) return;
    try {
      out = parse(*v);
    } catch (const UsageError&) {
      throw;
    } catch (const std::exception&) {
      throw UsageError("config: invalid value for \"" + key +
                       "\" in section [" + section_ + "]: " + *v);
    }
  }

  void reject_unknown() const {
    if (!entries_) return;
    for (const auto& [key, value] : *entries_) {
      if (!consumed_.count(key))
        throw UsageError("config: unknown key \"" + key + "\" in section [" +
                         section_ + "]");
    }
  }

 private:
  std::string section_;
  const std::map<std::string, std::string>* entries_ = nullptr;
  std::set<std::string> consumed_;
};

double parse_double(const std::string& s) { return std::stod(s); }
std::int64_t parse_int(const std::string& s) { return std::stoll(s); }
std::uint64_t parse_uint(const std::string& s) { return std::stoull(s); }

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw UsageError("config: expected boolean, got \"" + s + "\"");
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(std::stod(item));
  }
  if (out.empty()) throw UsageError("config: empty list");
  return out;
}

std::vector<std::size_t> parse_size_list(const std::string& s) {
  std::vector<std::size_t> out;
  for (double v : parse_double_list(s)) {
    if (v < 1) throw UsageError("config: list entries must be >= 1");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

void check_sections(const IniFile& ini, const std::set<std::string>& known) {
  for (const auto& [name, entries] : ini.sections) {
    if (!known.count(name))
      throw UsageError("config: unknown section [" + name + "]");
  }
}

}  // namespace

IniFile IniFile::parse_string(const std::string& text,
                              const std::string& origin) {
  IniFile ini;
  std::istringstream in(text);
  std::string line;
  std::string section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw UsageError(origin + ":" + std::to_string(lineno) +
                         ": malformed section header");
      section = trim(t.substr(1, t.size() - 2));
      if (section.empty())
        throw UsageError(origin + ":" + std::to_string(lineno) +
                         ": empty section name");
      ini.sections[section];
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw UsageError(origin + ":" + std::to_string(lineno) +
                       ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw UsageError(origin + ":" + std::to_string(lineno) + ": empty key");
    if (section.empty())
      throw UsageError(origin + ":" + std::to_string(lineno) +
                       ": key outside any section");
    auto [it, inserted] = ini.sections[section].emplace(key, value);
    if (!inserted)
      throw UsageError(origin + ":" + std::to_string(lineno) +
                       ": duplicate key \"" + key + "\"");
  }
  return ini;
}

IniFile IniFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("config file not readable: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str(), path);
}

PipelineConfig PipelineConfig::from_ini(const IniFile& ini) {
  check_sections(ini, {"corpora", "prep", "features", "embedding", "space",
                       "mlp", "eval", "run"});
  PipelineConfig cfg;

  SectionReader corpora(ini, "corpora");
  cfg.train_pos = corpora.require("train_pos");
  cfg.train_neg = corpora.require("train_neg");
  cfg.test_pos = corpora.require("test_pos");
  cfg.test_neg = corpora.require("test_neg");
  corpora.reject_unknown();

  SectionReader prep(ini, "prep");
  if (auto v = prep.get("lexicon")) cfg.lexicon_path = *v;
  prep.read("min_lexicon_len", cfg.min_lexicon_len,
            [](const std::string& s) {
              return static_cast<std::size_t>(parse_uint(s));
            });
  prep.reject_unknown();

  SectionReader features(ini, "features");
  features.read("n", cfg.n_features, [](const std::string& s) {
    return static_cast<std::size_t>(parse_uint(s));
  });
  features.read("tfidf_mean", cfg.tfidf_mean, [](const std::string& s) {
    if (s == "containing") return TfidfMean::ContainingDocs;
    if (s == "all") return TfidfMean::AllDocs;
    throw UsageError("config: tfidf_mean must be \"containing\" or \"all\"");
  });
  features.reject_unknown();

  SectionReader embedding(ini, "embedding");
  embedding.read("dim", cfg.dim,
                 [](const std::string& s) { return static_cast<int>(parse_int(s)); });
  embedding.read("window", cfg.window,
                 [](const std::string& s) { return static_cast<int>(parse_int(s)); });
  embedding.read("epochs", cfg.epochs,
                 [](const std::string& s) { return static_cast<int>(parse_int(s)); });
  embedding.read("negatives", cfg.negatives,
                 [](const std::string& s) { return static_cast<int>(parse_int(s)); });
  embedding.read("min_count", cfg.min_count,
                 [](const std::string& s) { return static_cast<int>(parse_int(s)); });
  embedding.read("lr_start", cfg.lr_start, parse_double);
  embedding.read("lr_end", cfg.lr_end, parse_double);
  embedding.read("subsample", cfg.subsample, parse_double);
  embedding.read("threads", cfg.embed_threads,
                 [](const std::string& s) { return static_cast<int>(parse_int(s)); });
  embedding.reject_unknown();

  SectionReader space(ini, "space");
  space.read("m", cfg.m, [](const std::string& s) {
    return static_cast<std::size_t>(parse_uint(s));
  });
  space.read("window", cfg.space_window,
             [](const std::string& s) { return static_cast<int>(parse_int(s)); });
  space.reject_unknown();

  SectionReader mlp(ini, "mlp");
  mlp.read("batch_size", cfg.batch_size, [](const std::string& s) {
    return static_cast<std::size_t>(parse_uint(s));
  });
  mlp.read("max_epochs", cfg.max_epochs, [](const std::string& s) {
    return static_cast<std::size_t>(parse_uint(s));
  });
  mlp.read("patience", cfg.patience, [](const std::string& s) {
    return static_cast<std::size_t>(parse_uint(s));
  });
  mlp.read("hidden", cfg.hidden, parse_size_list);
  mlp.read("dropout", cfg.dropout, parse_double);
  mlp.read("lr", cfg.adam.lr, parse_double);
  mlp.read("beta1", cfg.adam.beta1, parse_double);
  mlp.read("beta2", cfg.adam.beta2, parse_double);
  mlp.read("epsilon", cfg.adam.epsilon, parse_double);
  mlp.reject_unknown();

  SectionReader eval(ini, "eval");
  eval.read("taus", cfg.taus, parse_double_list);
  eval.read("triage_base", cfg.triage_base,
            [](const std::string& s) { return s; });
  eval.read("triage_tau", cfg.triage_tau, parse_double);
  eval.reject_unknown();

  SectionReader run(ini, "run");
  run.read("seed", cfg.seed, parse_uint);
  run.read("threads", cfg.threads,
           [](const std::string& s) { return static_cast<int>(parse_int(s)); });
  run.read("out_dir", cfg.out_dir, [](const std::string& s) { return s; });
  run.read("baseline", cfg.baseline, parse_bool);
  run.read("baseline_k", cfg.baseline_k, [](const std::string& s) {
    return static_cast<std::size_t>(parse_uint(s));
  });
  run.reject_unknown();

  return cfg;
}

PipelineConfig PipelineConfig::from_file(const std::string& path) {
  return from_ini(IniFile::parse_file(path));
}

SynthConfig synth_config_from_ini(const IniFile& ini) {
  check_sections(ini, {"synth"});
  SynthConfig cfg;
  SectionReader synth(ini, "synth");
  auto size = [](const std::string& s) {
    return static_cast<std::size_t>(parse_uint(s));
  };
  synth.read("seed", cfg.seed, parse_uint);
  synth.read("train_pos_docs", cfg.train_pos_docs, size);
  synth.read("train_neg_docs", cfg.train_neg_docs, size);
  synth.read("test_pos_docs", cfg.test_pos_docs, size);
  synth.read("test_neg_docs", cfg.test_neg_docs, size);
  synth.read("doc_len_min", cfg.doc_len_min, size);
  synth.read("doc_len_max", cfg.doc_len_max, size);
  synth.read("shared_vocab_size", cfg.shared_vocab_size, size);
  synth.read("topics", cfg.topics, size);
  synth.read("topic_mix", cfg.topic_mix, parse_double);
  synth.read("signal_terms", cfg.signal_terms, size);
  synth.read("context_terms_per_signal", cfg.context_terms_per_signal, size);
  synth.read("signal_density", cfg.signal_density, parse_double);
  synth.read("signal_gap_max", cfg.signal_gap_max, size);
  synth.read("confounder_rate", cfg.confounder_rate, parse_double);
  synth.read("base_token", cfg.base_token,
             [](const std::string& s) { return s; });
  synth.read("zipf_exponent", cfg.zipf_exponent, parse_double);
  synth.reject_unknown();
  return cfg;
}

SynthConfig synth_config_from_file(const std::string& path) {
  return synth_config_from_ini(IniFile::parse_file(path));
}

}  // namespace zsl
