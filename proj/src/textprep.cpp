#include "zsl/textprep.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <omp.h>

#include "json.hpp"

#include "zsl/error.hpp"

namespace zsl {

namespace {

// Folds one Unicode codepoint to ASCII letters. Returns an empty view when
// no mapping exists, in which case the character acts as punctuation.
std::string_view fold_codepoint(char32_t cp) {
  switch (cp) {
    case U'à': case U'á': case U'â': case U'ã': case U'ä': case U'å':
    case U'À': case U'Á': case U'Â': case U'Ã': case U'Ä': case U'Å':
    case U'ā': case U'ă': case U'ą': case U'Ā': case U'Ă': case U'Ą':
      return "a";
    case U'ç': case U'Ç': case U'ć': case U'Ć': case U'č': case U'Č':
      return "c";
    case U'è': case U'é': case U'ê': case U'ë':
    case U'È': case U'É': case U'Ê': case U'Ë':
    case U'ē': case U'ĕ': case U'ė': case U'ę': case U'ě':
    case U'Ē': case U'Ĕ': case U'Ė': case U'Ę': case U'Ě':
      return "e";
    case U'ì': case U'í': case U'î': case U'ï':
    case U'Ì': case U'Í': case U'Î': case U'Ï':
    case U'ī': case U'ĭ': case U'į': case U'ı':
      return "i";
    case U'ñ': case U'Ñ': case U'ń': case U'ň': case U'Ń': case U'Ň':
      return "n";
    case U'ò': case U'ó': case U'ô': case U'õ': case U'ö': case U'ø':
    case U'Ò': case U'Ó': case U'Ô': case U'Õ': case U'Ö': case U'Ø':
    case U'ō': case U'ŏ': case U'ő':
      return "o";
    case U'ù': case U'ú': case U'û': case U'ü':
    case U'Ù': case U'Ú': case U'Û': case U'Ü':
    case U'ū': case U'ŭ': case U'ů': case U'ű':
      return "u";
    case U'ý': case U'ÿ': case U'Ý':
      return "y";
    case U'ž': case U'Ž': case U'ź': case U'Ź': case U'ż': case U'Ż':
      return "z";
    case U'š': case U'Š': case U'ś': case U'Ś':
      return "s";
    case U'ß':
      return "ss";
    case U'æ': case U'Æ':
      return "ae";
    case U'œ': case U'Œ':
      return "oe";
    case U'đ': case U'Đ': case U'ð': case U'Ð':
      return "d";
    case U'þ': case U'Þ':
      return "th";
    case U'ł': case U'Ł':
      return "l";
    default:
      return {};
  }
}

// Decodes the UTF-8 sequence starting at s[i]. Invalid bytes decode to
// U+FFFD and consume one byte, which downstream treats as punctuation.
char32_t decode_utf8(std::string_view s, std::size_t& i) {
  unsigned char b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  auto cont = [&](std::size_t k) {
    return i + k < s.size() &&
           (static_cast<unsigned char>(s[i + k]) & 0xc0) == 0x80;
  };
  if ((b0 & 0xe0) == 0xc0 && cont(1)) {
    char32_t cp = (b0 & 0x1fu) << 6 |
                  (static_cast<unsigned char>(s[i + 1]) & 0x3fu);
    i += 2;
    return cp;
  }
  if ((b0 & 0xf0) == 0xe0 && cont(1) && cont(2)) {
    char32_t cp = (b0 & 0x0fu) << 12 |
                  (static_cast<unsigned char>(s[i + 1]) & 0x3fu) << 6 |
                  (static_cast<unsigned char>(s[i + 2]) & 0x3fu);
    i += 3;
    return cp;
  }
  if ((b0 & 0xf8) == 0xf0 && cont(1) && cont(2) && cont(3)) {
    char32_t cp = (b0 & 0x07u) << 18 |
                  (static_cast<unsigned char>(s[i + 1]) & 0x3fu) << 12 |
                  (static_cast<unsigned char>(s[i + 2]) & 0x3fu) << 6 |
                  (static_cast<unsigned char>(s[i + 3]) & 0x3fu);
    i += 4;
    return cp;
  }
  ++i;
  return 0xfffd;
}

// First pass: lowercase, fold, and cut the text into chunks at every
// character that is neither a letter nor a digit. Chunks containing a digit
// are dropped ("did not entirely consist of letters"); digits are not
// boundaries, so "2x" vanishes as a whole instead of leaking an "x".
std::vector<std::string> letter_tokens(std::string_view raw) {
  std::vector<std::string> out;
  std::string chunk;
  bool has_digit = false;
  auto flush = [&] {
    if (!chunk.empty() && !has_digit) out.push_back(chunk);
    chunk.clear();
    has_digit = false;
  };
  std::size_t i = 0;
  while (i < raw.size()) {
    char32_t cp = decode_utf8(raw, i);
    if (cp < 0x80) {
      char c = static_cast<char>(cp);
      if (std::isalpha(static_cast<unsigned char>(c))) {
        chunk.push_back(static_cast<char>(
            std::tolower(static_cast<unsigned char>(c))));
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        chunk.push_back(c);
        has_digit = true;
      } else {
        flush();
      }
    } else {
      std::string_view folded = fold_codepoint(cp);
      if (folded.empty()) {
        flush();
      } else {
        chunk.append(folded);
      }
    }
  }
  flush();
  return out;
}

}  // namespace

SplitLexicon::SplitLexicon(std::unordered_set<std::string> words)
    : words_(std::move(words)) {
  min_len_ = words_.empty() ? 0 : SIZE_MAX;
  for (const auto& w : words_) {
    max_len_ = std::max(max_len_, w.size());
    min_len_ = std::min(min_len_, w.size());
  }
}

SplitLexicon SplitLexicon::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("lexicon file not readable: " + path);
  std::unordered_set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
      line.pop_back();
    if (!line.empty()) words.insert(line);
  }
  return SplitLexicon(std::move(words));
}

bool SplitLexicon::contains(std::string_view word) const {
  return words_.count(std::string(word)) > 0;
}

bool SplitLexicon::decompose(const std::string& token,
                             std::vector<std::string>& parts) const {
  parts.clear();
  if (words_.empty() || token.size() < 2 * min_len_) return false;
  std::size_t pos = 0;
  while (pos < token.size()) {
    std::size_t remaining = token.size() - pos;
    std::size_t longest = std::min(remaining, max_len_);
    // A decomposition must yield at least two parts, so the first part may
    // not swallow the entire token.
    if (pos == 0 && longest == token.size()) --longest;
    bool matched = false;
    for (std::size_t len = longest; len >= min_len_ && len >= 1; --len) {
      if (words_.count(token.substr(pos, len))) {
        parts.push_back(token.substr(pos, len));
        pos += len;
        matched = true;
        break;
      }
    }
    if (!matched) return false;
  }
  return parts.size() >= 2;
}

std::vector<std::string> SplitLexicon::split(const std::string& token) const {
  std::vector<std::string> parts;
  if (!decompose(token, parts)) return {token};
  // Split parts recursively so the output is a fixpoint: re-preprocessing
  // the joined result reproduces it.
  std::vector<std::string> out;
  for (const auto& p : parts) {
    auto sub = split(p);
    out.insert(out.end(), sub.begin(), sub.end());
  }
  return out;
}

std::vector<std::string> preprocess(std::string_view raw,
                                    const SplitLexicon& lexicon) {
  std::vector<std::string> candidates = letter_tokens(raw);
  if (lexicon.empty()) return candidates;
  std::vector<std::string> out;
  out.reserve(candidates.size());
  for (const auto& tok : candidates) {
    auto parts = lexicon.split(tok);
    out.insert(out.end(), parts.begin(), parts.end());
  }
  return out;
}

SplitLexicon build_corpus_lexicon(const Corpus& corpus, std::size_t min_len) {
  std::unordered_set<std::string> words;
  for (const auto& doc : corpus.documents) {
    for (const auto& tok : letter_tokens(doc.text)) {
      if (tok.size() >= min_len) words.insert(tok);
    }
  }
  return SplitLexicon(std::move(words));
}

void preprocess_corpus(Corpus& corpus,
                       const std::optional<SplitLexicon>& lexicon,
                       std::size_t min_lexicon_len, int threads) {
  const SplitLexicon lex =
      lexicon ? *lexicon : build_corpus_lexicon(corpus, min_lexicon_len);
  const std::int64_t n = static_cast<std::int64_t>(corpus.documents.size());
#pragma omp parallel for schedule(dynamic, 16) num_threads(std::max(1, threads))
  for (std::int64_t i = 0; i < n; ++i) {
    auto& doc = corpus.documents[static_cast<std::size_t>(i)];
    doc.tokens = preprocess(doc.text, lex);
  }
}

Corpus load_corpus(const std::string& path, std::optional<int> expected_label) {
  std::ifstream in(path);
  if (!in) throw DataError("corpus file not readable: " + path);
  Corpus corpus;
  // Corpus name defaults to the file stem.
  std::size_t slash = path.find_last_of("/\\");
  std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
  std::size_t dot = base.find_last_of('.');
  corpus.name = dot == std::string::npos ? base : base.substr(0, dot);
  corpus.label = expected_label;

  std::unordered_set<std::string> seen_ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": malformed record: " + e.what());
    }
    if (!rec.is_object() || !rec.contains("id") || !rec.contains("text") ||
        !rec["id"].is_string() || !rec["text"].is_string()) {
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": malformed record: id and text string fields required");
    }
    Document doc;
    doc.id = rec["id"].get<std::string>();
    doc.text = rec["text"].get<std::string>();
    if (!seen_ids.insert(doc.id).second) {
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": duplicate document id \"" + doc.id + "\"");
    }
    if (rec.contains("label") && !rec["label"].is_null()) {
      int label = rec["label"].get<int>();
      if (label != 0 && label != 1)
        throw DataError(path + ":" + std::to_string(lineno) +
                        ": label must be 0 or 1");
      doc.weak_label = label;
    } else {
      doc.weak_label = expected_label;
    }
    if (rec.contains("tokens")) {
      doc.tokens = rec["tokens"].get<std::vector<std::string>>();
    }
    if (rec.contains("meta") && rec["meta"].is_object()) {
      for (auto& [k, v] : rec["meta"].items())
        doc.meta[k] = v.get<std::string>();
    }
    corpus.documents.push_back(std::move(doc));
  }
  if (corpus.documents.empty())
    throw DataError("corpus is empty: " + path);
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::string& path,
                 bool with_tokens) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write corpus file: " + path);
  for (const auto& doc : corpus.documents) {
    nlohmann::json rec;
    rec["id"] = doc.id;
    rec["text"] = doc.text;
    if (doc.weak_label) rec["label"] = *doc.weak_label;
    if (with_tokens && !doc.tokens.empty()) rec["tokens"] = doc.tokens;
    if (!doc.meta.empty()) rec["meta"] = doc.meta;
    out << rec.dump() << '\n';
  }
  if (!out) throw DataError("failed writing corpus file: " + path);
}

bool contains_base_string(const Document& doc, std::string_view base) {
  if (base.empty()) throw UsageError("base string must be non-empty");
  for (const auto& tok : doc.tokens) {
    if (tok.find(base) != std::string::npos) return true;
  }
  return false;
}

}  // namespace zsl
