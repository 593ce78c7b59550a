#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace zsl {

struct Document {
  std::string id;
  std::string text;
  std::vector<std::string> tokens;  // filled by preprocessing
  std::optional<int> weak_label;    // 0/1 when known
  std::map<std::string, std::string> meta;
};

struct Corpus {
  std::string name;
  std::vector<Document> documents;
  std::optional<int> label;  // corpus-level weak label

  std::size_t size() const { return documents.size(); }
};

}  // namespace zsl
