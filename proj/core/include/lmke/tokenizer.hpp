#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "lmke/dataset.hpp"

namespace lmke {

/// Lowercases and splits `text` on any non-alphanumeric byte. Bytes outside
/// ASCII are kept as word characters, so UTF-8 text stays intact.
std::vector<std::string> split_words(const std::string& text);

/// Word-level vocabulary over description text. Id 0 is reserved for the
/// unknown-word token; the rest are frequency-ordered (ties alphabetical),
/// restricted to words seen at least `min_count` times.
class WordVocab {
 public:
  static constexpr int kUnkId = 0;
  static constexpr const char* kUnkWord = "<unk>";

  WordVocab();
  static WordVocab build(const DescriptionStore& store, int min_count = 1);

  int id_of(const std::string& word) const;
  const std::string& word_of(int id) const { return words_.at(id); }
  int size() const { return static_cast<int>(words_.size()); }

  /// Word ids for `text`; empty text gives an empty list.
  std::vector<int> encode(const std::string& text) const;

  /// One token per line, vocabulary order.
  void save(const std::string& path) const;
  static WordVocab load(const std::string& path);

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace lmke
