#include "lmke/tokenizer.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>

namespace lmke {

std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : text) {
    bool word_char = c >= 0x80 || std::isalnum(c);
    if (word_char) {
      cur.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

WordVocab::WordVocab() {
  words_.push_back(kUnkWord);
  index_.emplace(kUnkWord, kUnkId);
}

WordVocab WordVocab::build(const DescriptionStore& store, int min_count) {
  // std::map keeps the tie order alphabetical without a second sort key pass.
  std::map<std::string, int64_t> counts;
  auto count_all = [&](const std::vector<std::string>& texts) {
    for (const auto& t : texts)
      for (auto& w : split_words(t)) counts[w] += 1;
  };
  count_all(store.entity_text);
  count_all(store.relation_text);

  std::vector<std::pair<std::string, int64_t>> ordered(counts.begin(), counts.end());
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  WordVocab v;
  for (auto& [word, count] : ordered) {
    if (count < min_count) continue;
    v.index_.emplace(word, static_cast<int>(v.words_.size()));
    v.words_.push_back(word);
  }
  return v;
}

int WordVocab::id_of(const std::string& word) const {
  auto it = index_.find(word);
  return it == index_.end() ? kUnkId : it->second;
}

std::vector<int> WordVocab::encode(const std::string& text) const {
  std::vector<int> ids;
  for (auto& w : split_words(text)) ids.push_back(id_of(w));
  return ids;
}

void WordVocab::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write word vocabulary: " + path);
  for (const auto& w : words_) out << w << "\n";
}

WordVocab WordVocab::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read word vocabulary: " + path);
  WordVocab v;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++lineno;
    if (lineno == 1) {
      if (line != kUnkWord) throw Error(path + ": first vocabulary entry must be " + std::string(kUnkWord));
      continue;
    }
    if (line.empty()) continue;
    v.index_.emplace(line, static_cast<int>(v.words_.size()));
    v.words_.push_back(line);
  }
  return v;
}

}  // namespace lmke
