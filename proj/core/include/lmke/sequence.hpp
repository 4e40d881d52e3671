#pragma once

#include <vector>

#include "lmke/tokenizer.hpp"
#include "lmke/types.hpp"

namespace lmke {

/// Token kinds each index a separate embedding table; entity and relation
/// tokens live in the same vector space as words.
enum class TokenKind : uint8_t { Word, Entity, Relation, Special };

/// Rows of the special-token table.
enum SpecialToken : int { kPad = 0, kCls = 1, kSep = 2, kMask = 3, kNumSpecials = 4 };

struct Token {
  TokenKind kind;
  int id;

  bool operator==(const Token& o) const { return kind == o.kind && id == o.id; }
};

/// Token stream for one encoder input. Starts with CLS, ends with SEP.
/// Role positions record where the triple slots (or MASK / key entity) sit;
/// -1 means the role is absent.
struct TokenSequence {
  std::vector<Token> tokens;
  int cls_pos = 0;
  int head_pos = -1;
  int rel_pos = -1;
  int tail_pos = -1;
  int mask_pos = -1;
  int entity_pos = -1;

  int length() const { return static_cast<int>(tokens.size()); }
};

/// Splits `budget` token slots across segments proportionally to their
/// untruncated lengths. Integer shares are floor(budget*len/total); leftover
/// slots go to the largest fractional remainders, earlier segments first on
/// ties. Returns the per-segment kept lengths (prefix truncation).
std::vector<int> proportional_budget(const std::vector<int>& lengths, int budget);

/// Builds triple / query / key token sequences over one description store.
class SequenceBuilder {
 public:
  SequenceBuilder(const DescriptionStore& store, const WordVocab& words, int max_len)
      : store_(&store), words_(&words), max_len_(max_len) {}

  /// [CLS, h, words(s_h), r, words(s_r), t, words(s_t), SEP], description
  /// segments truncated per proportional_budget. Role tokens are never
  /// dropped; requires max_len >= 5.
  TokenSequence triple_sequence(EntityId h, RelationId r, EntityId t) const;

  /// The missing side is replaced by MASK together with its description:
  ///   tail missing: [CLS, h, words(s_h), r, words(s_r), MASK, SEP]
  ///   head missing: [CLS, MASK, r, words(s_r), t, words(s_t), SEP]
  TokenSequence query_sequence(EntityId given, RelationId r, Side missing) const;

  /// [CLS, e, words(s_e), SEP], truncated to max_len.
  TokenSequence key_sequence(EntityId e) const;

  int max_len() const { return max_len_; }

 private:
  const DescriptionStore* store_;
  const WordVocab* words_;
  int max_len_;
};

}  // namespace lmke
