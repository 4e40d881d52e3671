#include "lmke/sequence.hpp"

#include <algorithm>
#include <numeric>

namespace lmke {

std::vector<int> proportional_budget(const std::vector<int>& lengths, int budget) {
  const int64_t total = std::accumulate(lengths.begin(), lengths.end(), int64_t{0});
  std::vector<int> quota(lengths.size(), 0);
  if (total <= budget) {
    for (size_t i = 0; i < lengths.size(); ++i) quota[i] = lengths[i];
    return quota;
  }
  int64_t assigned = 0;
  std::vector<int64_t> remainder(lengths.size());
  for (size_t i = 0; i < lengths.size(); ++i) {
    int64_t num = static_cast<int64_t>(budget) * lengths[i];
    quota[i] = static_cast<int>(num / total);
    remainder[i] = num % total;
    assigned += quota[i];
  }
  std::vector<size_t> order(lengths.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return remainder[a] > remainder[b]; });
  for (size_t k = 0; assigned < budget && k < order.size(); ++k) {
    size_t i = order[k];
    if (quota[i] < lengths[i]) {
      quota[i] += 1;
      assigned += 1;
    }
  }
  return quota;
}

namespace {

void append_words(TokenSequence& seq, const std::vector<int>& ids, int keep) {
  for (int i = 0; i < keep; ++i) seq.tokens.push_back({TokenKind::Word, ids[i]});
}

}  // namespace

TokenSequence SequenceBuilder::triple_sequence(EntityId h, RelationId r, EntityId t) const {
  constexpr int kFixed = 5;  // CLS h r t SEP
  if (max_len_ < kFixed)
    throw Error("max sequence length " + std::to_string(max_len_) +
                " cannot fit CLS, three role tokens and SEP");
  auto sh = words_->encode(store_->entity(h));
  auto sr = words_->encode(store_->relation(r));
  auto st = words_->encode(store_->entity(t));
  auto quota = proportional_budget(
      {static_cast<int>(sh.size()), static_cast<int>(sr.size()), static_cast<int>(st.size())},
      max_len_ - kFixed);

  TokenSequence seq;
  seq.tokens.push_back({TokenKind::Special, kCls});
  seq.head_pos = seq.length();
  seq.tokens.push_back({TokenKind::Entity, h});
  append_words(seq, sh, quota[0]);
  seq.rel_pos = seq.length();
  seq.tokens.push_back({TokenKind::Relation, r});
  append_words(seq, sr, quota[1]);
  seq.tail_pos = seq.length();
  seq.tokens.push_back({TokenKind::Entity, t});
  append_words(seq, st, quota[2]);
  seq.tokens.push_back({TokenKind::Special, kSep});
  return seq;
}

TokenSequence SequenceBuilder::query_sequence(EntityId given, RelationId r, Side missing) const {
  constexpr int kFixed = 5;  // CLS given r MASK SEP
  if (max_len_ < kFixed)
    throw Error("max sequence length " + std::to_string(max_len_) +
                " cannot fit CLS, three role tokens and SEP");
  auto se = words_->encode(store_->entity(given));
  auto sr = words_->encode(store_->relation(r));
  auto quota = proportional_budget(
      {static_cast<int>(se.size()), static_cast<int>(sr.size())}, max_len_ - kFixed);

  TokenSequence seq;
  seq.tokens.push_back({TokenKind::Special, kCls});
  if (missing == Side::Tail) {
    seq.head_pos = seq.length();
    seq.tokens.push_back({TokenKind::Entity, given});
    append_words(seq, se, quota[0]);
    seq.rel_pos = seq.length();
    seq.tokens.push_back({TokenKind::Relation, r});
    append_words(seq, sr, quota[1]);
    seq.mask_pos = seq.length();
    seq.tokens.push_back({TokenKind::Special, kMask});
  } else {
    seq.mask_pos = seq.length();
    seq.tokens.push_back({TokenKind::Special, kMask});
    seq.rel_pos = seq.length();
    seq.tokens.push_back({TokenKind::Relation, r});
    append_words(seq, sr, quota[1]);
    seq.tail_pos = seq.length();
    seq.tokens.push_back({TokenKind::Entity, given});
    append_words(seq, se, quota[0]);
  }
  seq.tokens.push_back({TokenKind::Special, kSep});
  return seq;
}

TokenSequence SequenceBuilder::key_sequence(EntityId e) const {
  constexpr int kFixed = 3;  // CLS e SEP
  if (max_len_ < kFixed)
    throw Error("max sequence length " + std::to_string(max_len_) +
                " cannot fit CLS, the entity token and SEP");
  auto se = words_->encode(store_->entity(e));
  int keep = std::min<int>(static_cast<int>(se.size()), max_len_ - kFixed);

  TokenSequence seq;
  seq.tokens.push_back({TokenKind::Special, kCls});
  seq.entity_pos = seq.length();
  seq.tokens.push_back({TokenKind::Entity, e});
  append_words(seq, se, keep);
  seq.tokens.push_back({TokenKind::Special, kSep});
  return seq;
}

}  // namespace lmke
