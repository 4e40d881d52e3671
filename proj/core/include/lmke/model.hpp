#pragma once

#include <cstdint>
#include <string>

#include "lmke/encoder.hpp"

namespace lmke {

enum class Regime { Lmke, Clmke, Masked };

const char* regime_name(Regime r);
Regime regime_from_name(const std::string& name);

/// Learning-rate groups: encoder covers embeddings and both stacks, other
/// covers the matcher and output heads.
enum class ParamGroup { Encoder, Other };

struct VocabSizes {
  int words = 0;
  int entities = 0;
  int relations = 0;
};

/// Two-layer matching MLP over [q; k; q-k; q*k; log-degrees], input 4d+2.
struct MatcherWeights {
  Matrix w1;  // (4d+2) x hidden
  Matrix b1;  // 1 x hidden
  Matrix w2;  // hidden x 1
  Matrix b2;  // 1 x 1
};

/// All trainable state for one regime.
///   lmke:   shared embeddings + one stack + linear classifier head
///   clmke:  shared embeddings + query/key stacks (equally initialized,
///           embeddings tied) + matcher MLP
///   masked: shared embeddings + query stack + per-entity logit rows
struct ModelParams {
  Regime regime = Regime::Clmke;
  EncoderConfig cfg;
  VocabSizes vocab;
  int matcher_hidden = 0;
  double degree_log_base = 0.0;  // 0 = natural log

  Embeddings emb;
  EncoderWeights query_enc;
  EncoderWeights key_enc;
  MatcherWeights matcher;
  Matrix cls_w;  // d x 1
  Matrix cls_b;  // 1 x 1
  Matrix entity_head;  // |E| x d

  static ModelParams make(Regime regime, const EncoderConfig& cfg, const VocabSizes& vocab,
                          int matcher_hidden = 0);

  /// Truncated-normal (sigma 0.02) embeddings and projections, unit/zero
  /// layernorm, zero biases. The key stack is copied from the query stack
  /// so both start equal.
  void init(uint64_t seed);

  ModelParams zeros_like() const;
  void set_zero();
  size_t num_scalars() const;
  bool all_finite() const;

  /// Visits every tensor as f(name, group, Matrix&) in a fixed order.
  template <class F>
  void for_each(F&& f) {
    visit(*this, f);
  }
  template <class F>
  void for_each(F&& f) const {
    visit(*this, f);
  }

 private:
  template <class Self, class F>
  static void visit(Self& self, F& f);
};

template <class Self, class F>
void ModelParams::visit(Self& self, F& f) {
  f("emb.words", ParamGroup::Encoder, self.emb.words);
  f("emb.entities", ParamGroup::Encoder, self.emb.entities);
  f("emb.relations", ParamGroup::Encoder, self.emb.relations);
  f("emb.specials", ParamGroup::Encoder, self.emb.specials);
  f("emb.positions", ParamGroup::Encoder, self.emb.positions);
  auto stack = [&](const char* prefix, auto& enc) {
    const std::string p(prefix);
    f(p + ".emb_ln_g", ParamGroup::Encoder, enc.emb_ln_g);
    f(p + ".emb_ln_b", ParamGroup::Encoder, enc.emb_ln_b);
    for (size_t l = 0; l < enc.layers.size(); ++l) {
      auto& W = enc.layers[l];
      const std::string q = p + "." + std::to_string(l) + ".";
      f(q + "wq", ParamGroup::Encoder, W.wq);
      f(q + "wk", ParamGroup::Encoder, W.wk);
      f(q + "wv", ParamGroup::Encoder, W.wv);
      f(q + "wo", ParamGroup::Encoder, W.wo);
      f(q + "bq", ParamGroup::Encoder, W.bq);
      f(q + "bk", ParamGroup::Encoder, W.bk);
      f(q + "bv", ParamGroup::Encoder, W.bv);
      f(q + "bo", ParamGroup::Encoder, W.bo);
      f(q + "ln1_g", ParamGroup::Encoder, W.ln1_g);
      f(q + "ln1_b", ParamGroup::Encoder, W.ln1_b);
      f(q + "w1", ParamGroup::Encoder, W.w1);
      f(q + "b1", ParamGroup::Encoder, W.b1);
      f(q + "w2", ParamGroup::Encoder, W.w2);
      f(q + "b2", ParamGroup::Encoder, W.b2);
      f(q + "ln2_g", ParamGroup::Encoder, W.ln2_g);
      f(q + "ln2_b", ParamGroup::Encoder, W.ln2_b);
    }
  };
  stack("q", self.query_enc);
  if (self.regime == Regime::Clmke) {
    stack("k", self.key_enc);
    f("matcher.w1", ParamGroup::Other, self.matcher.w1);
    f("matcher.b1", ParamGroup::Other, self.matcher.b1);
    f("matcher.w2", ParamGroup::Other, self.matcher.w2);
    f("matcher.b2", ParamGroup::Other, self.matcher.b2);
  } else if (self.regime == Regime::Lmke) {
    f("cls.w", ParamGroup::Other, self.cls_w);
    f("cls.b", ParamGroup::Other, self.cls_b);
  } else {
    f("entity_head", ParamGroup::Other, self.entity_head);
  }
}

}  // namespace lmke
