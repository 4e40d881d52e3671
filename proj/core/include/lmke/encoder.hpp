#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "lmke/sequence.hpp"

namespace lmke {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct EncoderConfig {
  int dim = 128;
  int layers = 2;
  int heads = 4;
  int ffn_dim = 512;
  int max_len = 96;
  int word_min_count = 1;
  double dropout = 0.1;

  int head_dim() const { return dim / heads; }
  void validate() const;
};

/// Token-embedding tables shared by every encoder stack in a model: words,
/// entities, relations and special tokens all live in one d-dimensional
/// space, plus learned position embeddings. One row per vocabulary item.
struct Embeddings {
  Matrix words;      // |W| x d
  Matrix entities;   // |E| x d
  Matrix relations;  // |R| x d
  Matrix specials;   // kNumSpecials x d
  Matrix positions;  // max_len x d
};

struct LayerWeights {
  Matrix wq, wk, wv, wo;  // d x d
  Matrix bq, bk, bv, bo;  // 1 x d
  Matrix ln1_g, ln1_b;    // 1 x d
  Matrix w1;              // d x f
  Matrix b1;              // 1 x f
  Matrix w2;              // f x d
  Matrix b2;              // 1 x d
  Matrix ln2_g, ln2_b;    // 1 x d
};

/// Per-stack weights: embedding-layernorm plus the post-norm layers.
/// Embedding tables live outside so stacks can share them.
struct EncoderWeights {
  Matrix emb_ln_g, emb_ln_b;  // 1 x d
  std::vector<LayerWeights> layers;
};

enum class Mode { Train, Inference };

struct EncodedSequence {
  Matrix out;  // L x d

  Vector at(int pos) const;
};

/// Forward activations one backward pass needs. Layer inputs, attention
/// internals and layernorm caches; dropout masks only when dropout is live.
struct LayerTrace {
  Matrix x_in;            // L x d, input to the layer
  Matrix q, k, v;         // L x d
  Matrix probs;           // (heads*L) x L, softmax rows, pre-dropout
  Matrix probs_dropped;   // only when dropout active
  Matrix ctx;             // L x d, concatenated heads before the output proj
  Matrix ln1_hat;         // L x d
  Vector ln1_istd;        // L
  Matrix n1;              // L x d, FFN input
  Matrix ffn_pre;         // L x f
  Matrix ffn_act;         // L x f
  Matrix ln2_hat;         // L x d
  Vector ln2_istd;        // L
  Matrix attn_mask, attnout_mask, ffn_mask;  // dropout masks
};

struct EncodeTrace {
  std::vector<Token> tokens;
  Matrix emb_hat;  // L x d
  Vector emb_istd;
  Matrix emb_mask;
  std::vector<LayerTrace> layers;
};

/// Runs the post-norm transformer stack over one token sequence. Inference
/// mode is deterministic; train mode draws dropout masks from `dropout_seed`
/// so parallel callers stay reproducible. Pass `trace` to keep activations
/// for encode_backward. Throws on non-finite activations, naming the layer.
EncodedSequence encode(const EncoderConfig& cfg, const Embeddings& emb,
                       const EncoderWeights& enc, const TokenSequence& seq, Mode mode,
                       uint64_t dropout_seed = 0, EncodeTrace* trace = nullptr);

/// Accumulates d(loss)/d(weights) into `d_emb` and `d_enc` given
/// d(loss)/d(encoder output).
void encode_backward(const EncoderConfig& cfg, const Embeddings& emb,
                     const EncoderWeights& enc, const EncodeTrace& trace,
                     const Matrix& d_out, Embeddings& d_emb, EncoderWeights& d_enc);

/// splitmix64; used to derive per-sequence dropout streams from
/// (seed, epoch, batch, item) counters.
uint64_t mix_seed(uint64_t a, uint64_t b);

}  // namespace lmke
