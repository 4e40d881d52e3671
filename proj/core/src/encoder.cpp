#include "lmke/encoder.hpp"

#include <cmath>
#include <string>

namespace lmke {

void EncoderConfig::validate() const {
  if (dim <= 0 || layers <= 0 || heads <= 0 || ffn_dim <= 0 || max_len <= 0)
    throw Error("encoder config: dimensions and counts must be positive");
  if (dim % heads != 0) throw Error("encoder config: dim must be divisible by heads");
  if (dropout < 0.0 || dropout >= 1.0) throw Error("encoder config: dropout must be in [0,1)");
  if (word_min_count < 1) throw Error("encoder config: word_min_count must be >= 1");
}

Vector EncodedSequence::at(int pos) const {
  if (pos < 0 || pos >= out.rows()) throw Error("encoded sequence: position out of range");
  return out.row(pos).transpose();
}

uint64_t mix_seed(uint64_t a, uint64_t b) {
  uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

constexpr double kLnEps = 1e-5;

/// Cheap deterministic stream for dropout masks.
struct SplitMix {
  uint64_t state;
  explicit SplitMix(uint64_t seed) : state(seed) {}
  double uniform() {
    state += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return static_cast<double>(z >> 11) * 0x1.0p-53;
  }
};

Matrix dropout_mask(SplitMix& rng, Eigen::Index rows, Eigen::Index cols, double p) {
  const double keep = 1.0 - p;
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.uniform() < keep ? 1.0 / keep : 0.0;
  return m;
}

/// Row-wise layernorm. Fills hat and istd, returns gamma*hat + beta.
Matrix layer_norm(const Matrix& x, const Matrix& gamma, const Matrix& beta, Matrix& hat,
                  Vector& istd) {
  const Eigen::Index n = x.cols();
  hat.resize(x.rows(), n);
  istd.resize(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double mean = x.row(i).mean();
    const double var = (x.row(i).array() - mean).square().mean();
    const double is = 1.0 / std::sqrt(var + kLnEps);
    istd(i) = is;
    hat.row(i) = (x.row(i).array() - mean) * is;
  }
  return (hat.array().rowwise() * gamma.row(0).array()).rowwise() + beta.row(0).array();
}

/// d(loss)/dx for y = gamma*hat + beta; accumulates dgamma/dbeta.
Matrix layer_norm_backward(const Matrix& dy, const Matrix& hat, const Vector& istd,
                           const Matrix& gamma, Matrix& dgamma, Matrix& dbeta) {
  dgamma.row(0).array() += (dy.array() * hat.array()).colwise().sum();
  dbeta.row(0).array() += dy.array().colwise().sum();
  Matrix dhat = dy.array().rowwise() * gamma.row(0).array();
  Matrix dx(dy.rows(), dy.cols());
  for (Eigen::Index i = 0; i < dy.rows(); ++i) {
    const double m1 = dhat.row(i).mean();
    const double m2 = (dhat.row(i).array() * hat.row(i).array()).mean();
    dx.row(i) = ((dhat.row(i).array() - m1) - hat.row(i).array() * m2) * istd(i);
  }
  return dx;
}

constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); }

double gelu_grad(double x) {
  return 0.5 * (1.0 + std::erf(x * kInvSqrt2)) + x * kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

void softmax_rows_inplace(Eigen::Ref<Matrix> m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double mx = m.row(i).maxCoeff();
    m.row(i) = (m.row(i).array() - mx).exp();
    m.row(i) /= m.row(i).sum();
  }
}

const Eigen::Ref<const Matrix> embedding_table(const Embeddings& emb, TokenKind kind) {
  switch (kind) {
    case TokenKind::Word: return emb.words;
    case TokenKind::Entity: return emb.entities;
    case TokenKind::Relation: return emb.relations;
    case TokenKind::Special: return emb.specials;
  }
  throw Error("unknown token kind");
}

Eigen::Ref<Matrix> embedding_table(Embeddings& emb, TokenKind kind) {
  switch (kind) {
    case TokenKind::Word: return emb.words;
    case TokenKind::Entity: return emb.entities;
    case TokenKind::Relation: return emb.relations;
    case TokenKind::Special: return emb.specials;
  }
  throw Error("unknown token kind");
}

}  // namespace

EncodedSequence encode(const EncoderConfig& cfg, const Embeddings& emb,
                       const EncoderWeights& enc, const TokenSequence& seq, Mode mode,
                       uint64_t dropout_seed, EncodeTrace* trace) {
  const int L = seq.length();
  const int d = cfg.dim;
  const int nh = cfg.heads;
  const int hd = cfg.head_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));
  if (L == 0) throw Error("encode: empty sequence");
  if (L > cfg.max_len)
    throw Error("encode: sequence length " + std::to_string(L) + " exceeds max " +
                std::to_string(cfg.max_len));
  const bool drop = mode == Mode::Train && cfg.dropout > 0.0;
  SplitMix rng(dropout_seed);

  Matrix x0(L, d);
  for (int i = 0; i < L; ++i) {
    const Token& t = seq.tokens[i];
    x0.row(i) = embedding_table(emb, t.kind).row(t.id) + emb.positions.row(i);
  }

  Matrix hat0;
  Vector istd0;
  Matrix x = layer_norm(x0, enc.emb_ln_g, enc.emb_ln_b, hat0, istd0);
  Matrix emb_mask;
  if (drop) {
    emb_mask = dropout_mask(rng, L, d, cfg.dropout);
    x.array() *= emb_mask.array();
  }
  if (trace) {
    trace->tokens = seq.tokens;
    trace->emb_hat = std::move(hat0);
    trace->emb_istd = std::move(istd0);
    trace->emb_mask = emb_mask;
    trace->layers.assign(cfg.layers, {});
  }

  for (int l = 0; l < cfg.layers; ++l) {
    const LayerWeights& W = enc.layers[l];
    LayerTrace* lt = trace ? &trace->layers[l] : nullptr;
    if (lt) lt->x_in = x;

    Matrix q = (x * W.wq).rowwise() + W.bq.row(0);
    Matrix k = (x * W.wk).rowwise() + W.bk.row(0);
    Matrix v = (x * W.wv).rowwise() + W.bv.row(0);

    Matrix probs(nh * L, L);
    for (int h = 0; h < nh; ++h) {
      probs.middleRows(h * L, L).noalias() =
          scale * (q.middleCols(h * hd, hd) * k.middleCols(h * hd, hd).transpose());
      softmax_rows_inplace(probs.middleRows(h * L, L));
    }
    Matrix attn_mask, probs_used;
    if (drop) {
      attn_mask = dropout_mask(rng, nh * L, L, cfg.dropout);
      probs_used = probs.array() * attn_mask.array();
    }
    const Matrix& p_eff = drop ? probs_used : probs;

    Matrix ctx(L, d);
    for (int h = 0; h < nh; ++h)
      ctx.middleCols(h * hd, hd).noalias() = p_eff.middleRows(h * L, L) * v.middleCols(h * hd, hd);

    Matrix attn_out = (ctx * W.wo).rowwise() + W.bo.row(0);
    Matrix attnout_mask;
    if (drop) {
      attnout_mask = dropout_mask(rng, L, d, cfg.dropout);
      attn_out.array() *= attnout_mask.array();
    }

    Matrix r1 = x + attn_out;
    Matrix hat1;
    Vector istd1;
    Matrix n1 = layer_norm(r1, W.ln1_g, W.ln1_b, hat1, istd1);

    Matrix ffn_pre = (n1 * W.w1).rowwise() + W.b1.row(0);
    Matrix ffn_act = ffn_pre.unaryExpr([](double t) { return gelu(t); });
    Matrix ffn_out = (ffn_act * W.w2).rowwise() + W.b2.row(0);
    Matrix ffn_mask;
    if (drop) {
      ffn_mask = dropout_mask(rng, L, d, cfg.dropout);
      ffn_out.array() *= ffn_mask.array();
    }

    Matrix r2 = n1 + ffn_out;
    Matrix hat2;
    Vector istd2;
    Matrix out = layer_norm(r2, W.ln2_g, W.ln2_b, hat2, istd2);

    if (!out.allFinite())
      throw Error("encode: non-finite activation in layer " + std::to_string(l));

    if (lt) {
      lt->q = std::move(q);
      lt->k = std::move(k);
      lt->v = std::move(v);
      lt->probs = std::move(probs);
      if (drop) {
        lt->probs_dropped = std::move(probs_used);
        lt->attn_mask = std::move(attn_mask);
        lt->attnout_mask = std::move(attnout_mask);
        lt->ffn_mask = std::move(ffn_mask);
      }
      lt->ctx = std::move(ctx);
      lt->ln1_hat = std::move(hat1);
      lt->ln1_istd = std::move(istd1);
      lt->n1 = n1;
      lt->ffn_pre = std::move(ffn_pre);
      lt->ffn_act = std::move(ffn_act);
      lt->ln2_hat = std::move(hat2);
      lt->ln2_istd = std::move(istd2);
    }
    x = std::move(out);
  }

  return EncodedSequence{std::move(x)};
}

void encode_backward(const EncoderConfig& cfg, const Embeddings& emb,
                     const EncoderWeights& enc, const EncodeTrace& trace,
                     const Matrix& d_out, Embeddings& d_emb, EncoderWeights& d_enc) {
  const int L = static_cast<int>(trace.tokens.size());
  const int d = cfg.dim;
  const int nh = cfg.heads;
  const int hd = cfg.head_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));
  const bool drop = trace.emb_mask.size() > 0;

  Matrix dx = d_out;
  for (int l = cfg.layers - 1; l >= 0; --l) {
    const LayerWeights& W = enc.layers[l];
    LayerWeights& G = d_enc.layers[l];
    const LayerTrace& lt = trace.layers[l];

    // out = LN2(n1 + ffn_out)
    Matrix dr2 = layer_norm_backward(dx, lt.ln2_hat, lt.ln2_istd, W.ln2_g, G.ln2_g, G.ln2_b);
    Matrix dffn_out = dr2;
    if (drop) dffn_out.array() *= lt.ffn_mask.array();

    // ffn_out = gelu(n1*w1 + b1)*w2 + b2
    G.w2.noalias() += lt.ffn_act.transpose() * dffn_out;
    G.b2.row(0).array() += dffn_out.array().colwise().sum();
    Matrix dact = dffn_out * W.w2.transpose();
    Matrix dpre =
        dact.array() * lt.ffn_pre.unaryExpr([](double t) { return gelu_grad(t); }).array();
    G.w1.noalias() += lt.n1.transpose() * dpre;
    G.b1.row(0).array() += dpre.array().colwise().sum();
    Matrix dn1 = dr2;  // residual
    dn1.noalias() += dpre * W.w1.transpose();

    // n1 = LN1(x + attn_out)
    Matrix dr1 = layer_norm_backward(dn1, lt.ln1_hat, lt.ln1_istd, W.ln1_g, G.ln1_g, G.ln1_b);
    Matrix dattn_out = dr1;
    if (drop) dattn_out.array() *= lt.attnout_mask.array();

    // attn_out = ctx*wo + bo
    G.wo.noalias() += lt.ctx.transpose() * dattn_out;
    G.bo.row(0).array() += dattn_out.array().colwise().sum();
    Matrix dctx = dattn_out * W.wo.transpose();

    const Matrix& p_eff = drop ? lt.probs_dropped : lt.probs;
    Matrix dq(L, d), dk(L, d), dv(L, d);
    for (int h = 0; h < nh; ++h) {
      auto P = lt.probs.middleRows(h * L, L);
      auto Pe = p_eff.middleRows(h * L, L);
      auto Vh = lt.v.middleCols(h * hd, hd);
      Matrix dPe = dctx.middleCols(h * hd, hd) * Vh.transpose();
      dv.middleCols(h * hd, hd).noalias() = Pe.transpose() * dctx.middleCols(h * hd, hd);
      Matrix dP = drop ? Matrix(dPe.array() * lt.attn_mask.middleRows(h * L, L).array())
                       : std::move(dPe);
      // softmax rows: ds = p .* (dp - rowsum(dp .* p))
      Matrix dS(L, L);
      for (int i = 0; i < L; ++i) {
        const double dot = dP.row(i).dot(P.row(i));
        dS.row(i) = P.row(i).array() * (dP.row(i).array() - dot);
      }
      dq.middleCols(h * hd, hd).noalias() = scale * (dS * lt.k.middleCols(h * hd, hd));
      dk.middleCols(h * hd, hd).noalias() =
          scale * (dS.transpose() * lt.q.middleCols(h * hd, hd));
    }

    G.wq.noalias() += lt.x_in.transpose() * dq;
    G.wk.noalias() += lt.x_in.transpose() * dk;
    G.wv.noalias() += lt.x_in.transpose() * dv;
    G.bq.row(0).array() += dq.array().colwise().sum();
    G.bk.row(0).array() += dk.array().colwise().sum();
    G.bv.row(0).array() += dv.array().colwise().sum();

    Matrix dx_in = dr1;  // residual into the layer input
    dx_in.noalias() += dq * W.wq.transpose();
    dx_in.noalias() += dk * W.wk.transpose();
    dx_in.noalias() += dv * W.wv.transpose();
    dx = std::move(dx_in);
  }

  if (drop) dx.array() *= trace.emb_mask.array();
  Matrix dx0 =
      layer_norm_backward(dx, trace.emb_hat, trace.emb_istd, enc.emb_ln_g, d_enc.emb_ln_g,
                          d_enc.emb_ln_b);
  for (int i = 0; i < L; ++i) {
    const Token& t = trace.tokens[i];
    embedding_table(d_emb, t.kind).row(t.id) += dx0.row(i);
    d_emb.positions.row(i) += dx0.row(i);
  }
}

}  // namespace lmke
