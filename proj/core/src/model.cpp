#include "lmke/model.hpp"

#include <random>

namespace lmke {

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::Lmke: return "lmke";
    case Regime::Clmke: return "clmke";
    case Regime::Masked: return "masked";
  }
  return "?";
}

Regime regime_from_name(const std::string& name) {
  if (name == "lmke") return Regime::Lmke;
  if (name == "clmke") return Regime::Clmke;
  if (name == "masked") return Regime::Masked;
  throw Error("unknown regime '" + name + "' (expected lmke, clmke or masked)");
}

namespace {

EncoderWeights make_stack(const EncoderConfig& cfg) {
  EncoderWeights enc;
  const int d = cfg.dim, F = cfg.ffn_dim;
  enc.emb_ln_g = Matrix::Zero(1, d);
  enc.emb_ln_b = Matrix::Zero(1, d);
  enc.layers.resize(cfg.layers);
  for (auto& W : enc.layers) {
    W.wq = Matrix::Zero(d, d);
    W.wk = Matrix::Zero(d, d);
    W.wv = Matrix::Zero(d, d);
    W.wo = Matrix::Zero(d, d);
    W.bq = Matrix::Zero(1, d);
    W.bk = Matrix::Zero(1, d);
    W.bv = Matrix::Zero(1, d);
    W.bo = Matrix::Zero(1, d);
    W.ln1_g = Matrix::Zero(1, d);
    W.ln1_b = Matrix::Zero(1, d);
    W.w1 = Matrix::Zero(d, F);
    W.b1 = Matrix::Zero(1, F);
    W.w2 = Matrix::Zero(F, d);
    W.b2 = Matrix::Zero(1, d);
    W.ln2_g = Matrix::Zero(1, d);
    W.ln2_b = Matrix::Zero(1, d);
  }
  return enc;
}

constexpr double kInitSigma = 0.02;

void trunc_normal(Matrix& m, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, kInitSigma);
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      double x;
      do {
        x = dist(rng);
      } while (std::abs(x) > 2.0 * kInitSigma);
      m(i, j) = x;
    }
}

void init_stack(EncoderWeights& enc, std::mt19937_64& rng) {
  enc.emb_ln_g.setOnes();
  enc.emb_ln_b.setZero();
  for (auto& W : enc.layers) {
    trunc_normal(W.wq, rng);
    trunc_normal(W.wk, rng);
    trunc_normal(W.wv, rng);
    trunc_normal(W.wo, rng);
    W.bq.setZero();
    W.bk.setZero();
    W.bv.setZero();
    W.bo.setZero();
    W.ln1_g.setOnes();
    W.ln1_b.setZero();
    trunc_normal(W.w1, rng);
    W.b1.setZero();
    trunc_normal(W.w2, rng);
    W.b2.setZero();
    W.ln2_g.setOnes();
    W.ln2_b.setZero();
  }
}

}  // namespace

ModelParams ModelParams::make(Regime regime, const EncoderConfig& cfg, const VocabSizes& vocab,
                              int matcher_hidden) {
  cfg.validate();
  if (vocab.words < 1 || vocab.entities < 1 || vocab.relations < 1)
    throw Error("model: vocabulary sizes must be positive");
  ModelParams m;
  m.regime = regime;
  m.cfg = cfg;
  m.vocab = vocab;
  m.matcher_hidden = matcher_hidden > 0 ? matcher_hidden : cfg.dim;

  const int d = cfg.dim;
  m.emb.words = Matrix::Zero(vocab.words, d);
  m.emb.entities = Matrix::Zero(vocab.entities, d);
  m.emb.relations = Matrix::Zero(vocab.relations, d);
  m.emb.specials = Matrix::Zero(kNumSpecials, d);
  m.emb.positions = Matrix::Zero(cfg.max_len, d);

  m.query_enc = make_stack(cfg);
  if (regime == Regime::Clmke) {
    m.key_enc = make_stack(cfg);
    m.matcher.w1 = Matrix::Zero(4 * d + 2, m.matcher_hidden);
    m.matcher.b1 = Matrix::Zero(1, m.matcher_hidden);
    m.matcher.w2 = Matrix::Zero(m.matcher_hidden, 1);
    m.matcher.b2 = Matrix::Zero(1, 1);
  } else if (regime == Regime::Lmke) {
    m.cls_w = Matrix::Zero(d, 1);
    m.cls_b = Matrix::Zero(1, 1);
  } else {
    m.entity_head = Matrix::Zero(vocab.entities, d);
  }
  return m;
}

void ModelParams::init(uint64_t seed) {
  std::mt19937_64 rng(seed);
  trunc_normal(emb.words, rng);
  trunc_normal(emb.entities, rng);
  trunc_normal(emb.relations, rng);
  trunc_normal(emb.specials, rng);
  trunc_normal(emb.positions, rng);
  init_stack(query_enc, rng);
  if (regime == Regime::Clmke) {
    key_enc = query_enc;  // equal initialization; layer weights diverge in training
    trunc_normal(matcher.w1, rng);
    matcher.b1.setZero();
    trunc_normal(matcher.w2, rng);
    matcher.b2.setZero();
  } else if (regime == Regime::Lmke) {
    trunc_normal(cls_w, rng);
    cls_b.setZero();
  } else {
    trunc_normal(entity_head, rng);
  }
}

ModelParams ModelParams::zeros_like() const {
  ModelParams z = make(regime, cfg, vocab, matcher_hidden);
  z.degree_log_base = degree_log_base;
  return z;
}

void ModelParams::set_zero() {
  for_each([](const std::string&, ParamGroup, Matrix& m) { m.setZero(); });
}

size_t ModelParams::num_scalars() const {
  size_t n = 0;
  for_each([&](const std::string&, ParamGroup, const Matrix& m) { n += m.size(); });
  return n;
}

bool ModelParams::all_finite() const {
  bool ok = true;
  for_each([&](const std::string&, ParamGroup, const Matrix& m) { ok = ok && m.allFinite(); });
  return ok;
}

}  // namespace lmke
