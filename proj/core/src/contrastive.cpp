#include "lmke/contrastive.hpp"

#include <cmath>

#include "lmke/classifier.hpp"

namespace lmke {

double degree_feature(double degree, double log_base) {
  const double v = std::log1p(degree);
  return log_base > 0.0 ? v / std::log(log_base) : v;
}

Vector match_features(const Vector& q, const Vector& k, double deg_q, double deg_k,
                      double log_base) {
  if (q.size() != k.size()) throw Error("match_features: dimension mismatch");
  const Eigen::Index d = q.size();
  Vector f(4 * d + 2);
  f.segment(0, d) = q;
  f.segment(d, d) = k;
  f.segment(2 * d, d) = q - k;
  f.segment(3 * d, d) = q.array() * k.array();
  f(4 * d) = degree_feature(deg_q, log_base);
  f(4 * d + 1) = degree_feature(deg_k, log_base);
  return f;
}

MatcherForward matcher_forward(const MatcherWeights& m, const Matrix& features) {
  if (features.cols() != m.w1.rows())
    throw Error("matcher: feature dimension " + std::to_string(features.cols()) +
                " does not match MLP input " + std::to_string(m.w1.rows()));
  MatcherForward fwd;
  fwd.hidden = ((features * m.w1).rowwise() + m.b1.row(0)).array().tanh();
  fwd.score = (fwd.hidden * m.w2).col(0).array() + m.b2(0, 0);
  return fwd;
}

double match_prob(const MatcherWeights& m, const Vector& features) {
  MatcherForward fwd = matcher_forward(m, features.transpose());
  return sigmoid(fwd.score(0));
}

Matrix matcher_backward(const MatcherWeights& m, const Matrix& features,
                        const MatcherForward& fwd, const Vector& dscore,
                        MatcherWeights& grad) {
  grad.w2.noalias() += fwd.hidden.transpose() * dscore;
  grad.b2(0, 0) += dscore.sum();
  Matrix dhidden =
      (dscore * m.w2.transpose()).array() * (1.0 - fwd.hidden.array().square());
  grad.w1.noalias() += features.transpose() * dhidden;
  grad.b1.row(0).array() += dhidden.array().colwise().sum();
  return dhidden * m.w1.transpose();
}

Vector self_adversarial_weights(const Vector& neg_probs) {
  if (neg_probs.size() == 0) return Vector();
  // exp(p) over probabilities in [0,1]; no overflow concerns.
  Vector w = neg_probs.array().exp();
  return w / w.sum();
}

QueryLoss contrastive_query_loss(const Vector& probs, const std::vector<uint8_t>& positive,
                                 const std::vector<int>& negatives, Vector* dscore) {
  if (static_cast<size_t>(probs.size()) != positive.size())
    throw Error("contrastive_query_loss: probs/labels size mismatch");
  std::vector<int> pos_idx;
  for (size_t j = 0; j < positive.size(); ++j)
    if (positive[j]) pos_idx.push_back(static_cast<int>(j));
  if (pos_idx.empty()) throw Error("contrastive_query_loss: query has no positive key");

  if (dscore) dscore->setZero(probs.size());
  QueryLoss loss;
  const double inv_pos = 1.0 / static_cast<double>(pos_idx.size());
  for (int j : pos_idx) {
    const double p = probs(j);
    loss.pos_term += inv_pos * -std::log(clamp_prob(p));
    if (dscore && p > 1e-7 && p < 1.0 - 1e-7) (*dscore)(j) += inv_pos * -(1.0 - p);
  }

  if (!negatives.empty()) {
    Vector neg_p(negatives.size());
    for (size_t a = 0; a < negatives.size(); ++a) {
      if (positive[negatives[a]])
        throw Error("contrastive_query_loss: positive key used as negative");
      neg_p(a) = probs(negatives[a]);
    }
    Vector w = self_adversarial_weights(neg_p);
    for (size_t a = 0; a < negatives.size(); ++a) {
      const double p = neg_p(a);
      loss.neg_term += w(a) * -std::log1p(-clamp_prob(p));
      if (dscore && p > 1e-7 && p < 1.0 - 1e-7) (*dscore)(negatives[a]) += w(a) * p;
    }
  }
  return loss;
}

ContrastiveBatch make_batch(const std::vector<Triple>& triples, DirectionPolicy policy,
                            const SequenceBuilder& builder, const DegreeTable& degrees,
                            const FilterIndex& positives) {
  if (triples.empty()) throw Error("make_batch: empty batch");
  ContrastiveBatch b;
  auto add = [&](const Triple& t, Side missing) {
    BatchItem item;
    item.source = t;
    item.missing = missing;
    item.rel = t.relation;
    item.given = missing == Side::Tail ? t.head : t.tail;
    item.target = missing == Side::Tail ? t.tail : t.head;
    b.items.push_back(item);
    b.query_seqs.push_back(builder.query_sequence(item.given, item.rel, missing));
    b.key_seqs.push_back(builder.key_sequence(item.target));
  };
  for (const auto& t : triples) {
    if (policy != DirectionPolicy::HeadOnly) add(t, Side::Tail);
    if (policy != DirectionPolicy::TailOnly) add(t, Side::Head);
  }

  const int n = b.size();
  b.deg_q.resize(n);
  b.deg_k.resize(n);
  for (int i = 0; i < n; ++i) {
    b.deg_q(i) = static_cast<double>(degrees.of(b.items[i].given));
    b.deg_k(i) = static_cast<double>(degrees.of(b.items[i].target));
  }

  b.positive.assign(n, std::vector<uint8_t>(n, 0));
  for (int i = 0; i < n; ++i) {
    const BatchItem& qi = b.items[i];
    for (int j = 0; j < n; ++j) {
      const EntityId cand = b.items[j].target;
      bool pos;
      if (qi.missing == Side::Tail)
        pos = positives.contains(qi.given, qi.rel, cand);
      else
        pos = positives.contains(cand, qi.rel, qi.given);
      if (j == i) pos = true;  // a query's own key completes its source triple
      b.positive[i][j] = pos ? 1 : 0;
    }
  }
  return b;
}

std::vector<std::vector<int>> all_negatives(const ContrastiveBatch& batch) {
  const int n = batch.size();
  std::vector<std::vector<int>> out(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (!batch.positive[i][j]) out[i].push_back(j);
  return out;
}

std::vector<std::vector<int>> cap_negatives(const ContrastiveBatch& batch, int n_neg,
                                            std::mt19937_64& rng) {
  const int n = batch.size();
  if (n_neg < 0) throw Error("cap_negatives: negative size must be >= 0");
  if (n_neg > n - 1)
    throw Error("cap_negatives: n_neg " + std::to_string(n_neg) +
                " exceeds batch size - 1 = " + std::to_string(n - 1));
  auto out = all_negatives(batch);
  for (auto& negs : out) {
    const int m = static_cast<int>(negs.size());
    if (m <= n_neg) continue;
    // Partial Fisher-Yates, then restore index order.
    for (int a = 0; a < n_neg; ++a) {
      std::uniform_int_distribution<int> pick(a, m - 1);
      std::swap(negs[a], negs[pick(rng)]);
    }
    negs.resize(n_neg);
    std::sort(negs.begin(), negs.end());
  }
  return out;
}

Vector masked_entity_logits(const Vector& q, const Matrix& entity_head) {
  if (q.size() != entity_head.cols())
    throw Error("masked_entity_logits: dimension mismatch");
  return entity_head * q;
}

double softmax_xent(const Vector& logits, int target, Vector* dlogits) {
  if (target < 0 || target >= logits.size()) throw Error("softmax_xent: target out of range");
  const double mx = logits.maxCoeff();
  Vector e = (logits.array() - mx).exp();
  const double z = e.sum();
  const double loss = std::log(z) - (logits(target) - mx);
  if (dlogits) {
    *dlogits = e / z;
    (*dlogits)(target) -= 1.0;
  }
  return loss;
}

}  // namespace lmke
