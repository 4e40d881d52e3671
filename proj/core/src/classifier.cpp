#include "lmke/classifier.hpp"

#include <algorithm>
#include <cmath>

namespace lmke {

double sigmoid(double s) {
  if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
  const double e = std::exp(s);
  return e / (1.0 + e);
}

double clamp_prob(double p) { return std::min(1.0 - 1e-7, std::max(1e-7, p)); }

double bce_loss(double p, bool label) {
  p = clamp_prob(p);
  return label ? -std::log(p) : -std::log1p(-p);
}

TripleScore score_triple(const ModelParams& model, const SequenceBuilder& builder,
                         const Triple& triple) {
  if (model.regime != Regime::Lmke)
    throw Error("score_triple requires an lmke-regime model");
  TokenSequence seq = builder.triple_sequence(triple.head, triple.relation, triple.tail);
  EncodedSequence enc = encode(model.cfg, model.emb, model.query_enc, seq, Mode::Inference);
  const double s = enc.out.row(seq.cls_pos).dot(model.cls_w.col(0)) + model.cls_b(0, 0);
  return TripleScore{triple, sigmoid(s), triple.label};
}

ThresholdResult tune_threshold(const std::vector<TripleScore>& dev_scores) {
  ThresholdResult r;
  size_t pos = 0, neg = 0;
  for (const auto& s : dev_scores) {
    if (!s.label) throw Error("tune_threshold: dev scores must be labeled");
    (*s.label ? pos : neg) += 1;
  }
  if (pos == 0 || neg == 0) {
    r.degenerate = true;
    r.threshold = 0.5;
    r.dev_accuracy = classification_accuracy(dev_scores, r.threshold);
    return r;
  }

  std::vector<double> candidates;
  std::vector<double> sorted;
  sorted.reserve(dev_scores.size());
  for (const auto& s : dev_scores) sorted.push_back(s.p);
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  candidates.push_back(0.0);  // everything positive
  for (size_t i = 1; i < sorted.size(); ++i)
    candidates.push_back(0.5 * (sorted[i - 1] + sorted[i]));
  candidates.push_back(std::nextafter(sorted.back(), 2.0));  // everything negative

  double best_acc = -1.0, best_thr = 0.5;
  for (double thr : candidates) {
    const double acc = classification_accuracy(dev_scores, thr);
    if (acc > best_acc) {
      best_acc = acc;
      best_thr = thr;
    }
  }
  r.threshold = best_thr;
  r.dev_accuracy = best_acc;
  return r;
}

double classification_accuracy(const std::vector<TripleScore>& scores, double threshold) {
  if (scores.empty()) return 0.0;
  size_t correct = 0;
  for (const auto& s : scores) {
    if (!s.label) throw Error("classification_accuracy: unlabeled score");
    if (classify(s.p, threshold) == *s.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(scores.size());
}

}  // namespace lmke
