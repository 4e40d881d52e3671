#pragma once

#include <vector>

#include "lmke/model.hpp"

namespace lmke {

struct TripleScore {
  Triple triple;
  double p = 0.0;
  std::optional<bool> label;
};

double sigmoid(double s);

/// Probabilities are clamped to [1e-7, 1-1e-7] before any log.
double clamp_prob(double p);

/// -label*log(p) - (1-label)*log(1-p) on the clamped probability.
double bce_loss(double p, bool label);

/// sigma(w.u + b) over the CLS vector of the full triple sequence.
/// Requires an lmke-regime model.
TripleScore score_triple(const ModelParams& model, const SequenceBuilder& builder,
                         const Triple& triple);

struct ThresholdResult {
  double threshold = 0.5;
  double dev_accuracy = 0.0;
  /// Set when the dev scores carry only one label; threshold falls back
  /// to 0.5.
  bool degenerate = false;
};

/// Picks the accuracy-maximizing threshold. Candidates are the midpoints of
/// consecutive distinct sorted scores plus the two boundary thresholds that
/// classify everything positive or everything negative (the midpoints alone
/// can miss the optimum). Ties resolve toward the lower threshold.
ThresholdResult tune_threshold(const std::vector<TripleScore>& dev_scores);

/// True iff p >= threshold.
inline bool classify(double p, double threshold) { return p >= threshold; }

double classification_accuracy(const std::vector<TripleScore>& scores, double threshold);

}  // namespace lmke
