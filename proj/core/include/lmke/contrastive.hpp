#pragma once

#include <random>
#include <vector>

#include "lmke/dataset.hpp"
#include "lmke/model.hpp"

namespace lmke {

/// log(degree+1) in the model's configured base (natural by default).
double degree_feature(double degree, double log_base = 0.0);

/// [q; k; q-k; q*k; log(dq+1); log(dk+1)], dimension 4d+2.
Vector match_features(const Vector& q, const Vector& k, double deg_q, double deg_k,
                      double log_base = 0.0);

struct MatcherForward {
  Matrix hidden;  // n x h, tanh activations
  Vector score;   // n, pre-sigmoid
};

/// Two-layer MLP over a batch of feature rows.
MatcherForward matcher_forward(const MatcherWeights& m, const Matrix& features);

/// sigma(MLP(features)) for a single pair.
double match_prob(const MatcherWeights& m, const Vector& features);

/// Backward through the MLP; accumulates weight grads, returns d(features).
Matrix matcher_backward(const MatcherWeights& m, const Matrix& features,
                        const MatcherForward& fwd, const Vector& dscore,
                        MatcherWeights& grad);

/// Softmax of exp(p) over the negative candidates. Detached from the loss
/// gradient: the weights only rescale per-sample losses.
Vector self_adversarial_weights(const Vector& neg_probs);

struct QueryLoss {
  double pos_term = 0.0;
  double neg_term = 0.0;
  double total() const { return pos_term + neg_term; }
};

/// Multi-label loss of one query against its candidate keys:
/// mean of -log p over positives plus a self-adversarially weighted sum of
/// -log(1-p) over the selected negatives. `dscore`, when given, receives
/// d(loss)/d(pre-sigmoid score) per candidate (weights held constant).
QueryLoss contrastive_query_loss(const Vector& probs, const std::vector<uint8_t>& positive,
                                 const std::vector<int>& negatives, Vector* dscore = nullptr);

/// One contrastive unit: a (given entity, relation, MASK) query whose true
/// target is `target`.
struct BatchItem {
  Triple source;
  Side missing;
  EntityId given = -1;
  RelationId rel = -1;
  EntityId target = -1;
};

enum class DirectionPolicy { Both, TailOnly, HeadOnly };

/// In-batch contrastive unit set: n queries, n keys (one per query), and
/// the n*n positive-label matrix filled from a filter index so that known
/// positives are never treated as negatives. With the default policy each
/// triple contributes a tail-missing and a head-missing query.
struct ContrastiveBatch {
  std::vector<BatchItem> items;
  std::vector<TokenSequence> query_seqs;
  std::vector<TokenSequence> key_seqs;
  std::vector<std::vector<uint8_t>> positive;  // [query][key]
  Vector deg_q, deg_k;                         // raw degrees

  Matrix Q;  // n x d, query vectors at the MASK position
  Matrix K;  // n x d, key vectors at the entity position

  int size() const { return static_cast<int>(items.size()); }
};

/// Builds items, sequences, degrees and the label matrix. Encoding is done
/// separately (encode_batch) so training can keep traces.
ContrastiveBatch make_batch(const std::vector<Triple>& triples, DirectionPolicy policy,
                            const SequenceBuilder& builder, const DegreeTable& degrees,
                            const FilterIndex& positives);

/// Per-query uniformly sampled negative subsets of size at most `n_neg`;
/// positives are always kept. Requires n_neg <= batch size - 1.
std::vector<std::vector<int>> cap_negatives(const ContrastiveBatch& batch, int n_neg,
                                            std::mt19937_64& rng);

/// All negatives of every query (the uncapped candidate set).
std::vector<std::vector<int>> all_negatives(const ContrastiveBatch& batch);

/// logits = entity_head * q; row i of entity_head is entity i's key.
Vector masked_entity_logits(const Vector& q, const Matrix& entity_head);

/// Softmax cross-entropy over entities; optionally emits d(loss)/d(logits).
double softmax_xent(const Vector& logits, int target, Vector* dlogits = nullptr);

}  // namespace lmke
