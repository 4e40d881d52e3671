#pragma once

#include <bit>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "lmke/types.hpp"

namespace lmke {

/// Dense, 0-based entity and relation id spaces. Ids are assigned in file
/// order, so loading the same directory twice gives identical assignments.
struct Vocabulary {
  std::vector<std::string> entities;
  std::vector<std::string> relations;
  std::unordered_map<std::string, EntityId> entity_id;
  std::unordered_map<std::string, RelationId> relation_id;

  EntityId add_entity(const std::string& name);
  RelationId add_relation(const std::string& name);
  int num_entities() const { return static_cast<int>(entities.size()); }
  int num_relations() const { return static_cast<int>(relations.size()); }
};

/// Per-id description text. Every id has an entry; empty text is legal.
struct DescriptionStore {
  std::vector<std::string> entity_text;
  std::vector<std::string> relation_text;

  const std::string& entity(EntityId e) const { return entity_text.at(e); }
  const std::string& relation(RelationId r) const { return relation_text.at(r); }
};

struct Dataset {
  Vocabulary vocab;
  DescriptionStore store;
  std::vector<Triple> train;
  std::vector<Triple> dev;
  std::vector<Triple> test;
};

struct LoadOptions {
  /// Strict mode rejects dev/test entities or relations that were not seen
  /// in the description files or the training split. Permissive mode
  /// registers them with an empty description.
  bool permissive = false;
};

/// Loads a dataset directory:
///   train.tsv / dev.tsv / test.tsv   head<TAB>relation<TAB>tail[<TAB>1|-1]
///   entity2text.tsv                  name<TAB>description
///   relation2text.tsv                name<TAB>description
/// The optional fourth triple column is a truth label and is only accepted
/// in dev/test splits.
Dataset load_dataset(const std::string& directory, const LoadOptions& opts = {});

/// degree(e) = number of (head or tail) slots of training triples holding e.
/// A self-loop counts twice. Entities absent from training have degree 0.
struct DegreeTable {
  std::vector<int64_t> degree;

  int64_t of(EntityId e) const { return degree.at(e); }
  int64_t total() const;
};

DegreeTable compute_degrees(const std::vector<Triple>& train, int num_entities);

/// Degree group used for long-tail breakdowns: floor(log2(degree)) for
/// degree >= 1; degree 0 shares group 0 with degree 1.
inline int degree_group(int64_t degree) {
  if (degree <= 1) return 0;
  return std::bit_width(static_cast<uint64_t>(degree)) - 1;
}

/// Ground-truth index over positive triples: (h,r) -> tails and (r,t) -> heads.
/// Backs the filtered evaluation setting and corruption avoidance.
class FilterIndex {
 public:
  FilterIndex() = default;

  void add(const Triple& t);
  /// Sorts and deduplicates the candidate lists. Must be called after the
  /// last add and before any query.
  void finalize();

  bool contains(EntityId h, RelationId r, EntityId t) const;
  const std::vector<EntityId>& tails(EntityId h, RelationId r) const;
  const std::vector<EntityId>& heads(RelationId r, EntityId t) const;

 private:
  static uint64_t key(int32_t a, int32_t b) {
    return (static_cast<uint64_t>(static_cast<uint32_t>(a)) << 32) |
           static_cast<uint32_t>(b);
  }
  std::unordered_map<uint64_t, std::vector<EntityId>> tails_;
  std::unordered_map<uint64_t, std::vector<EntityId>> heads_;
  std::vector<EntityId> empty_;
  bool finalized_ = false;
};

/// Index over every positive in the given splits. Triples labeled false are
/// skipped.
FilterIndex build_filter_index(const std::vector<const std::vector<Triple>*>& splits);

/// Replaces one side of `triple` with a random entity such that the result
/// is not a positive in `avoid`. The replacement also differs from the
/// original entity. Throws Error when every entity is exhausted.
Triple corrupt_triple(const Triple& triple, Side side, std::mt19937_64& rng,
                      const FilterIndex& avoid, int num_entities);

}  // namespace lmke
