#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace lmke {

using EntityId = int32_t;
using RelationId = int32_t;

/// One (head, relation, tail) fact. `label` is set only on labeled
/// classification splits; training triples are positives by definition.
struct Triple {
  EntityId head = -1;
  RelationId relation = -1;
  EntityId tail = -1;
  std::optional<bool> label;

  bool operator==(const Triple& o) const {
    return head == o.head && relation == o.relation && tail == o.tail;
  }
};

/// Which entity slot of a triple an operation acts on (the slot that is
/// removed for a query, or replaced by a corruption).
enum class Side { Head, Tail };

inline const char* side_name(Side s) { return s == Side::Head ? "head" : "tail"; }

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lmke
