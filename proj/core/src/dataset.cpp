#include "lmke/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

namespace lmke {

EntityId Vocabulary::add_entity(const std::string& name) {
  auto it = entity_id.find(name);
  if (it != entity_id.end()) return it->second;
  EntityId id = static_cast<EntityId>(entities.size());
  entities.push_back(name);
  entity_id.emplace(name, id);
  return id;
}

RelationId Vocabulary::add_relation(const std::string& name) {
  auto it = relation_id.find(name);
  if (it != relation_id.end()) return it->second;
  RelationId id = static_cast<RelationId>(relations.size());
  relations.push_back(name);
  relation_id.emplace(name, id);
  return id;
}

namespace {

struct RawTriple {
  std::string h, r, t;
  std::optional<bool> label;
};

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t pos = line.find('\t', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

std::vector<RawTriple> read_triple_file(const std::string& path, bool allow_labels) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open triple file: " + path);
  std::vector<RawTriple> out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    auto cols = split_tabs(line);
    if (cols.size() != 3 && cols.size() != 4) {
      throw Error(path + ":" + std::to_string(lineno) + ": malformed line, expected 3 or 4 tab-separated fields, got " +
                  std::to_string(cols.size()));
    }
    RawTriple t{cols[0], cols[1], cols[2], std::nullopt};
    if (cols.size() == 4) {
      if (!allow_labels)
        throw Error(path + ":" + std::to_string(lineno) +
                    ": label column is not allowed in the training split");
      if (cols[3] == "1")
        t.label = true;
      else if (cols[3] == "-1")
        t.label = false;
      else
        throw Error(path + ":" + std::to_string(lineno) + ": label must be 1 or -1, got '" + cols[3] + "'");
    }
    out.push_back(std::move(t));
  }
  return out;
}

/// name -> description pairs in file order. The description is everything
/// after the first tab; a line without a tab means an empty description.
std::vector<std::pair<std::string, std::string>> read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open description file: " + path);
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    size_t pos = line.find('\t');
    if (pos == std::string::npos)
      out.emplace_back(line, "");
    else
      out.emplace_back(line.substr(0, pos), line.substr(pos + 1));
  }
  return out;
}

}  // namespace

Dataset load_dataset(const std::string& directory, const LoadOptions& opts) {
  Dataset ds;
  const std::string dir = directory.empty() || directory.back() == '/' ? directory : directory + "/";

  auto ent_text = read_text_file(dir + "entity2text.tsv");
  auto rel_text = read_text_file(dir + "relation2text.tsv");

  std::unordered_map<EntityId, std::string> ent_desc;
  for (auto& [name, text] : ent_text) {
    EntityId id = ds.vocab.add_entity(name);
    if (ent_desc.count(id))
      throw Error(dir + "entity2text.tsv: duplicate description entry for '" + name + "'");
    ent_desc.emplace(id, std::move(text));
  }
  std::unordered_map<RelationId, std::string> rel_desc;
  for (auto& [name, text] : rel_text) {
    RelationId id = ds.vocab.add_relation(name);
    if (rel_desc.count(id))
      throw Error(dir + "relation2text.tsv: duplicate description entry for '" + name + "'");
    rel_desc.emplace(id, std::move(text));
  }

  auto raw_train = read_triple_file(dir + "train.tsv", /*allow_labels=*/false);
  auto raw_dev = read_triple_file(dir + "dev.tsv", /*allow_labels=*/true);
  auto raw_test = read_triple_file(dir + "test.tsv", /*allow_labels=*/true);

  // Training names extend the vocabulary in first-appearance order.
  auto resolve_train = [&](const RawTriple& rt) {
    Triple t;
    t.head = ds.vocab.add_entity(rt.h);
    t.relation = ds.vocab.add_relation(rt.r);
    t.tail = ds.vocab.add_entity(rt.t);
    t.label = rt.label;
    return t;
  };
  for (auto& rt : raw_train) ds.train.push_back(resolve_train(rt));

  auto resolve_eval = [&](const RawTriple& rt, const char* split) {
    auto ent = [&](const std::string& name) -> EntityId {
      auto it = ds.vocab.entity_id.find(name);
      if (it != ds.vocab.entity_id.end()) return it->second;
      if (!opts.permissive)
        throw Error(std::string(split) + ".tsv: unknown entity '" + name +
                    "' (use permissive mode to register it)");
      return ds.vocab.add_entity(name);
    };
    auto rel = [&](const std::string& name) -> RelationId {
      auto it = ds.vocab.relation_id.find(name);
      if (it != ds.vocab.relation_id.end()) return it->second;
      if (!opts.permissive)
        throw Error(std::string(split) + ".tsv: unknown relation '" + name +
                    "' (use permissive mode to register it)");
      return ds.vocab.add_relation(name);
    };
    Triple t;
    t.head = ent(rt.h);
    t.relation = rel(rt.r);
    t.tail = ent(rt.t);
    t.label = rt.label;
    return t;
  };
  for (auto& rt : raw_dev) ds.dev.push_back(resolve_eval(rt, "dev"));
  for (auto& rt : raw_test) ds.test.push_back(resolve_eval(rt, "test"));

  ds.store.entity_text.resize(ds.vocab.num_entities());
  for (auto& [id, text] : ent_desc) ds.store.entity_text[id] = std::move(text);
  ds.store.relation_text.resize(ds.vocab.num_relations());
  for (auto& [id, text] : rel_desc) ds.store.relation_text[id] = std::move(text);

  return ds;
}

int64_t DegreeTable::total() const {
  return std::accumulate(degree.begin(), degree.end(), int64_t{0});
}

DegreeTable compute_degrees(const std::vector<Triple>& train, int num_entities) {
  DegreeTable table;
  table.degree.assign(num_entities, 0);
  for (const auto& t : train) {
    table.degree.at(t.head) += 1;
    table.degree.at(t.tail) += 1;
  }
  return table;
}

void FilterIndex::add(const Triple& t) {
  finalized_ = false;
  tails_[key(t.head, t.relation)].push_back(t.tail);
  heads_[key(t.relation, t.tail)].push_back(t.head);
}

void FilterIndex::finalize() {
  auto dedup = [](std::unordered_map<uint64_t, std::vector<EntityId>>& m) {
    for (auto& [k, v] : m) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
    }
  };
  dedup(tails_);
  dedup(heads_);
  finalized_ = true;
}

bool FilterIndex::contains(EntityId h, RelationId r, EntityId t) const {
  auto it = tails_.find(key(h, r));
  if (it == tails_.end()) return false;
  if (finalized_) return std::binary_search(it->second.begin(), it->second.end(), t);
  return std::find(it->second.begin(), it->second.end(), t) != it->second.end();
}

const std::vector<EntityId>& FilterIndex::tails(EntityId h, RelationId r) const {
  auto it = tails_.find(key(h, r));
  return it == tails_.end() ? empty_ : it->second;
}

const std::vector<EntityId>& FilterIndex::heads(RelationId r, EntityId t) const {
  auto it = heads_.find(key(r, t));
  return it == heads_.end() ? empty_ : it->second;
}

FilterIndex build_filter_index(const std::vector<const std::vector<Triple>*>& splits) {
  FilterIndex index;
  for (const auto* split : splits)
    for (const auto& t : *split)
      if (!t.label || *t.label) index.add(t);
  index.finalize();
  return index;
}

Triple corrupt_triple(const Triple& triple, Side side, std::mt19937_64& rng,
                      const FilterIndex& avoid, int num_entities) {
  if (num_entities < 1) throw Error("corrupt_triple: empty entity vocabulary");
  const EntityId original = side == Side::Head ? triple.head : triple.tail;
  auto make = [&](EntityId e) {
    Triple t = triple;
    t.label = false;
    (side == Side::Head ? t.head : t.tail) = e;
    return t;
  };
  auto ok = [&](EntityId e) {
    if (e == original) return false;
    Triple cand = make(e);
    return !avoid.contains(cand.head, cand.relation, cand.tail);
  };

  std::uniform_int_distribution<EntityId> pick(0, num_entities - 1);
  for (int attempt = 0; attempt < 64; ++attempt) {
    EntityId e = pick(rng);
    if (ok(e)) return make(e);
  }
  // Dense avoid-set: enumerate the survivors so exhaustion is detected.
  std::vector<EntityId> candidates;
  for (EntityId e = 0; e < num_entities; ++e)
    if (ok(e)) candidates.push_back(e);
  if (candidates.empty())
    throw Error("corrupt_triple: every " + std::string(side_name(side)) +
                " replacement is a known positive");
  std::uniform_int_distribution<size_t> pick2(0, candidates.size() - 1);
  return make(candidates[pick2(rng)]);
}

}  // namespace lmke
