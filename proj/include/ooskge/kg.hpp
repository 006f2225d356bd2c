#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ooskge/errors.hpp"

namespace ooskge {

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;

// Bijection between string labels and dense 0-based handles.
// Interning order is first-appearance order.
class Vocabulary {
 public:
  std::uint32_t intern(std::string_view label);
  std::optional<std::uint32_t> find(std::string_view label) const;
  const std::string& label(std::uint32_t id) const;
  std::uint32_t size() const { return static_cast<std::uint32_t>(labels_.size()); }
  const std::vector<std::string>& labels() const { return labels_; }
  bool operator==(const Vocabulary& other) const { return labels_ == other.labels_; }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::uint32_t, Hash, std::equal_to<>> index_;
};

struct Triple {
  EntityId head;
  RelationId rel;
  EntityId tail;
  bool operator==(const Triple&) const = default;
};

enum class Direction : std::uint8_t { kOutgoing, kIncoming };

// One edge as seen from a particular entity: the relation, the entity on the
// other end, and whether the edge leaves or enters.
struct AdjEntry {
  Direction dir;
  RelationId rel;
  EntityId other;
  std::uint32_t triple_index;
};

// Interned vocabularies, ordered triple list, per-entity adjacency.
// Immutable once populated; concurrent reads are safe, construction is not.
class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;

  EntityId intern_entity(std::string_view label);
  RelationId intern_relation(std::string_view label);

  // Throws ValidationError on an exact duplicate. A self-loop contributes one
  // outgoing and one incoming adjacency entry.
  std::uint32_t add_triple(Triple t);
  std::uint32_t add_triple(std::string_view head, std::string_view rel, std::string_view tail);

  const Vocabulary& entities() const { return entities_; }
  const Vocabulary& relations() const { return relations_; }
  Vocabulary& mutable_entities() { return entities_; }
  Vocabulary& mutable_relations() { return relations_; }

  std::size_t num_triples() const { return triples_.size(); }
  const Triple& triple(std::uint32_t index) const { return triples_.at(index); }
  const std::vector<Triple>& triples() const { return triples_; }

  std::span<const AdjEntry> adjacency(EntityId v) const;

  // All adjacency entries of v, minus those for `exclude`, in triple order.
  std::vector<AdjEntry> neighborhood(EntityId v,
                                     std::optional<std::uint32_t> exclude = std::nullopt) const;

  std::optional<std::uint32_t> find_triple(const Triple& t) const;
  bool contains(const Triple& t) const { return find_triple(t).has_value(); }

 private:
  struct TripleHash {
    std::size_t operator()(const Triple& t) const noexcept {
      std::uint64_t x = (std::uint64_t(t.head) << 40) ^ (std::uint64_t(t.rel) << 20) ^ t.tail;
      x ^= x >> 33;
      x *= 0xff51afd7ed558ccdull;
      x ^= x >> 33;
      return static_cast<std::size_t>(x);
    }
  };

  Vocabulary entities_;
  Vocabulary relations_;
  std::vector<Triple> triples_;
  std::vector<std::vector<AdjEntry>> adjacency_;
  std::unordered_map<Triple, std::uint32_t, TripleHash> index_;
};

enum class VocabPolicy {
  kExtend,  // unknown labels are interned
  kStrict,  // unknown labels raise UnknownSymbolError
};

// Reads a triple TSV: head<TAB>relation<TAB>tail, one per line, no header.
// With a base graph, starts from a copy of its vocabularies (triples are not
// copied) and applies the given policy to labels absent from them.
// append_triples adds a file's triples into an existing graph, so several
// files can be merged; duplicate detection spans everything already added.
void append_triples(KnowledgeGraph& g, const std::filesystem::path& path,
                    VocabPolicy policy = VocabPolicy::kExtend);
KnowledgeGraph load_triples(const std::filesystem::path& path);
KnowledgeGraph load_triples(const std::filesystem::path& path, const KnowledgeGraph& base,
                            VocabPolicy policy);

void write_triples(const KnowledgeGraph& g, const std::filesystem::path& path);

}  // namespace ooskge
