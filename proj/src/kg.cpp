#include "ooskge/kg.hpp"

#include <fstream>
#include <sstream>

namespace ooskge {

std::uint32_t Vocabulary::intern(std::string_view label) {
  auto it = index_.find(label);
  if (it != index_.end()) return it->second;
  std::uint32_t id = static_cast<std::uint32_t>(labels_.size());
  labels_.emplace_back(label);
  index_.emplace(labels_.back(), id);
  return id;
}

std::optional<std::uint32_t> Vocabulary::find(std::string_view label) const {
  auto it = index_.find(label);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const std::string& Vocabulary::label(std::uint32_t id) const {
  if (id >= labels_.size()) throw Error("vocabulary handle out of range: " + std::to_string(id));
  return labels_[id];
}

EntityId KnowledgeGraph::intern_entity(std::string_view label) {
  EntityId id = entities_.intern(label);
  if (adjacency_.size() < entities_.size()) adjacency_.resize(entities_.size());
  return id;
}

RelationId KnowledgeGraph::intern_relation(std::string_view label) {
  return relations_.intern(label);
}

std::uint32_t KnowledgeGraph::add_triple(Triple t) {
  if (t.head >= entities_.size() || t.tail >= entities_.size())
    throw Error("triple references entity handle out of range");
  if (t.rel >= relations_.size())
    throw Error("triple references relation handle out of range");
  if (index_.contains(t))
    throw ValidationError("duplicate triple: (" + entities_.label(t.head) + ", " +
                          relations_.label(t.rel) + ", " + entities_.label(t.tail) + ")");
  std::uint32_t idx = static_cast<std::uint32_t>(triples_.size());
  triples_.push_back(t);
  index_.emplace(t, idx);
  if (adjacency_.size() < entities_.size()) adjacency_.resize(entities_.size());
  adjacency_[t.head].push_back({Direction::kOutgoing, t.rel, t.tail, idx});
  adjacency_[t.tail].push_back({Direction::kIncoming, t.rel, t.head, idx});
  return idx;
}

std::uint32_t KnowledgeGraph::add_triple(std::string_view head, std::string_view rel,
                                         std::string_view tail) {
  EntityId h = intern_entity(head);
  RelationId r = intern_relation(rel);
  EntityId t = intern_entity(tail);
  return add_triple(Triple{h, r, t});
}

std::span<const AdjEntry> KnowledgeGraph::adjacency(EntityId v) const {
  if (v >= entities_.size()) throw Error("entity handle out of range: " + std::to_string(v));
  if (v >= adjacency_.size()) return {};
  return adjacency_[v];
}

std::vector<AdjEntry> KnowledgeGraph::neighborhood(EntityId v,
                                                   std::optional<std::uint32_t> exclude) const {
  std::span<const AdjEntry> adj = adjacency(v);
  std::vector<AdjEntry> out;
  out.reserve(adj.size());
  for (const AdjEntry& e : adj) {
    if (exclude && e.triple_index == *exclude) continue;
    out.push_back(e);
  }
  return out;
}

std::optional<std::uint32_t> KnowledgeGraph::find_triple(const Triple& t) const {
  auto it = index_.find(t);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void append_triples(KnowledgeGraph& g, const std::filesystem::path& path, VocabPolicy policy) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open triple file: " + path.string());

  auto resolve_entity = [&](std::string_view label, std::size_t line_no) -> EntityId {
    if (policy == VocabPolicy::kStrict) {
      auto id = g.entities().find(label);
      if (!id)
        throw UnknownSymbolError("unknown entity '" + std::string(label) + "' at " +
                                 path.filename().string() + ":" + std::to_string(line_no));
      return *id;
    }
    return g.intern_entity(label);
  };
  auto resolve_relation = [&](std::string_view label, std::size_t line_no) -> RelationId {
    if (policy == VocabPolicy::kStrict) {
      auto id = g.relations().find(label);
      if (!id)
        throw UnknownSymbolError("unknown relation '" + std::string(label) + "' at " +
                                 path.filename().string() + ":" + std::to_string(line_no));
      return *id;
    }
    return g.intern_relation(label);
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t tab1 = line.find('\t');
    std::size_t tab2 = tab1 == std::string::npos ? std::string::npos : line.find('\t', tab1 + 1);
    std::size_t tab3 = tab2 == std::string::npos ? std::string::npos : line.find('\t', tab2 + 1);
    if (tab1 == std::string::npos || tab2 == std::string::npos || tab3 != std::string::npos)
      throw ParseError("expected 3 tab-separated fields at " + path.filename().string() + ":" +
                       std::to_string(line_no));
    std::string_view head = std::string_view(line).substr(0, tab1);
    std::string_view rel = std::string_view(line).substr(tab1 + 1, tab2 - tab1 - 1);
    std::string_view tail = std::string_view(line).substr(tab2 + 1);
    if (head.empty() || rel.empty() || tail.empty())
      throw ParseError("empty field at " + path.filename().string() + ":" +
                       std::to_string(line_no));
    EntityId h = resolve_entity(head, line_no);
    RelationId r = resolve_relation(rel, line_no);
    EntityId t = resolve_entity(tail, line_no);
    try {
      g.add_triple(Triple{h, r, t});
    } catch (const ValidationError& e) {
      throw ValidationError(std::string(e.what()) + " at " + path.filename().string() + ":" +
                            std::to_string(line_no));
    }
  }
}

KnowledgeGraph load_triples(const std::filesystem::path& path) {
  KnowledgeGraph g;
  append_triples(g, path, VocabPolicy::kExtend);
  return g;
}

KnowledgeGraph load_triples(const std::filesystem::path& path, const KnowledgeGraph& base,
                            VocabPolicy policy) {
  KnowledgeGraph g;
  for (const std::string& label : base.entities().labels()) g.intern_entity(label);
  for (const std::string& label : base.relations().labels()) g.intern_relation(label);
  append_triples(g, path, policy);
  return g;
}

void write_triples(const KnowledgeGraph& g, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);  // binary: keep LF endings everywhere
  if (!out) throw IoError("cannot open for writing: " + path.string());
  for (const Triple& t : g.triples()) {
    out << g.entities().label(t.head) << '\t' << g.relations().label(t.rel) << '\t'
        << g.entities().label(t.tail) << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace ooskge
