#include "ooskge/splitgen.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_map>

#include "ooskge/kvfile.hpp"
#include "ooskge/rng.hpp"

namespace ooskge {

SplitStats OutOfSampleSplit::stats() const {
  SplitStats s;
  s.in_sample_entities = train.entities().size();
  s.relations = train.relations().size();
  s.train_triples = train.num_triples();
  s.oos_valid = static_cast<std::uint32_t>(valid.size());
  s.oos_test = static_cast<std::uint32_t>(test.size());
  for (const OosGroup& g : valid) s.valid_queries += g.triples.size();
  for (const OosGroup& g : test) s.test_queries += g.triples.size();
  return s;
}

OutOfSampleSplit build_split(const KnowledgeGraph& merged, double oos_fraction,
                             std::uint64_t seed) {
  if (!(oos_fraction > 0.0 && oos_fraction < 1.0))
    throw ConfigError("oos fraction must lie in (0, 1), got " + std::to_string(oos_fraction));
  if (merged.num_triples() == 0) throw ValidationError("cannot split an empty graph");

  const std::uint32_t num_entities = merged.entities().size();

  // Step 2: candidates are entities appearing in >= 2 triples of the merged
  // graph (a self-loop counts as one appearance).
  std::vector<std::uint32_t> triple_count(num_entities, 0);
  for (const Triple& t : merged.triples()) {
    ++triple_count[t.head];
    if (t.tail != t.head) ++triple_count[t.tail];
  }
  std::vector<EntityId> eligible;
  for (EntityId v = 0; v < num_entities; ++v)
    if (triple_count[v] >= 2) eligible.push_back(v);

  const std::size_t num_oos =
      static_cast<std::size_t>(oos_fraction * static_cast<double>(eligible.size()));
  if (num_oos == 0)
    throw DegenerateSplitError("no out-of-sample candidates (eligible entities: " +
                               std::to_string(eligible.size()) + ")");

  rng::Stream sample_rng(rng::substream_seed(seed, "oos-sample"));
  sample_rng.shuffle(eligible);
  std::vector<bool> is_oos(num_entities, false);
  for (std::size_t i = 0; i < num_oos; ++i) is_oos[eligible[i]] = true;

  // Step 3: route triples.
  std::vector<std::uint32_t> train_idx;
  std::vector<std::uint32_t> pool_idx;
  for (std::uint32_t i = 0; i < merged.num_triples(); ++i) {
    const Triple& t = merged.triple(i);
    const bool head_oos = is_oos[t.head];
    const bool tail_oos = is_oos[t.tail];
    if (head_oos && tail_oos) continue;  // covers self-loops on an oos entity
    if (head_oos || tail_oos)
      pool_idx.push_back(i);
    else
      train_idx.push_back(i);
  }

  // Step 4: drop pool triples whose in-sample endpoint or relation never
  // occurs in train. Train itself is untouched by these removals, but the
  // loop reruns until a full pass removes nothing.
  std::vector<bool> entity_in_train(num_entities, false);
  std::vector<bool> relation_in_train(merged.relations().size(), false);
  for (std::uint32_t i : train_idx) {
    const Triple& t = merged.triple(i);
    entity_in_train[t.head] = true;
    entity_in_train[t.tail] = true;
    relation_in_train[t.rel] = true;
  }
  for (;;) {
    std::vector<std::uint32_t> kept;
    kept.reserve(pool_idx.size());
    for (std::uint32_t i : pool_idx) {
      const Triple& t = merged.triple(i);
      const EntityId in_sample = is_oos[t.head] ? t.tail : t.head;
      if (entity_in_train[in_sample] && relation_in_train[t.rel]) kept.push_back(i);
    }
    const bool changed = kept.size() != pool_idx.size();
    pool_idx = std::move(kept);
    if (!changed) break;
  }

  // Step 5: group by oos entity, keep groups of >= 2.
  std::vector<std::vector<std::uint32_t>> group_of(num_entities);
  for (std::uint32_t i : pool_idx) {
    const Triple& t = merged.triple(i);
    group_of[is_oos[t.head] ? t.head : t.tail].push_back(i);
  }
  std::vector<EntityId> survivors;
  for (EntityId v = 0; v < num_entities; ++v)
    if (is_oos[v] && group_of[v].size() >= 2) survivors.push_back(v);
  if (survivors.empty())
    throw DegenerateSplitError("all out-of-sample entities were eliminated");

  // Step 6: entities (with all their triples) split 50/50; the smaller half
  // becomes validation when the count is odd.
  rng::Stream half_rng(rng::substream_seed(seed, "valid-test"));
  half_rng.shuffle(survivors);
  const std::size_t num_valid = survivors.size() / 2;
  std::vector<EntityId> valid_entities(survivors.begin(),
                                       survivors.begin() + static_cast<std::ptrdiff_t>(num_valid));
  std::vector<EntityId> test_entities(survivors.begin() + static_cast<std::ptrdiff_t>(num_valid),
                                      survivors.end());
  std::sort(valid_entities.begin(), valid_entities.end());
  std::sort(test_entities.begin(), test_entities.end());

  OutOfSampleSplit split;
  split.seed = seed;
  split.oos_fraction = oos_fraction;
  for (std::uint32_t i : train_idx) {
    const Triple& t = merged.triple(i);
    split.train.add_triple(merged.entities().label(t.head), merged.relations().label(t.rel),
                           merged.entities().label(t.tail));
  }

  auto make_groups = [&](const std::vector<EntityId>& members) {
    std::vector<OosGroup> groups;
    groups.reserve(members.size());
    for (EntityId v : members) {
      OosGroup g;
      g.label = merged.entities().label(v);
      for (std::uint32_t i : group_of[v]) {
        const Triple& t = merged.triple(i);
        const bool oos_is_head = t.head == v;
        const EntityId in_sample = oos_is_head ? t.tail : t.head;
        OosTriple ot;
        ot.oos_is_head = oos_is_head;
        ot.rel = *split.train.relations().find(merged.relations().label(t.rel));
        ot.other = *split.train.entities().find(merged.entities().label(in_sample));
        g.triples.push_back(ot);
      }
      groups.push_back(std::move(g));
    }
    return groups;
  };
  split.valid = make_groups(valid_entities);
  split.test = make_groups(test_entities);
  return split;
}

namespace {

void write_groups(const OutOfSampleSplit& split, const std::vector<OosGroup>& groups,
                  const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  for (const OosGroup& g : groups) {
    for (const OosTriple& t : g.triples) {
      const std::string& rel = split.train.relations().label(t.rel);
      const std::string& other = split.train.entities().label(t.other);
      if (t.oos_is_head)
        out << g.label << '\t' << rel << '\t' << other << '\n';
      else
        out << other << '\t' << rel << '\t' << g.label << '\n';
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<OosGroup> read_groups(const KnowledgeGraph& train, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path.string());
  std::vector<OosGroup> groups;
  std::unordered_map<std::string, std::size_t> group_index;
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
    const std::string head = line.substr(0, tab1);
    const std::string rel = line.substr(tab1 + 1, tab2 - tab1 - 1);
    const std::string tail = line.substr(tab2 + 1);

    auto head_id = train.entities().find(head);
    auto tail_id = train.entities().find(tail);
    if (head_id.has_value() == tail_id.has_value())
      throw FormatError("expected exactly one entity absent from train at " +
                        path.filename().string() + ":" + std::to_string(line_no));
    auto rel_id = train.relations().find(rel);
    if (!rel_id)
      throw FormatError("relation '" + rel + "' absent from train at " +
                        path.filename().string() + ":" + std::to_string(line_no));

    OosTriple t;
    t.oos_is_head = !head_id.has_value();
    t.rel = *rel_id;
    t.other = t.oos_is_head ? *tail_id : *head_id;
    const std::string& label = t.oos_is_head ? head : tail;

    auto [it, inserted] = group_index.try_emplace(label, groups.size());
    if (inserted) groups.push_back(OosGroup{label, {}});
    groups[it->second].triples.push_back(t);
  }
  for (const OosGroup& g : groups)
    if (g.triples.size() < 2)
      throw FormatError("out-of-sample entity '" + g.label + "' has fewer than 2 triples in " +
                        path.filename().string());
  return groups;
}

}  // namespace

void write_split(const OutOfSampleSplit& split, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_triples(split.train, dir / "train.txt");
  write_groups(split, split.valid, dir / "valid.txt");
  write_groups(split, split.test, dir / "test.txt");

  SplitStats s = split.stats();
  KvFile kv;
  kv.set_u64("in_sample_entities", s.in_sample_entities);
  kv.set_u64("oos_entities_valid", s.oos_valid);
  kv.set_u64("oos_entities_test", s.oos_test);
  kv.set_u64("relations", s.relations);
  kv.set_u64("train_triples", s.train_triples);
  kv.set_u64("valid_queries", s.valid_queries);
  kv.set_u64("test_queries", s.test_queries);
  kv.set_u64("seed", split.seed);
  kv.set_double("oos_fraction", split.oos_fraction);
  kv.write(dir / "stats.txt");
}

OutOfSampleSplit read_split(const std::filesystem::path& dir) {
  OutOfSampleSplit split;
  split.train = load_triples(dir / "train.txt");
  split.valid = read_groups(split.train, dir / "valid.txt");
  split.test = read_groups(split.train, dir / "test.txt");
  KvFile kv = KvFile::read(dir / "stats.txt");
  split.seed = kv.require_u64("seed");
  split.oos_fraction = kv.require_double("oos_fraction");
  return split;
}

}  // namespace ooskge
