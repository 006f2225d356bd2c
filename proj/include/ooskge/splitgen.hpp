#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ooskge/kg.hpp"

namespace ooskge {

// One triple of an out-of-sample entity's neighborhood. The out-of-sample
// endpoint is identified by position; rel and other are train-graph handles.
struct OosTriple {
  bool oos_is_head;
  RelationId rel;
  EntityId other;
  bool operator==(const OosTriple&) const = default;
};

struct OosGroup {
  std::string label;                // the out-of-sample entity
  std::vector<OosTriple> triples;   // always >= 2
  bool operator==(const OosGroup&) const = default;
};

struct SplitStats {
  std::uint32_t in_sample_entities = 0;
  std::uint32_t oos_valid = 0;
  std::uint32_t oos_test = 0;
  std::uint32_t relations = 0;
  std::uint64_t train_triples = 0;
  std::uint64_t valid_queries = 0;  // sum of group sizes (one query per triple)
  std::uint64_t test_queries = 0;
  bool operator==(const SplitStats&) const = default;
};

// Train graph plus grouped validation/test neighborhoods. Invariants:
// no out-of-sample label occurs in train; every group triple has exactly one
// out-of-sample endpoint; every group has >= 2 triples; every in-sample
// entity and relation in the groups occurs in at least one train triple.
struct OutOfSampleSplit {
  KnowledgeGraph train;
  std::vector<OosGroup> valid;
  std::vector<OosGroup> test;
  std::uint64_t seed = 0;
  double oos_fraction = 0.0;

  SplitStats stats() const;  // recounted from the data every call
};

// Benchmark split construction from a merged graph:
//   1. the caller has merged all source triples into `merged`;
//   2. from entities in >= 2 triples, sample floor(fraction * count) without
//      replacement as out-of-sample candidates;
//   3. drop triples with two out-of-sample endpoints, route one-endpoint
//      triples to the query pool, keep the rest as train;
//   4. remove in-sample entities and relations with no train triple, plus
//      the pool triples they appear in, repeating until nothing changes;
//   5. drop out-of-sample entities left with fewer than 2 triples;
//   6. split the survivors 50/50 at random into valid and test.
// Deterministic given seed.
OutOfSampleSplit build_split(const KnowledgeGraph& merged, double oos_fraction,
                             std::uint64_t seed);

// Directory layout: train.txt / valid.txt / test.txt (triple TSV; each
// valid/test line carries exactly one entity absent from train's vocabulary)
// and stats.txt (key=value).
void write_split(const OutOfSampleSplit& split, const std::filesystem::path& dir);
OutOfSampleSplit read_split(const std::filesystem::path& dir);

}  // namespace ooskge
