#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ooskge/aggregation.hpp"
#include "ooskge/kg.hpp"
#include "ooskge/model.hpp"
#include "ooskge/splitgen.hpp"

namespace ooskge {

enum class QueryDirection : std::uint8_t {
  kTailQuery,  // (v, r, ?) with v out-of-sample
  kHeadQuery,  // (?, r, v) with v out-of-sample
};

// One leave-one-out query for an out-of-sample entity v: the held-out triple
// supplies direction, relation, and true answer; the remaining triples of
// the group form the context v is embedded from.
struct Query {
  std::string oos_entity;
  QueryDirection dir;
  RelationId rel;
  EntityId answer;
  std::vector<OosTriple> context;
  std::vector<EntityId> filtered;  // sorted candidates excluded by the group, minus the answer

  std::size_t neighborhood_size() const { return context.size(); }
};

// One query per triple of the group; context = the other triples.
// Throws ValidationError when the group has fewer than 2 triples.
std::vector<Query> make_queries(const OosGroup& group);

struct QueryRecord {
  std::string oos_entity;
  QueryDirection dir;
  RelationId rel;
  EntityId answer;
  std::uint32_t rank;
  std::uint32_t candidate_count;
  std::uint32_t neighborhood_size;
};

struct BinStat {
  std::uint32_t min_size;
  std::uint32_t max_size;
  std::uint64_t queries;
  double mrr;
};

struct RankingReport {
  std::vector<QueryRecord> records;
  double mrr = 0.0;
  double hit1 = 0.0;
  double hit3 = 0.0;
  double hit10 = 0.0;
  std::vector<BinStat> bins;
};

// Halved-tie rank of the true answer among all entities not excluded by the
// group's remaining triples: 1 + #strictly-greater + floor(#equal / 2).
// The answer itself is always a candidate.
std::uint32_t rank_answer(const Query& q, const Vec& oos_embedding, const EmbeddingModel& m);

enum class QuerySet { kValid, kTest };

struct EvalOptions {
  int num_threads = 0;  // 0 = library default; 1 = serial reference path
};

// Filtered ranking over every query of every group; the out-of-sample side
// of each query is embedded by the aggregator over its context.
RankingReport evaluate_groups(const std::vector<OosGroup>& groups, const EmbeddingModel& m,
                              const AggregatorConfig& agg, const EvalOptions& opts);

// Same, selecting the valid or test groups of a split; checks that the model
// vocabulary matches the split's train graph.
RankingReport evaluate(const OutOfSampleSplit& split, const EmbeddingModel& m,
                       const AggregatorConfig& agg, QuerySet set, const EvalOptions& opts);

// Ranks every query with one global entity ordering: descending train-triple
// occurrence count, ties broken by a seeded shuffle.
RankingReport baseline_popularity(const OutOfSampleSplit& split, std::uint64_t tie_seed,
                                  QuerySet set, const EvalOptions& opts);

// Embeds every out-of-sample entity as the column mean of the entity table.
RankingReport baseline_oov(const OutOfSampleSplit& split, const EmbeddingModel& m, QuerySet set,
                           const EvalOptions& opts);

// At most five contiguous neighborhood-size bins of approximately equal
// query count; queries with the same size always share a bin.
std::vector<BinStat> make_bins(const std::vector<QueryRecord>& records);

// report.txt (human-readable), report.tsv (metric, value), bins.tsv.
void write_report(const RankingReport& report, const std::string& dir);

}  // namespace ooskge
