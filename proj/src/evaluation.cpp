#include "ooskge/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ooskge/errors.hpp"
#include "ooskge/numerics.hpp"
#include "ooskge/rng.hpp"

namespace ooskge {

std::vector<Query> make_queries(const OosGroup& group) {
  if (group.triples.size() < 2) {
    throw ValidationError("group '" + group.label + "' has fewer than 2 triples");
  }
  std::vector<Query> queries;
  queries.reserve(group.triples.size());
  for (std::size_t i = 0; i < group.triples.size(); ++i) {
    const OosTriple& held_out = group.triples[i];
    Query q;
    q.oos_entity = group.label;
    q.dir = held_out.oos_is_head ? QueryDirection::kTailQuery : QueryDirection::kHeadQuery;
    q.rel = held_out.rel;
    q.answer = held_out.other;
    q.context.reserve(group.triples.size() - 1);
    for (std::size_t j = 0; j < group.triples.size(); ++j) {
      if (j != i) q.context.push_back(group.triples[j]);
    }
    // Candidates whose triple (same direction, same relation) already
    // appears among the group's other triples are excluded from ranking.
    for (const OosTriple& t : q.context) {
      if (t.oos_is_head == held_out.oos_is_head && t.rel == held_out.rel &&
          t.other != q.answer) {
        q.filtered.push_back(t.other);
      }
    }
    std::sort(q.filtered.begin(), q.filtered.end());
    q.filtered.erase(std::unique(q.filtered.begin(), q.filtered.end()), q.filtered.end());
    queries.push_back(std::move(q));
  }
  return queries;
}

namespace {

struct RankOutcome {
  std::uint32_t rank;
  std::uint32_t candidates;
};

// Halved-tie rank of the answer under an arbitrary per-candidate score.
template <typename ScoreFn>
RankOutcome rank_with(const Query& q, std::size_t num_entities, ScoreFn&& score) {
  const double s_true = score(q.answer);
  std::uint64_t greater = 0;
  std::uint64_t ties = 0;
  for (std::size_t c = 0; c < num_entities; ++c) {
    const auto cand = static_cast<EntityId>(c);
    if (cand == q.answer) continue;
    if (std::binary_search(q.filtered.begin(), q.filtered.end(), cand)) continue;
    const double s = score(cand);
    if (s > s_true) {
      ++greater;
    } else if (s == s_true) {
      ++ties;
    }
  }
  return RankOutcome{static_cast<std::uint32_t>(1 + greater + ties / 2),
                     static_cast<std::uint32_t>(num_entities - q.filtered.size())};
}

std::vector<Query> flatten_queries(const std::vector<OosGroup>& groups) {
  std::vector<Query> queries;
  for (const OosGroup& group : groups) {
    std::vector<Query> qs = make_queries(group);
    queries.insert(queries.end(), std::make_move_iterator(qs.begin()),
                   std::make_move_iterator(qs.end()));
  }
  return queries;
}

// Runs per_query over every query (in parallel when OpenMP is available and
// more than one thread is requested or allowed) and reduces the stored
// records serially, so the report never depends on the worker count.
template <typename PerQuery>
RankingReport run_queries(const std::vector<Query>& queries, const EvalOptions& opts,
                          PerQuery&& per_query) {
  if (queries.empty()) throw Error("no queries to evaluate");
  RankingReport report;
  report.records.resize(queries.size());
  const auto n = static_cast<std::int64_t>(queries.size());
#ifdef _OPENMP
  const int threads = opts.num_threads > 0 ? opts.num_threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 8) num_threads(threads)
#endif
  for (std::int64_t i = 0; i < n; ++i) {
    const Query& q = queries[static_cast<std::size_t>(i)];
    const RankOutcome out = per_query(q);
    report.records[static_cast<std::size_t>(i)] =
        QueryRecord{q.oos_entity,
                    q.dir,
                    q.rel,
                    q.answer,
                    out.rank,
                    out.candidates,
                    static_cast<std::uint32_t>(q.neighborhood_size())};
  }
#ifndef _OPENMP
  (void)opts;
#endif

  double recip_sum = 0.0;
  std::uint64_t h1 = 0;
  std::uint64_t h3 = 0;
  std::uint64_t h10 = 0;
  for (const QueryRecord& rec : report.records) {
    recip_sum += 1.0 / static_cast<double>(rec.rank);
    if (rec.rank <= 1) ++h1;
    if (rec.rank <= 3) ++h3;
    if (rec.rank <= 10) ++h10;
  }
  const auto count = static_cast<double>(report.records.size());
  report.mrr = recip_sum / count;
  report.hit1 = static_cast<double>(h1) / count;
  report.hit3 = static_cast<double>(h3) / count;
  report.hit10 = static_cast<double>(h10) / count;
  report.bins = make_bins(report.records);
  return report;
}

std::vector<AdjEntry> context_entries(const Query& q) {
  std::vector<AdjEntry> entries;
  entries.reserve(q.context.size());
  for (std::size_t i = 0; i < q.context.size(); ++i) {
    const OosTriple& t = q.context[i];
    entries.push_back(AdjEntry{t.oos_is_head ? Direction::kOutgoing : Direction::kIncoming,
                               t.rel, t.other, static_cast<std::uint32_t>(i)});
  }
  return entries;
}

void check_vocab(const OutOfSampleSplit& split, const EmbeddingModel& m) {
  if (!(m.entities == split.train.entities()) || !(m.relations == split.train.relations())) {
    throw ValidationError("checkpoint vocabulary does not match the dataset's train graph");
  }
}

const std::vector<OosGroup>& pick_groups(const OutOfSampleSplit& split, QuerySet set) {
  return set == QuerySet::kValid ? split.valid : split.test;
}

}  // namespace

std::uint32_t rank_answer(const Query& q, const Vec& oos_embedding, const EmbeddingModel& m) {
  Vec weight = hadamard(oos_embedding, m.relation_row(q.rel));
  return rank_with(q, m.entities.size(),
                   [&](EntityId c) { return dot(weight, m.entity_row(c)); })
      .rank;
}

RankingReport evaluate_groups(const std::vector<OosGroup>& groups, const EmbeddingModel& m,
                              const AggregatorConfig& agg, const EvalOptions& opts) {
  const std::vector<Query> queries = flatten_queries(groups);
  return run_queries(queries, opts, [&](const Query& q) {
    const Vec z_oos = aggregate(agg, context_entries(q), m);
    const auto z_rel = m.relation_row(q.rel);
    Vec weight(m.dim());
    for (std::size_t i = 0; i < weight.size(); ++i) weight[i] = z_oos[i] * z_rel[i];
    return rank_with(q, m.entities.size(),
                     [&](EntityId c) { return dot(weight, m.entity_row(c)); });
  });
}

RankingReport evaluate(const OutOfSampleSplit& split, const EmbeddingModel& m,
                       const AggregatorConfig& agg, QuerySet set, const EvalOptions& opts) {
  check_vocab(split, m);
  return evaluate_groups(pick_groups(split, set), m, agg, opts);
}

RankingReport baseline_popularity(const OutOfSampleSplit& split, std::uint64_t tie_seed,
                                  QuerySet set, const EvalOptions& opts) {
  const std::size_t num_entities = split.train.entities().size();
  std::vector<std::uint64_t> count(num_entities, 0);
  for (const Triple& t : split.train.triples()) {
    ++count[t.head];
    ++count[t.tail];
  }
  // Seeded shuffle first, then a stable sort by descending count, so equally
  // frequent entities land in random relative order.
  std::vector<EntityId> ordering(num_entities);
  std::iota(ordering.begin(), ordering.end(), 0);
  rng::Stream stream(rng::substream_seed(tie_seed, "popularity"));
  stream.shuffle(ordering);
  std::stable_sort(ordering.begin(), ordering.end(),
                   [&](EntityId a, EntityId b) { return count[a] > count[b]; });
  std::vector<std::uint32_t> position(num_entities);
  for (std::size_t i = 0; i < num_entities; ++i) position[ordering[i]] = i;

  const std::vector<Query> queries = flatten_queries(pick_groups(split, set));
  return run_queries(queries, opts, [&](const Query& q) {
    return rank_with(q, num_entities,
                     [&](EntityId c) { return -static_cast<double>(position[c]); });
  });
}

RankingReport baseline_oov(const OutOfSampleSplit& split, const EmbeddingModel& m, QuerySet set,
                           const EvalOptions& opts) {
  check_vocab(split, m);
  const std::size_t dim = m.dim();
  Vec z_oov(dim, 0.0);
  for (std::size_t v = 0; v < m.ent.rows(); ++v) {
    const auto row = m.entity_row(static_cast<EntityId>(v));
    for (std::size_t i = 0; i < dim; ++i) z_oov[i] += row[i];
  }
  for (double& x : z_oov) x /= static_cast<double>(m.ent.rows());

  const std::vector<Query> queries = flatten_queries(pick_groups(split, set));
  return run_queries(queries, opts, [&](const Query& q) {
    const auto z_rel = m.relation_row(q.rel);
    Vec weight(dim);
    for (std::size_t i = 0; i < dim; ++i) weight[i] = z_oov[i] * z_rel[i];
    return rank_with(q, m.entities.size(),
                     [&](EntityId c) { return dot(weight, m.entity_row(c)); });
  });
}

std::vector<BinStat> make_bins(const std::vector<QueryRecord>& records) {
  struct SizeClass {
    std::uint32_t size;
    std::uint64_t queries = 0;
    double recip_sum = 0.0;
  };
  std::vector<SizeClass> classes;
  {
    std::vector<QueryRecord> sorted = records;
    std::sort(sorted.begin(), sorted.end(), [](const QueryRecord& a, const QueryRecord& b) {
      return a.neighborhood_size < b.neighborhood_size;
    });
    for (const QueryRecord& rec : sorted) {
      if (classes.empty() || classes.back().size != rec.neighborhood_size) {
        classes.push_back(SizeClass{rec.neighborhood_size});
      }
      ++classes.back().queries;
      classes.back().recip_sum += 1.0 / static_cast<double>(rec.rank);
    }
  }

  const std::size_t num_bins = std::min<std::size_t>(5, classes.size());
  std::vector<BinStat> bins;
  std::size_t idx = 0;
  std::uint64_t remaining = records.size();
  for (std::size_t b = 0; b < num_bins; ++b) {
    const std::size_t bins_left = num_bins - b;
    std::size_t last = idx;  // bin spans classes [idx, last]
    std::uint64_t taken = classes[idx].queries;
    if (b + 1 == num_bins) {
      last = classes.size() - 1;
    } else {
      // Grow the bin while that moves its count closer to an equal share,
      // keeping at least one class per remaining bin.
      const double target = static_cast<double>(remaining) / static_cast<double>(bins_left);
      while (classes.size() - (last + 1) > bins_left - 1) {
        const std::uint64_t next = classes[last + 1].queries;
        if (std::abs(static_cast<double>(taken + next) - target) <=
            std::abs(static_cast<double>(taken) - target)) {
          ++last;
          taken += next;
        } else {
          break;
        }
      }
    }
    BinStat bin{classes[idx].size, classes[last].size, 0, 0.0};
    double recip_sum = 0.0;
    for (std::size_t c = idx; c <= last; ++c) {
      bin.queries += classes[c].queries;
      recip_sum += classes[c].recip_sum;
    }
    bin.mrr = recip_sum / static_cast<double>(bin.queries);
    bins.push_back(bin);
    remaining -= bin.queries;
    idx = last + 1;
  }
  return bins;
}

namespace {

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

void write_report(const RankingReport& report, const std::string& dir) {
  const std::filesystem::path base(dir);
  std::filesystem::create_directories(base);

  {
    std::string text;
    char line[128];
    std::snprintf(line, sizeof(line), "queries  %zu\n", report.records.size());
    text += line;
    std::snprintf(line, sizeof(line), "mrr      %.4f\n", report.mrr);
    text += line;
    std::snprintf(line, sizeof(line), "hit@1    %.4f\n", report.hit1);
    text += line;
    std::snprintf(line, sizeof(line), "hit@3    %.4f\n", report.hit3);
    text += line;
    std::snprintf(line, sizeof(line), "hit@10   %.4f\n", report.hit10);
    text += line;
    text += "neighborhood-size bins:\n";
    for (const BinStat& bin : report.bins) {
      std::snprintf(line, sizeof(line), "  [%u, %u]  %llu queries  mrr %.4f\n", bin.min_size,
                    bin.max_size, static_cast<unsigned long long>(bin.queries), bin.mrr);
      text += line;
    }
    write_text_file(base / "report.txt", text);
  }

  {
    std::string tsv = "metric\tvalue\n";
    tsv += "queries\t" + std::to_string(report.records.size()) + "\n";
    tsv += "mrr\t" + format_double(report.mrr) + "\n";
    tsv += "hit1\t" + format_double(report.hit1) + "\n";
    tsv += "hit3\t" + format_double(report.hit3) + "\n";
    tsv += "hit10\t" + format_double(report.hit10) + "\n";
    write_text_file(base / "report.tsv", tsv);
  }

  {
    std::string tsv = "min_size\tmax_size\tqueries\tmrr\n";
    for (const BinStat& bin : report.bins) {
      tsv += std::to_string(bin.min_size) + "\t" + std::to_string(bin.max_size) + "\t" +
             std::to_string(bin.queries) + "\t" + format_double(bin.mrr) + "\n";
    }
    write_text_file(base / "bins.tsv", tsv);
  }
}

}  // namespace ooskge
