#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "ooskge/aggregation.hpp"
#include "ooskge/kg.hpp"
#include "ooskge/model.hpp"
#include "ooskge/rng.hpp"
#include "ooskge/splitgen.hpp"

namespace ooskge {

struct TrainConfig {
  double lr = 0.1;
  double lambda = 0.01;        // L2 weight on looked-up embedding rows
  int neg_ratio = 1;           // negatives per positive
  double psi = 0.5;            // probability one side of a triple is aggregated
  std::size_t dim = 200;
  std::size_t epochs = 1000;
  std::size_t batch_size = 1024;
  std::uint64_t seed = 0;
  AggregatorConfig aggregator;
  std::size_t eval_every = 100;  // epochs between validation passes

  void validate() const;  // throws ConfigError
};

// Per-parameter accumulated squared gradients.
struct OptimizerState {
  Mat ent_accum;
  Mat rel_accum;
  double eps = 1e-10;

  static OptimizerState for_model(const EmbeddingModel& m);
};

// acc += g^2; param -= lr * g / (sqrt(acc) + eps), elementwise.
void adagrad_step(std::span<double> param, std::span<double> accum, std::span<const double> grad,
                  double lr, double eps);

struct LabeledTriple {
  Triple triple;
  int label;  // +1 or -1
  bool operator==(const LabeledTriple&) const = default;
};
using LabeledBatch = std::vector<LabeledTriple>;

// Shuffled triple order for one epoch; stream "shuffle".
std::vector<std::uint32_t> epoch_order(std::size_t num_triples, std::uint64_t seed,
                                       std::size_t epoch);

// Positives from the shuffled order, each followed by neg_ratio corruptions:
// a fair coin picks head or tail, the replacement is uniform over all
// entities, and no check against known positives is made.
LabeledBatch next_batch(const KnowledgeGraph& g, std::span<const std::uint32_t> order,
                        std::size_t batch_index, std::size_t batch_size, int neg_ratio,
                        rng::Stream& corrupt_rng);

double softplus(double x);

// Eq-style batch loss: sum softplus(-l * score) plus lambda * ||row||^2 over
// the given rows (each counted once).
double batch_loss(std::span<const double> scores, std::span<const int> labels, double lambda,
                  std::span<const Vec> touched_rows);

struct RowRef {
  bool is_entity;
  std::uint32_t index;
  auto operator<=>(const RowRef&) const = default;
};

struct BatchGradients {
  double loss = 0.0;
  std::vector<std::pair<RowRef, Vec>> rows;  // sorted by RowRef: relations, then entities
};

struct BranchCounters {
  std::uint64_t aggregate_head = 0;
  std::uint64_t aggregate_tail = 0;
  std::uint64_t both_lookup = 0;
  std::uint64_t empty_fallback = 0;  // aggregation branch fell back to lookup
};

// One batch of out-of-sample-aware training. Per triple: one draw from
// branch_rng; below psi/2 the head is embedded by aggregation over its
// neighborhood minus the scored triple, below psi the tail is, otherwise
// both sides are looked up. An empty neighborhood silently falls back to
// lookup. ERAvg/EAvg backpropagate into the neighbor rows they read; the
// LS solve output is treated as constant. The L2 term covers rows obtained
// via lookup, once each. Gradients are returned, not applied.
BatchGradients batch_gradients_oos(const KnowledgeGraph& g, const EmbeddingModel& m,
                                   const TrainConfig& cfg, const LabeledBatch& batch,
                                   rng::Stream& branch_rng, BranchCounters* counters = nullptr);

// Reference transductive batch: both sides always looked up, no branch
// draws. Kept separate so the psi = 0 reduction can be checked against it.
BatchGradients batch_gradients_transductive(const KnowledgeGraph& g, const EmbeddingModel& m,
                                            const TrainConfig& cfg, const LabeledBatch& batch);

void apply_gradients(const BatchGradients& grads, EmbeddingModel& m, OptimizerState& state,
                     double lr);

// One epoch of each algorithm; returns the summed batch losses. Updates are
// applied sequentially in batch order.
double train_epoch_oos(const KnowledgeGraph& g, EmbeddingModel& m, OptimizerState& state,
                       const TrainConfig& cfg, std::size_t epoch,
                       BranchCounters* counters = nullptr);
double train_epoch_transductive(const KnowledgeGraph& g, EmbeddingModel& m, OptimizerState& state,
                                const TrainConfig& cfg, std::size_t epoch);

struct EpochLog {
  std::size_t epoch;  // 1-based
  double loss;
  bool has_valid_mrr = false;
  double valid_mrr = 0.0;
};

struct TrainResult {
  EmbeddingModel model;
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;     // 0 when no validation pass ran
  double best_valid_mrr = 0.0;
};

// Full training run. With validation groups, the model is evaluated every
// eval_every epochs (and at the last epoch) and the checkpoint with the best
// validation filtered MRR is returned; otherwise the final model is.
TrainResult train(const KnowledgeGraph& g, const TrainConfig& cfg,
                  const std::vector<OosGroup>* valid_groups = nullptr);

}  // namespace ooskge
