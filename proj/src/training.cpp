#include "ooskge/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <unordered_map>

#include "ooskge/errors.hpp"
#include "ooskge/evaluation.hpp"
#include "ooskge/numerics.hpp"

namespace ooskge {

void TrainConfig::validate() const {
  if (lr <= 0.0) throw ConfigError("learning rate must be positive");
  if (lambda < 0.0) throw ConfigError("L2 weight must be non-negative");
  if (neg_ratio < 1) throw ConfigError("negative ratio must be at least 1");
  if (psi < 0.0 || psi > 1.0) throw ConfigError("psi must lie in [0, 1]");
  if (dim == 0) throw ConfigError("embedding dimension must be positive");
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  if (eval_every == 0) throw ConfigError("eval-every must be positive");
  if ((aggregator.kind == AggregatorKind::kLS || aggregator.kind == AggregatorKind::kLSU) &&
      aggregator.lambda <= 0.0) {
    throw ConfigError("least-squares aggregation needs a positive ridge weight");
  }
}

OptimizerState OptimizerState::for_model(const EmbeddingModel& m) {
  return OptimizerState{Mat(m.ent.rows(), m.ent.cols()), Mat(m.rel.rows(), m.rel.cols())};
}

void adagrad_step(std::span<double> param, std::span<double> accum, std::span<const double> grad,
                  double lr, double eps) {
  if (param.size() != accum.size() || param.size() != grad.size()) {
    throw Error("adagrad_step: size mismatch");
  }
  for (std::size_t i = 0; i < param.size(); ++i) {
    accum[i] += grad[i] * grad[i];
    param[i] -= lr * grad[i] / (std::sqrt(accum[i]) + eps);
  }
}

std::vector<std::uint32_t> epoch_order(std::size_t num_triples, std::uint64_t seed,
                                       std::size_t epoch) {
  std::vector<std::uint32_t> order(num_triples);
  for (std::size_t i = 0; i < num_triples; ++i) order[i] = static_cast<std::uint32_t>(i);
  rng::Stream stream(rng::substream_seed(seed, "shuffle", epoch));
  stream.shuffle(order);
  return order;
}

LabeledBatch next_batch(const KnowledgeGraph& g, std::span<const std::uint32_t> order,
                        std::size_t batch_index, std::size_t batch_size, int neg_ratio,
                        rng::Stream& corrupt_rng) {
  const std::size_t begin = batch_index * batch_size;
  if (begin >= order.size()) throw Error("next_batch: batch index out of range");
  const std::size_t end = std::min(begin + batch_size, order.size());
  const std::uint64_t num_entities = g.entities().size();

  LabeledBatch batch;
  batch.reserve((end - begin) * static_cast<std::size_t>(1 + neg_ratio));
  for (std::size_t i = begin; i < end; ++i) {
    const Triple& pos = g.triple(order[i]);
    batch.push_back({pos, +1});
    for (int k = 0; k < neg_ratio; ++k) {
      Triple neg = pos;
      const bool corrupt_head = corrupt_rng.next_below(2) == 0;
      const auto replacement = static_cast<EntityId>(corrupt_rng.next_below(num_entities));
      if (corrupt_head) {
        neg.head = replacement;
      } else {
        neg.tail = replacement;
      }
      batch.push_back({neg, -1});
    }
  }
  return batch;
}

double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double batch_loss(std::span<const double> scores, std::span<const int> labels, double lambda,
                  std::span<const Vec> touched_rows) {
  if (scores.size() != labels.size()) throw Error("batch_loss: size mismatch");
  double loss = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    loss += softplus(-static_cast<double>(labels[i]) * scores[i]);
  }
  for (const Vec& row : touched_rows) loss += lambda * squared_norm(row);
  return loss;
}

namespace {

// logistic(x), stable on both tails
double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Sparse per-row gradient accumulator. Insertion order is preserved so the
// L2 pass walks rows in the order they were first touched, keeping the
// summation order identical between the two batch implementations.
class GradientBuffer {
 public:
  explicit GradientBuffer(std::size_t dim) : dim_(dim) {}

  Vec& row(bool is_entity, std::uint32_t index, bool via_lookup) {
    const std::uint64_t key =
        (static_cast<std::uint64_t>(is_entity ? 0 : 1) << 32) | static_cast<std::uint64_t>(index);
    auto [it, inserted] = slot_of_.try_emplace(key, grads_.size());
    if (inserted) {
      refs_.push_back({is_entity, index});
      grads_.emplace_back(dim_, 0.0);
      lookup_.push_back(false);
    }
    if (via_lookup) lookup_[it->second] = true;
    return grads_[it->second];
  }

  // lambda * ||row||^2 added to the loss and 2 * lambda * row to the
  // gradient, for every row that entered via lookup.
  double finalize_l2(const EmbeddingModel& m, double lambda) {
    double penalty = 0.0;
    for (std::size_t s = 0; s < grads_.size(); ++s) {
      if (!lookup_[s]) continue;
      const RowRef ref = refs_[s];
      const auto theta =
          ref.is_entity ? m.entity_row(ref.index) : m.relation_row(ref.index);
      penalty += lambda * squared_norm(theta);
      Vec& grad = grads_[s];
      for (std::size_t i = 0; i < dim_; ++i) grad[i] += 2.0 * lambda * theta[i];
    }
    return penalty;
  }

  std::vector<std::pair<RowRef, Vec>> take_sorted() {
    std::vector<std::pair<RowRef, Vec>> out;
    out.reserve(grads_.size());
    for (std::size_t s = 0; s < grads_.size(); ++s) {
      out.emplace_back(refs_[s], std::move(grads_[s]));
    }
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    return out;
  }

 private:
  std::size_t dim_;
  std::unordered_map<std::uint64_t, std::size_t> slot_of_;
  std::vector<RowRef> refs_;
  std::vector<Vec> grads_;
  std::vector<bool> lookup_;
};

// How one side of a scored triple was embedded.
struct SideState {
  std::span<const double> z;              // embedding entering the score
  bool via_lookup = true;                 // false when aggregated
  std::vector<AdjEntry> neighborhood;     // kept for the backward pass
};

void resolve_lookup(const EmbeddingModel& m, EntityId v, SideState& side) {
  side.z = m.entity_row(v);
  side.via_lookup = true;
}

// Aggregated embedding for v with the scored triple removed from its
// neighborhood; falls back to lookup when nothing is left.
void resolve_aggregate(const KnowledgeGraph& g, const EmbeddingModel& m,
                       const AggregatorConfig& agg, EntityId v, const Triple& scored,
                       Vec& storage, SideState& side, BranchCounters* counters) {
  side.neighborhood = g.neighborhood(v, g.find_triple(scored));
  if (side.neighborhood.empty()) {
    if (counters != nullptr) ++counters->empty_fallback;
    resolve_lookup(m, v, side);
    return;
  }
  storage = aggregate(agg, side.neighborhood, m);
  side.z = storage;
  side.via_lookup = false;
}

// Backward through the mean-style aggregators into the neighbor rows read by
// the forward pass. d_side[i] = d(loss)/d(z_side[i]); the solve-based
// aggregators contribute nothing here.
void backprop_aggregation(const EmbeddingModel& m, const AggregatorConfig& agg,
                          const SideState& side, std::span<const double> d_side,
                          GradientBuffer& buf) {
  if (agg.kind == AggregatorKind::kLS || agg.kind == AggregatorKind::kLSU) return;
  const std::size_t dim = d_side.size();
  const double inv_n = 1.0 / static_cast<double>(side.neighborhood.size());
  for (const AdjEntry& e : side.neighborhood) {
    Vec& g_other = buf.row(true, e.other, false);
    if (agg.kind == AggregatorKind::kERAvg) {
      const auto z_rel = m.relation_row(e.rel);
      const auto z_other = m.entity_row(e.other);
      Vec& g_rel = buf.row(false, e.rel, false);
      for (std::size_t i = 0; i < dim; ++i) {
        const double c = inv_n * d_side[i];
        g_other[i] += c * z_rel[i];
        g_rel[i] += c * z_other[i];
      }
    } else {  // EAvg
      for (std::size_t i = 0; i < dim; ++i) g_other[i] += inv_n * d_side[i];
    }
  }
}

// Scores one labeled triple given both resolved sides and accumulates the
// softplus loss and all gradients. Shared by both batch implementations so
// the psi = 0 path runs the exact same arithmetic as the transductive one.
double score_and_accumulate(const EmbeddingModel& m, const AggregatorConfig& agg,
                            const LabeledTriple& ex, const SideState& head,
                            const SideState& tail, GradientBuffer& buf) {
  const std::size_t dim = m.dim();
  const auto z_rel = m.relation_row(ex.triple.rel);
  const double phi = triple_dot(head.z, z_rel, tail.z);
  const double label = static_cast<double>(ex.label);
  // d(softplus(-l * phi))/d(phi) = -l * sigmoid(-l * phi)
  const double dphi = -label * sigmoid(-label * phi);

  Vec& g_rel = buf.row(false, ex.triple.rel, true);
  for (std::size_t i = 0; i < dim; ++i) g_rel[i] += dphi * head.z[i] * tail.z[i];

  if (head.via_lookup) {
    Vec& g_head = buf.row(true, ex.triple.head, true);
    for (std::size_t i = 0; i < dim; ++i) g_head[i] += dphi * z_rel[i] * tail.z[i];
  } else {
    Vec d_head(dim);
    for (std::size_t i = 0; i < dim; ++i) d_head[i] = dphi * z_rel[i] * tail.z[i];
    backprop_aggregation(m, agg, head, d_head, buf);
  }

  if (tail.via_lookup) {
    Vec& g_tail = buf.row(true, ex.triple.tail, true);
    for (std::size_t i = 0; i < dim; ++i) g_tail[i] += dphi * head.z[i] * z_rel[i];
  } else {
    Vec d_tail(dim);
    for (std::size_t i = 0; i < dim; ++i) d_tail[i] = dphi * head.z[i] * z_rel[i];
    backprop_aggregation(m, agg, tail, d_tail, buf);
  }

  return softplus(-label * phi);
}

}  // namespace

BatchGradients batch_gradients_oos(const KnowledgeGraph& g, const EmbeddingModel& m,
                                   const TrainConfig& cfg, const LabeledBatch& batch,
                                   rng::Stream& branch_rng, BranchCounters* counters) {
  GradientBuffer buf(m.dim());
  double loss = 0.0;
  Vec head_storage;
  Vec tail_storage;
  for (const LabeledTriple& ex : batch) {
    const double draw = branch_rng.next_unit();
    SideState head;
    SideState tail;
    if (draw < cfg.psi / 2.0) {
      if (counters != nullptr) ++counters->aggregate_head;
      resolve_aggregate(g, m, cfg.aggregator, ex.triple.head, ex.triple, head_storage, head,
                        counters);
      resolve_lookup(m, ex.triple.tail, tail);
    } else if (draw < cfg.psi) {
      if (counters != nullptr) ++counters->aggregate_tail;
      resolve_lookup(m, ex.triple.head, head);
      resolve_aggregate(g, m, cfg.aggregator, ex.triple.tail, ex.triple, tail_storage, tail,
                        counters);
    } else {
      if (counters != nullptr) ++counters->both_lookup;
      resolve_lookup(m, ex.triple.head, head);
      resolve_lookup(m, ex.triple.tail, tail);
    }
    loss += score_and_accumulate(m, cfg.aggregator, ex, head, tail, buf);
  }
  loss += buf.finalize_l2(m, cfg.lambda);
  return BatchGradients{loss, buf.take_sorted()};
}

BatchGradients batch_gradients_transductive(const KnowledgeGraph& g, const EmbeddingModel& m,
                                            const TrainConfig& cfg, const LabeledBatch& batch) {
  (void)g;
  GradientBuffer buf(m.dim());
  double loss = 0.0;
  for (const LabeledTriple& ex : batch) {
    SideState head;
    SideState tail;
    resolve_lookup(m, ex.triple.head, head);
    resolve_lookup(m, ex.triple.tail, tail);
    loss += score_and_accumulate(m, cfg.aggregator, ex, head, tail, buf);
  }
  loss += buf.finalize_l2(m, cfg.lambda);
  return BatchGradients{loss, buf.take_sorted()};
}

void apply_gradients(const BatchGradients& grads, EmbeddingModel& m, OptimizerState& state,
                     double lr) {
  for (const auto& [ref, grad] : grads.rows) {
    if (ref.is_entity) {
      adagrad_step(m.ent.row(ref.index), state.ent_accum.row(ref.index), grad, lr, state.eps);
    } else {
      adagrad_step(m.rel.row(ref.index), state.rel_accum.row(ref.index), grad, lr, state.eps);
    }
  }
}

namespace {

template <typename BatchFn>
double run_epoch(const KnowledgeGraph& g, EmbeddingModel& m, OptimizerState& state,
                 const TrainConfig& cfg, std::size_t epoch, BatchFn&& batch_fn) {
  const std::size_t n = g.num_triples();
  if (n == 0) throw Error("cannot train on an empty graph");
  const std::vector<std::uint32_t> order = epoch_order(n, cfg.seed, epoch);
  const std::size_t num_batches = (n + cfg.batch_size - 1) / cfg.batch_size;
  double epoch_loss = 0.0;
  for (std::size_t b = 0; b < num_batches; ++b) {
    rng::Stream corrupt_rng(rng::substream_seed(cfg.seed, "corrupt", epoch, b));
    const LabeledBatch batch =
        next_batch(g, order, b, cfg.batch_size, cfg.neg_ratio, corrupt_rng);
    const BatchGradients grads = batch_fn(batch, b);
    apply_gradients(grads, m, state, cfg.lr);
    epoch_loss += grads.loss;
  }
  return epoch_loss;
}

}  // namespace

double train_epoch_oos(const KnowledgeGraph& g, EmbeddingModel& m, OptimizerState& state,
                       const TrainConfig& cfg, std::size_t epoch, BranchCounters* counters) {
  return run_epoch(g, m, state, cfg, epoch,
                   [&](const LabeledBatch& batch, std::size_t b) {
                     rng::Stream branch_rng(rng::substream_seed(cfg.seed, "branch", epoch, b));
                     return batch_gradients_oos(g, m, cfg, batch, branch_rng, counters);
                   });
}

double train_epoch_transductive(const KnowledgeGraph& g, EmbeddingModel& m, OptimizerState& state,
                                const TrainConfig& cfg, std::size_t epoch) {
  return run_epoch(g, m, state, cfg, epoch,
                   [&](const LabeledBatch& batch, std::size_t) {
                     return batch_gradients_transductive(g, m, cfg, batch);
                   });
}

TrainResult train(const KnowledgeGraph& g, const TrainConfig& cfg,
                  const std::vector<OosGroup>* valid_groups) {
  cfg.validate();
  TrainResult result{init_model(g.entities(), g.relations(), cfg.dim, cfg.seed), {}, 0, 0.0};
  OptimizerState state = OptimizerState::for_model(result.model);

  EmbeddingModel best;
  bool have_best = false;
  const bool do_validate = valid_groups != nullptr && !valid_groups->empty();

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double loss = train_epoch_oos(g, result.model, state, cfg, epoch);
    EpochLog log{epoch + 1, loss};
    if (do_validate && ((epoch + 1) % cfg.eval_every == 0 || epoch + 1 == cfg.epochs)) {
      const RankingReport report =
          evaluate_groups(*valid_groups, result.model, cfg.aggregator, EvalOptions{});
      log.has_valid_mrr = true;
      log.valid_mrr = report.mrr;
      if (!have_best || report.mrr > result.best_valid_mrr) {
        best = result.model;
        have_best = true;
        result.best_valid_mrr = report.mrr;
        result.best_epoch = epoch + 1;
      }
    }
    result.log.push_back(log);
  }

  if (have_best) result.model = std::move(best);
  return result;
}

}  // namespace ooskge
