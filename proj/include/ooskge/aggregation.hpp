#pragma once

#include <span>
#include <string>
#include <string_view>

#include "ooskge/kg.hpp"
#include "ooskge/model.hpp"
#include "ooskge/numerics.hpp"

namespace ooskge {

// How an embedding is computed for an entity whose own row cannot be used.
//   kERAvg  mean over neighbors of z_r (.) z_u
//   kLS     ridge solution of rows z_r (.) z_u against b[i] = ||row_i||
//   kLSU    same as kLS with b[i] = 1
//   kEAvg   mean over neighbors of z_u
enum class AggregatorKind { kERAvg, kLS, kLSU, kEAvg };

struct AggregatorConfig {
  AggregatorKind kind = AggregatorKind::kERAvg;
  double lambda = 0.01;  // ridge strength for kLS / kLSU
};

// Accepts the CLI tokens eravg | ls | ls-u | eavg.
AggregatorKind parse_aggregator(std::string_view token);
std::string_view aggregator_name(AggregatorKind kind);

// All four variants ignore edge direction: head and tail neighbors enter the
// same way. Throws EmptyNeighborhoodError when nbrs is empty; the caller
// decides the fallback.
Vec aggregate(const AggregatorConfig& cfg, std::span<const AdjEntry> nbrs,
              const EmbeddingModel& m);

}  // namespace ooskge
