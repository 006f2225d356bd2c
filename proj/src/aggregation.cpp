#include "ooskge/aggregation.hpp"

namespace ooskge {

AggregatorKind parse_aggregator(std::string_view token) {
  if (token == "eravg") return AggregatorKind::kERAvg;
  if (token == "ls") return AggregatorKind::kLS;
  if (token == "ls-u") return AggregatorKind::kLSU;
  if (token == "eavg") return AggregatorKind::kEAvg;
  throw ConfigError("unknown aggregator '" + std::string(token) +
                    "' (expected eravg, ls, ls-u, or eavg)");
}

std::string_view aggregator_name(AggregatorKind kind) {
  switch (kind) {
    case AggregatorKind::kERAvg: return "eravg";
    case AggregatorKind::kLS: return "ls";
    case AggregatorKind::kLSU: return "ls-u";
    case AggregatorKind::kEAvg: return "eavg";
  }
  return "?";
}

Vec aggregate(const AggregatorConfig& cfg, std::span<const AdjEntry> nbrs,
              const EmbeddingModel& m) {
  if (nbrs.empty()) throw EmptyNeighborhoodError("aggregate: entity has no neighbors");
  const std::size_t d = m.dim();
  const double inv_n = 1.0 / static_cast<double>(nbrs.size());

  switch (cfg.kind) {
    case AggregatorKind::kERAvg: {
      Vec out(d, 0.0);
      for (const AdjEntry& e : nbrs) {
        std::span<const double> z_r = m.relation_row(e.rel);
        std::span<const double> z_u = m.entity_row(e.other);
        for (std::size_t i = 0; i < d; ++i) out[i] += z_r[i] * z_u[i];
      }
      for (double& x : out) x *= inv_n;
      return out;
    }
    case AggregatorKind::kEAvg: {
      Vec out(d, 0.0);
      for (const AdjEntry& e : nbrs) {
        std::span<const double> z_u = m.entity_row(e.other);
        for (std::size_t i = 0; i < d; ++i) out[i] += z_u[i];
      }
      for (double& x : out) x *= inv_n;
      return out;
    }
    case AggregatorKind::kLS:
    case AggregatorKind::kLSU: {
      // Zero rows are kept; the ridge term absorbs them.
      Mat A(nbrs.size(), d);
      Vec b(nbrs.size());
      for (std::size_t k = 0; k < nbrs.size(); ++k) {
        hadamard_into(m.relation_row(nbrs[k].rel), m.entity_row(nbrs[k].other), A.row(k));
        b[k] = cfg.kind == AggregatorKind::kLS ? norm2(A.row(k)) : 1.0;
      }
      return ridge_solve(A, b, cfg.lambda);
    }
  }
  throw Error("aggregate: unreachable");
}

}  // namespace ooskge
